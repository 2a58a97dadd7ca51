//! Ordinal mechanisms: knockout elimination, Copeland, threshold kings and
//! plurality matching.

mod dr;
mod graph;
mod majority;
mod matching;
mod rules;

pub use dr::{domination_root, PairingStrategy};
pub use graph::{king_vertex, Digraph, ThresholdDigraph, Tournament};
pub use majority::{majority_loser, majority_oracle, ComparisonOracle, MajorityOracle, TieBreak};
pub use matching::{
    conjecture_probe, max_matching, plurality_matching, DominationGraph, MatchingResult, PluralityMatchingResult,
    ProbeResult,
};
pub(crate) use rules::argmax_first;
pub use rules::{balanced_rule, copeland, copeland_scores, ktop_digraph, ktop_rule, plurality};
