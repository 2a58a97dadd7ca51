use serde::{Deserialize, Serialize};

use crate::election::{comparison_graph, ComparisonGraph, Election};
use crate::error::Result;

/// Who wins a pairwise comparison with equal support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    HigherIndexWins,
    LowerIndexWins,
}

/// Loser of the majority comparison between `a` and `b`. Voters who do not
/// compare the two count for neither.
pub fn majority_oracle(e: &Election, a: usize, b: usize, tiebreak: TieBreak) -> usize {
    let (mut for_a, mut for_b) = (0, 0);
    for p in e.voters() {
        if p.prefers(a, b) {
            for_a += 1;
        } else if p.prefers(b, a) {
            for_b += 1;
        }
    }
    settle(a, b, for_a, for_b, tiebreak)
}

/// [`majority_oracle`] on precomputed pairwise counts.
pub fn majority_loser(g: &ComparisonGraph, a: usize, b: usize, tiebreak: TieBreak) -> usize {
    settle(a, b, g.count(a, b), g.count(b, a), tiebreak)
}

fn settle(a: usize, b: usize, for_a: usize, for_b: usize, tiebreak: TieBreak) -> usize {
    use std::cmp::Ordering::*;
    match for_a.cmp(&for_b) {
        Greater => b,
        Less => a,
        Equal => match tiebreak {
            TieBreak::HigherIndexWins => a.min(b),
            TieBreak::LowerIndexWins => a.max(b),
        },
    }
}

/// Source of pairwise comparison outcomes.
pub trait ComparisonOracle {
    /// The losing candidate of `a` against `b`.
    fn loser(&mut self, a: usize, b: usize) -> Result<usize>;
}

/// Answers comparisons by majority over an election.
#[derive(Debug, Clone)]
pub struct MajorityOracle {
    graph: ComparisonGraph,
    tiebreak: TieBreak,
}

impl MajorityOracle {
    pub fn new(e: &Election, tiebreak: TieBreak) -> Self {
        Self {
            graph: comparison_graph(e),
            tiebreak,
        }
    }
}

impl ComparisonOracle for MajorityOracle {
    fn loser(&mut self, a: usize, b: usize) -> Result<usize> {
        Ok(majority_loser(&self.graph, a, b, self.tiebreak))
    }
}

impl<F: FnMut(usize, usize) -> Result<usize>> ComparisonOracle for F {
    fn loser(&mut self, a: usize, b: usize) -> Result<usize> {
        self(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_majority() {
        let e = Election::from_rankings(2, &[vec![0, 1], vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(majority_oracle(&e, 0, 1, TieBreak::default()), 1);
    }

    #[test]
    fn ties_go_to_the_higher_index() {
        let e = Election::from_rankings(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(majority_oracle(&e, 0, 1, TieBreak::default()), 0);
        assert_eq!(majority_oracle(&e, 1, 0, TieBreak::default()), 0);
        assert_eq!(majority_oracle(&e, 0, 1, TieBreak::LowerIndexWins), 1);
    }
}
