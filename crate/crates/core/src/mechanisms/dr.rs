use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::majority::ComparisonOracle;
use crate::election::{Transcript, TranscriptEvent};
use crate::error::{Error, Result};

/// How survivors are paired in each round.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingStrategy {
    /// Consecutive survivors in their current order.
    #[default]
    InputOrder,
    /// Survivors shuffled before every round.
    SeededShuffle(u64),
    /// Explicit pairs per round. Each round must pair all survivors but at most
    /// one, who advances unopposed.
    Scheduled(Vec<Vec<(usize, usize)>>),
}

/// Knockout elimination: pair the survivors, keep the winners, repeat until
/// one candidate remains. Uses exactly `len - 1` comparisons.
pub fn domination_root(
    candidates: &[usize],
    oracle: &mut impl ComparisonOracle,
    pairing: &PairingStrategy,
) -> Result<(usize, Transcript)> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidates".into()));
    }
    let mut rng = match pairing {
        PairingStrategy::SeededShuffle(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut survivors = candidates.to_vec();
    let mut transcript = Transcript::new();
    let mut round = 0;
    while survivors.len() > 1 {
        round += 1;
        if let Some(rng) = rng.as_mut() {
            survivors.shuffle(rng);
        }
        let (pairs, bye) = match pairing {
            PairingStrategy::Scheduled(schedule) => scheduled_round(schedule, round, &survivors)?,
            _ => {
                let pairs = survivors.chunks_exact(2).map(|p| (p[0], p[1])).collect();
                let bye = (survivors.len() % 2 == 1).then(|| survivors[survivors.len() - 1]);
                (pairs, bye)
            }
        };
        let mut next = Vec::with_capacity(pairs.len() + 1);
        for (a, b) in pairs {
            let loser = oracle.loser(a, b)?;
            if loser != a && loser != b {
                return Err(Error::InvalidParameter(format!(
                    "oracle declared {loser} the loser of ({a}, {b})"
                )));
            }
            transcript.push(TranscriptEvent::Compare { round, a, b, loser });
            next.push(if loser == a { b } else { a });
        }
        next.extend(bye);
        survivors = next;
    }
    Ok((survivors[0], transcript))
}

fn scheduled_round(
    schedule: &[Vec<(usize, usize)>],
    round: usize,
    survivors: &[usize],
) -> Result<(Vec<(usize, usize)>, Option<usize>)> {
    let pairs = schedule
        .get(round - 1)
        .ok_or_else(|| Error::InvalidParameter(format!("schedule has no round {round}")))?;
    let mut unused: Vec<usize> = survivors.to_vec();
    for &(a, b) in pairs {
        for c in [a, b] {
            let pos = unused.iter().position(|&s| s == c).ok_or_else(|| {
                Error::InvalidParameter(format!("round {round} pairs {c}, which is not an unpaired survivor"))
            })?;
            unused.swap_remove(pos);
        }
    }
    if unused.len() > 1 {
        return Err(Error::InvalidParameter(format!(
            "round {round} leaves {} survivors unpaired",
            unused.len()
        )));
    }
    Ok((pairs.clone(), unused.pop()))
}
