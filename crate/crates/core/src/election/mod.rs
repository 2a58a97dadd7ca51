//! Elections over partial preferences.
//!
//! Each voter reports a strict partial order over the candidates, stored as its
//! transitive closure. Total rankings and k-top lists are special cases; a
//! k-top list ranks its members above every omitted candidate and says nothing
//! about the omitted ones.

mod metric;
mod stats;
mod text;
mod transcript;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub use metric::{check_consistent, check_consistent_tol, social_cost, MetricWitness, Point, TAU_METRIC};
pub use stats::{comparison_graph, scores, ComparisonGraph, Scores};
pub use text::{parse_election, write_election};
pub use transcript::{Transcript, TranscriptEvent};

/// Smallest transitively closed superset of `pairs` over candidates `0..m`.
///
/// `(a, b)` means `a` is preferred to `b`. Fails if the closure relates some
/// candidate to itself, which happens exactly when the input has a cycle.
pub fn transitive_closure(m: usize, pairs: &[(usize, usize)]) -> Result<BTreeSet<(usize, usize)>> {
    let rel = closed_matrix(m, pairs)?;
    let mut out = BTreeSet::new();
    for a in 0..m {
        for b in 0..m {
            if rel[a * m + b] {
                out.insert((a, b));
            }
        }
    }
    Ok(out)
}

fn closed_matrix(m: usize, pairs: &[(usize, usize)]) -> Result<Vec<bool>> {
    let mut rel = vec![false; m * m];
    for &(a, b) in pairs {
        for c in [a, b] {
            if c >= m {
                return Err(Error::CandidateOutOfRange { candidate: c, m });
            }
        }
        rel[a * m + b] = true;
    }
    for k in 0..m {
        for i in 0..m {
            if !rel[i * m + k] {
                continue;
            }
            for j in 0..m {
                if rel[k * m + j] {
                    rel[i * m + j] = true;
                }
            }
        }
    }
    for a in 0..m {
        if rel[a * m + a] {
            // any cycle through `a` puts some (a, b) and (b, a) in the closure
            let b = (0..m)
                .find(|&b| b != a && rel[a * m + b] && rel[b * m + a])
                .unwrap_or(a);
            return Err(Error::InconsistentPreferences { a, b });
        }
    }
    Ok(rel)
}

/// One voter's reported preferences: a transitively closed strict partial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preference {
    m: usize,
    above: Vec<bool>,
    top_list: Option<Vec<usize>>,
}

impl Preference {
    /// A voter who reports nothing.
    pub fn empty(m: usize) -> Self {
        Self::normalized(m, vec![false; m * m], None)
    }

    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Ok(Self::normalized(m, closed_matrix(m, pairs)?, None))
    }

    /// A complete ranking, best first. Must be a permutation of `0..m`.
    pub fn from_ranking(m: usize, ranking: &[usize]) -> Result<Self> {
        if ranking.len() != m {
            return Err(Error::DimensionMismatch {
                expected: format!("ranking of {m} candidates"),
                found: format!("{} entries", ranking.len()),
            });
        }
        Self::from_top_list(m, ranking)
    }

    /// A k-top list, best first: ranked candidates beat each other in order and
    /// beat every omitted candidate.
    pub fn from_top_list(m: usize, list: &[usize]) -> Result<Self> {
        let groups: Vec<Vec<usize>> = list.iter().map(|&c| vec![c]).collect();
        Self::from_groups(m, &groups)
    }

    /// Ranked groups, best first. Candidates within a group are incomparable;
    /// omitted candidates sit below every listed one and are mutually
    /// incomparable. A list of singleton groups carries a k-top annotation.
    pub fn from_groups(m: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; m];
        for &c in groups.iter().flatten() {
            if c >= m {
                return Err(Error::CandidateOutOfRange { candidate: c, m });
            }
            if seen[c] {
                return Err(Error::InconsistentPreferences { a: c, b: c });
            }
            seen[c] = true;
        }
        let mut above = vec![false; m * m];
        for (g, group) in groups.iter().enumerate() {
            for &a in group {
                for later in &groups[g + 1..] {
                    for &b in later {
                        above[a * m + b] = true;
                    }
                }
                for b in (0..m).filter(|&b| !seen[b]) {
                    above[a * m + b] = true;
                }
            }
        }
        let list = groups
            .iter()
            .all(|g| g.len() == 1)
            .then(|| groups.iter().map(|g| g[0]).collect());
        Ok(Self::normalized(m, above, list))
    }

    fn normalized(m: usize, above: Vec<bool>, top_list: Option<Vec<usize>>) -> Self {
        let mut pref = Self { m, above, top_list };
        if matches!(&pref.top_list, Some(l) if l.is_empty()) {
            pref.top_list = None;
        }
        if pref.top_list.is_none() && pref.is_total() {
            pref.top_list = Some(pref.ranked_prefix());
        }
        pref
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether `a` is certainly preferred to `b`.
    #[inline]
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.above[a * self.m + b]
    }

    /// `a` is `b` or certainly preferred to it.
    #[inline]
    pub fn weakly_prefers(&self, a: usize, b: usize) -> bool {
        a == b || self.prefers(a, b)
    }

    pub fn compares(&self, a: usize, b: usize) -> bool {
        self.prefers(a, b) || self.prefers(b, a)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        (0..m * m).filter(move |&k| self.above[k]).map(move |k| (k / m, k % m))
    }

    pub fn is_empty(&self) -> bool {
        !self.above.iter().any(|&x| x)
    }

    /// Pairs of a transitive reduction: `(a, b)` with no `c` strictly between.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs()
            .filter(|&(a, b)| !(0..self.m).any(|c| self.prefers(a, c) && self.prefers(c, b)))
            .collect()
    }

    pub fn is_total(&self) -> bool {
        (0..self.m).all(|a| (a + 1..self.m).all(|b| self.compares(a, b)))
    }

    /// Number of candidates `a` is preferred to.
    pub fn wins(&self, a: usize) -> usize {
        (0..self.m).filter(|&b| self.prefers(a, b)).count()
    }

    fn losses(&self, a: usize) -> usize {
        (0..self.m).filter(|&b| self.prefers(b, a)).count()
    }

    /// The unique candidate preferred to every other one.
    pub fn top(&self) -> Option<usize> {
        (0..self.m).find(|&a| self.wins(a) + 1 == self.m)
    }

    /// The unique candidate beaten only by the top one.
    pub fn second(&self) -> Option<usize> {
        let top = self.top()?;
        (0..self.m).find(|&a| a != top && self.prefers(top, a) && self.wins(a) + 2 == self.m)
    }

    /// The unique candidate every other one is preferred to.
    pub fn bottom(&self) -> Option<usize> {
        (0..self.m).find(|&a| self.losses(a) + 1 == self.m)
    }

    /// The k-top list, if the voter carries one. Total orders always do.
    pub fn top_list(&self) -> Option<&[usize]> {
        self.top_list.as_deref()
    }

    /// Longest prefix of positions that are determined: each entry beats every
    /// candidate not yet listed.
    pub fn ranked_prefix(&self) -> Vec<usize> {
        if let Some(list) = &self.top_list {
            return list.clone();
        }
        let mut left: Vec<usize> = (0..self.m).collect();
        let mut out = Vec::new();
        while left.len() > 1 {
            let Some(pos) = left
                .iter()
                .position(|&a| left.iter().all(|&b| a == b || self.prefers(a, b)))
            else {
                break;
            };
            out.push(left.remove(pos));
        }
        if left.len() == 1 && out.len() + 1 == self.m {
            out.push(left[0]);
        }
        out
    }

    /// Keep only the first `k` ranked positions.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        let prefix = self.ranked_prefix();
        if prefix.len() < k.min(self.m) {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate to top {k}: only {} positions are ranked",
                prefix.len()
            )));
        }
        Self::from_top_list(self.m, &prefix[..k.min(self.m)])
    }

    /// Ranked layers when the relation is a strict weak order: everything in an
    /// earlier layer beats everything in a later one, nothing inside a layer is
    /// compared.
    pub(crate) fn weak_order_layers(&self) -> Option<Vec<Vec<usize>>> {
        let m = self.m;
        let mut layers: Vec<Vec<usize>> = Vec::new();
        let mut placed = vec![false; m];
        let mut count = 0;
        while count < m {
            let layer: Vec<usize> = (0..m)
                .filter(|&a| !placed[a] && (0..m).all(|b| placed[b] || !self.prefers(b, a)))
                .collect();
            if layer.is_empty() {
                return None;
            }
            for &a in &layer {
                placed[a] = true;
            }
            count += layer.len();
            layers.push(layer);
        }
        for (i, upper) in layers.iter().enumerate() {
            for &a in upper {
                for (j, lower) in layers.iter().enumerate() {
                    for &b in lower {
                        if self.prefers(a, b) != (j > i) {
                            return None;
                        }
                    }
                }
            }
        }
        Some(layers)
    }
}

/// Voters, candidates, and each voter's reported partial order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Election {
    m: usize,
    voters: Vec<Preference>,
}

impl Election {
    pub fn new(m: usize, voters: Vec<Preference>) -> Result<Self> {
        if let Some(p) = voters.iter().find(|p| p.m != m) {
            return Err(Error::DimensionMismatch {
                expected: format!("{m} candidates"),
                found: format!("{} candidates", p.m),
            });
        }
        Ok(Self { m, voters })
    }

    pub fn from_rankings(m: usize, rankings: &[Vec<usize>]) -> Result<Self> {
        let voters = rankings
            .iter()
            .map(|r| Preference::from_ranking(m, r))
            .collect::<Result<_>>()?;
        Self::new(m, voters)
    }

    pub fn from_top_lists(m: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let voters = lists
            .iter()
            .map(|r| Preference::from_top_list(m, r))
            .collect::<Result<_>>()?;
        Self::new(m, voters)
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn voter(&self, i: usize) -> &Preference {
        &self.voters[i]
    }

    pub fn voters(&self) -> &[Preference] {
        &self.voters
    }

    pub fn is_total(&self) -> bool {
        self.voters.iter().all(Preference::is_total)
    }

    pub(crate) fn require_total(&self) -> Result<()> {
        match self.voters.iter().position(|p| !p.is_total()) {
            Some(voter) => Err(Error::Precondition {
                voter,
                what: "a complete ranking is required".into(),
            }),
            None => Ok(()),
        }
    }

    /// Every voter reduced to her first `k` positions.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        let voters = self.voters.iter().map(|p| p.truncate(k)).collect::<Result<_>>()?;
        Self::new(self.m, voters)
    }

    /// Same electorate with the listed voters reporting nothing.
    pub fn mask(&self, missing: &[usize]) -> Result<Self> {
        let mut voters = self.voters.clone();
        for &i in missing {
            let n = voters.len();
            let slot = voters.get_mut(i).ok_or(Error::VoterOutOfRange { voter: i, n })?;
            *slot = Preference::empty(self.m);
        }
        Self::new(self.m, voters)
    }

    /// The sub-election formed by the listed voters (repeats allowed).
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let n = self.n();
        let voters = indices
            .iter()
            .map(|&i| {
                self.voters
                    .get(i)
                    .cloned()
                    .ok_or(Error::VoterOutOfRange { voter: i, n })
            })
            .collect::<Result<_>>()?;
        Self::new(self.m, voters)
    }

    pub(crate) fn check_candidate(&self, c: usize) -> Result<()> {
        if c < self.m {
            Ok(())
        } else {
            Err(Error::CandidateOutOfRange {
                candidate: c,
                m: self.m,
            })
        }
    }
}
