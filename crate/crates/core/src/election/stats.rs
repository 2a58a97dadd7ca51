use num_rational::Ratio;

use super::Election;

/// Pairwise support counts: `count(a, b)` voters certainly prefer `a` to `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonGraph {
    n: usize,
    m: usize,
    counts: Vec<usize>,
}

impl ComparisonGraph {
    pub fn from_counts(n: usize, m: usize, counts: Vec<usize>) -> Self {
        assert_eq!(counts.len(), m * m);
        Self { n, m, counts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn count(&self, a: usize, b: usize) -> usize {
        self.counts[a * self.m + b]
    }

    /// Exact fraction of voters who certainly prefer `a` to `b`.
    pub fn weight(&self, a: usize, b: usize) -> Ratio<u64> {
        Ratio::new(self.count(a, b) as u64, self.n.max(1) as u64)
    }

    pub fn weight_f64(&self, a: usize, b: usize) -> f64 {
        self.count(a, b) as f64 / self.n.max(1) as f64
    }

    /// Whether every pair is compared by every voter.
    pub fn is_complete(&self) -> bool {
        (0..self.m).all(|a| (a + 1..self.m).all(|b| self.count(a, b) + self.count(b, a) == self.n))
    }
}

pub fn comparison_graph(e: &Election) -> ComparisonGraph {
    let m = e.m();
    let mut counts = vec![0; m * m];
    for p in e.voters() {
        for (a, b) in p.pairs() {
            counts[a * m + b] += 1;
        }
    }
    ComparisonGraph { n: e.n(), m, counts }
}

/// First-place, last-place and top-list counts per candidate.
///
/// A voter without a unique top candidate adds to no plurality count, and one
/// without a unique bottom candidate adds to no veto count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scores {
    pub plurality: Vec<usize>,
    pub veto: Vec<usize>,
    /// Fraction of voters whose ranked list contains the candidate.
    pub topk_coverage: Vec<Ratio<u64>>,
}

pub fn scores(e: &Election) -> Scores {
    let m = e.m();
    let mut plurality = vec![0; m];
    let mut veto = vec![0; m];
    let mut listed = vec![0u64; m];
    for p in e.voters() {
        if let Some(t) = p.top() {
            plurality[t] += 1;
        }
        if let Some(b) = p.bottom() {
            veto[b] += 1;
        }
        for c in p.ranked_prefix() {
            listed[c] += 1;
        }
    }
    let n = e.n().max(1) as u64;
    Scores {
        plurality,
        veto,
        topk_coverage: listed.into_iter().map(|x| Ratio::new(x, n)).collect(),
    }
}
