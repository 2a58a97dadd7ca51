use serde::{Deserialize, Serialize};

use super::{Election, Preference};
use crate::error::{Error, Result};

/// Relative tolerance used when comparing distances of a witness.
pub const TAU_METRIC: f64 = 1e-9;

/// A point of the joint space: voter `i` or candidate `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Voter(usize),
    Candidate(usize),
}

/// Symmetric pseudo-metric over voters followed by candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricWitness {
    n: usize,
    m: usize,
    dist: Vec<f64>,
}

impl MetricWitness {
    /// Row-major `(n + m) x (n + m)` table; voters come first.
    pub fn new(n: usize, m: usize, dist: Vec<f64>) -> Result<Self> {
        let size = n + m;
        if dist.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: format!("{size}x{size} distance table"),
                found: format!("{} entries", dist.len()),
            });
        }
        let w = Self { n, m, dist };
        for p in 0..size {
            if w.dist[p * size + p] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at point {p}")));
            }
            for q in 0..size {
                let x = w.dist[p * size + q];
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "distance ({p}, {q}) must be finite and nonnegative, got {x}"
                    )));
                }
                if x != w.dist[q * size + p] {
                    return Err(Error::InvalidParameter(format!("asymmetric distance at ({p}, {q})")));
                }
            }
        }
        if let Some((p, q, r)) = w.triangle_violation() {
            return Err(Error::InvalidParameter(format!(
                "triangle inequality fails on points {p}, {q}, {r}"
            )));
        }
        Ok(w)
    }

    /// Euclidean placement of voters and candidates.
    pub fn from_coordinates(voters: &[Vec<f64>], candidates: &[Vec<f64>]) -> Result<Self> {
        let pts: Vec<&Vec<f64>> = voters.iter().chain(candidates).collect();
        if let Some(first) = pts.first() {
            if pts.iter().any(|p| p.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{}-dimensional points", first.len()),
                    found: "points of mixed dimension".into(),
                });
            }
        }
        let size = pts.len();
        let mut dist = vec![0.0; size * size];
        for p in 0..size {
            for q in p + 1..size {
                let d = pts[p]
                    .iter()
                    .zip(pts[q])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                dist[p * size + q] = d;
                dist[q * size + p] = d;
            }
        }
        Ok(Self {
            n: voters.len(),
            m: candidates.len(),
            dist,
        })
    }

    /// Shortest-path metric of a weighted undirected graph. Points with no
    /// connecting path are rejected.
    pub fn shortest_paths(n: usize, m: usize, edges: &[(Point, Point, f64)]) -> Result<Self> {
        let size = n + m;
        let mut dist = vec![f64::INFINITY; size * size];
        for p in 0..size {
            dist[p * size + p] = 0.0;
        }
        let idx = |p: Point| -> Result<usize> {
            match p {
                Point::Voter(i) if i < n => Ok(i),
                Point::Candidate(c) if c < m => Ok(n + c),
                Point::Voter(i) => Err(Error::VoterOutOfRange { voter: i, n }),
                Point::Candidate(c) => Err(Error::CandidateOutOfRange { candidate: c, m }),
            }
        };
        for &(p, q, w) in edges {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge weight {w}")));
            }
            let (p, q) = (idx(p)?, idx(q)?);
            let slot = dist[p * size + q].min(w);
            dist[p * size + q] = slot;
            dist[q * size + p] = slot;
        }
        for k in 0..size {
            for i in 0..size {
                let dik = dist[i * size + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..size {
                    let cand = dik + dist[k * size + j];
                    if cand < dist[i * size + j] {
                        dist[i * size + j] = cand;
                    }
                }
            }
        }
        if dist.iter().any(|d| d.is_infinite()) {
            return Err(Error::InvalidParameter("graph is disconnected".into()));
        }
        Ok(Self { n, m, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn index(&self, p: Point) -> usize {
        match p {
            Point::Voter(i) => {
                assert!(i < self.n, "voter {i} out of range");
                i
            }
            Point::Candidate(c) => {
                assert!(c < self.m, "candidate {c} out of range");
                self.n + c
            }
        }
    }

    pub fn d(&self, p: Point, q: Point) -> f64 {
        let size = self.n + self.m;
        self.dist[self.index(p) * size + self.index(q)]
    }

    /// Distance between voter `i` and candidate `c`.
    #[inline]
    pub fn vc(&self, i: usize, c: usize) -> f64 {
        let size = self.n + self.m;
        self.dist[i * size + self.n + c]
    }

    /// Largest entry, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// First triple `(p, q, r)` with `d(p, r) > d(p, q) + d(q, r)` beyond tolerance.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let size = self.n + self.m;
        let tol = TAU_METRIC * self.scale();
        for p in 0..size {
            for q in 0..size {
                let dpq = self.dist[p * size + q];
                for r in 0..size {
                    if self.dist[p * size + r] > dpq + self.dist[q * size + r] + tol {
                        return Some((p, q, r));
                    }
                }
            }
        }
        None
    }

    /// Profile induced by distances; ties go to the lower candidate index.
    pub fn induce_election(&self) -> Election {
        self.induce_election_by(|_, a, b| a.cmp(&b))
    }

    /// Profile induced by distances, with `tie(voter, a, b)` ordering equidistant
    /// candidates (`Less` puts `a` first). Distances equal up to the metric
    /// tolerance count as ties.
    pub fn induce_election_by(&self, tie: impl Fn(usize, usize, usize) -> std::cmp::Ordering) -> Election {
        let tol = TAU_METRIC * self.scale();
        let voters = (0..self.n)
            .map(|i| {
                let mut order: Vec<usize> = (0..self.m).collect();
                order.sort_by(|&a, &b| {
                    let (da, db) = (self.vc(i, a), self.vc(i, b));
                    if (da - db).abs() <= tol {
                        tie(i, a, b)
                    } else {
                        da.total_cmp(&db)
                    }
                });
                Preference::from_ranking(self.m, &order).expect("a sorted permutation is a ranking")
            })
            .collect();
        Election::new(self.m, voters).expect("all voters share m")
    }
}

/// Whether every stated preference of `e` agrees with the distances of `w`.
pub fn check_consistent(w: &MetricWitness, e: &Election) -> Result<bool> {
    check_consistent_tol(w, e, TAU_METRIC)
}

/// [`check_consistent`] with an explicit relative tolerance.
pub fn check_consistent_tol(w: &MetricWitness, e: &Election, tau: f64) -> Result<bool> {
    if w.n != e.n() || w.m != e.m() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} voters and {} candidates", e.n(), e.m()),
            found: format!("{} voters and {} candidates", w.n, w.m),
        });
    }
    let tol = tau * w.scale();
    Ok(e.voters()
        .iter()
        .enumerate()
        .all(|(i, p)| p.pairs().all(|(a, b)| w.vc(i, a) <= w.vc(i, b) + tol)))
}

/// Sum of voter distances to candidate `a`.
pub fn social_cost(w: &MetricWitness, a: usize) -> f64 {
    (0..w.n).map(|i| w.vc(i, a)).sum()
}
