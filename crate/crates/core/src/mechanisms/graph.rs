use std::collections::VecDeque;

use num_rational::Ratio;

use super::majority::{majority_loser, TieBreak};
use crate::election::{comparison_graph, ComparisonGraph, Election};
use crate::error::{Error, Result};

/// Directed graph over candidates `0..m` without loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    m: usize,
    adj: Vec<bool>,
}

impl Digraph {
    pub fn empty(m: usize) -> Self {
        Self {
            m,
            adj: vec![false; m * m],
        }
    }

    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(m);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "loop at {a}");
        self.adj[a * self.m + b] = true;
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a * self.m + b] = false;
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.m + b]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        (0..m * m).filter(move |&k| self.adj[k]).map(move |k| (k / m, k % m))
    }

    pub fn out_degree(&self, a: usize) -> usize {
        (0..self.m).filter(|&b| self.has_edge(a, b)).count()
    }

    /// Every pair joined in at least one direction.
    pub fn is_semicomplete(&self) -> bool {
        (0..self.m).all(|a| (a + 1..self.m).all(|b| self.has_edge(a, b) || self.has_edge(b, a)))
    }

    /// Every pair joined in exactly one direction.
    pub fn is_tournament(&self) -> bool {
        (0..self.m).all(|a| (a + 1..self.m).all(|b| self.has_edge(a, b) != self.has_edge(b, a)))
    }

    /// Hop distance from `src` to every vertex; `None` when unreachable.
    pub fn hops_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.m];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices are reached");
            for v in 0..self.m {
                if self.has_edge(u, v) && dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Whether `src` reaches every vertex within `hops` edges.
    pub fn reaches_all_within(&self, src: usize, hops: usize) -> bool {
        self.hops_from(src).iter().all(|d| matches!(d, Some(h) if *h <= hops))
    }
}

/// Pairwise majority tournament; equal support is settled by `tiebreak`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tournament(Digraph);

impl Tournament {
    pub fn majority(e: &Election, tiebreak: TieBreak) -> Self {
        let g = comparison_graph(e);
        let m = e.m();
        let mut d = Digraph::empty(m);
        for a in 0..m {
            for b in a + 1..m {
                let loser = majority_loser(&g, a, b, tiebreak);
                let winner = if loser == a { b } else { a };
                d.add_edge(winner, loser);
            }
        }
        Self(d)
    }

    pub fn from_digraph(d: Digraph) -> Result<Self> {
        if d.is_tournament() {
            Ok(Self(d))
        } else {
            Err(Error::InvalidParameter("not a tournament".into()))
        }
    }

    pub fn digraph(&self) -> &Digraph {
        &self.0
    }
}

/// Edges `(a, b)` with `w(a, b) >= threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdDigraph {
    pub graph: Digraph,
    pub threshold: Ratio<u64>,
}

impl ThresholdDigraph {
    pub fn new(g: &ComparisonGraph, threshold: Ratio<u64>) -> Self {
        let m = g.m();
        let n = g.n().max(1) as u128;
        let (num, den) = (*threshold.numer() as u128, *threshold.denom() as u128);
        let mut graph = Digraph::empty(m);
        for a in 0..m {
            for b in 0..m {
                // count / n >= num / den, cleared of denominators
                if a != b && g.count(a, b) as u128 * den >= num * n {
                    graph.add_edge(a, b);
                }
            }
        }
        Self { graph, threshold }
    }
}

/// A vertex reaching every other one in at most two hops: the vertex of largest
/// out-degree, lowest index first. Needs every pair joined in some direction.
pub fn king_vertex(g: &Digraph) -> Result<usize> {
    if g.m() == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    if !g.is_semicomplete() {
        return Err(Error::InvalidParameter("graph does not contain a tournament".into()));
    }
    let best = (0..g.m())
        .max_by_key(|&v| (g.out_degree(v), std::cmp::Reverse(v)))
        .expect("nonempty");
    if g.reaches_all_within(best, 2) {
        Ok(best)
    } else {
        Err(Error::TheoremFalsified(format!(
            "vertex {best} of largest out-degree does not reach every vertex in two hops"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitive_source_is_king() {
        let g = Digraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(king_vertex(&g).unwrap(), 0);
    }

    #[test]
    fn three_cycle_all_kings() {
        let g = Digraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let k = king_vertex(&g).unwrap();
        assert_eq!(k, 0);
        assert!((0..3).all(|v| g.reaches_all_within(v, 2)));
    }

    #[test]
    fn missing_pair_rejected() {
        let g = Digraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert!(king_vertex(&g).is_err());
    }

    #[test]
    fn threshold_is_exact() {
        let e = Election::from_rankings(2, &[vec![0, 1], vec![0, 1], vec![1, 0]]).unwrap();
        let g = comparison_graph(&e);
        let t = ThresholdDigraph::new(&g, Ratio::new(1, 3));
        assert!(t.graph.has_edge(0, 1) && t.graph.has_edge(1, 0));
        let t = ThresholdDigraph::new(&g, Ratio::new(2, 3));
        assert!(t.graph.has_edge(0, 1) && !t.graph.has_edge(1, 0));
    }
}
