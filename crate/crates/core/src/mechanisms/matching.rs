use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::{scores, Election};
use crate::error::{Error, Result};

/// Bipartite graph of voters against candidates for a focal candidate `a`.
///
/// Voter `i` may be matched to candidate `k` when `a` is at least as good as
/// `k` for her; candidate `k` accepts up to `capacity[k]` voters. This is the
/// voter-against-voter domination graph with right-hand voters grouped by
/// their top candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationGraph {
    pub focal: usize,
    pub m: usize,
    /// Candidates adjacent to each voter, ascending.
    pub adjacency: Vec<Vec<usize>>,
    pub capacity: Vec<usize>,
}

impl DominationGraph {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges `(i, k)` with `a ⪰_i k`, capacities from plurality counts.
    pub fn new(e: &Election, a: usize) -> Self {
        Self::with_capacity(e, a, scores(e).plurality)
    }

    /// Same edges with explicit capacities.
    pub fn with_capacity(e: &Election, a: usize, capacity: Vec<usize>) -> Self {
        let adjacency = e
            .voters()
            .iter()
            .map(|p| (0..e.m()).filter(|&k| p.weakly_prefers(a, k)).collect())
            .collect();
        Self {
            focal: a,
            m: e.m(),
            adjacency,
            capacity,
        }
    }
}

/// Maximum matching with its decomposition of voters by matched candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingResult {
    pub size: usize,
    /// Voters matched to each candidate.
    pub usage: Vec<usize>,
    /// Matched candidate of each voter.
    pub assignment: Vec<Option<usize>>,
    /// Matched size over the number of voters.
    pub phi: f64,
    /// `parts[0]` holds unmatched voters, `parts[k + 1]` those matched to `k`.
    pub parts: Vec<Vec<usize>>,
}

struct FlowEdge {
    to: usize,
    cap: usize,
}

/// Dinic's maximum flow on a small integer-capacity network.
struct Flow {
    edges: Vec<FlowEdge>,
    out: Vec<Vec<usize>>,
}

impl Flow {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: usize) -> usize {
        self.out[from].push(self.edges.len());
        self.edges.push(FlowEdge { to, cap });
        self.out[to].push(self.edges.len());
        self.edges.push(FlowEdge { to: from, cap: 0 });
        self.edges.len() - 2
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.out.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.out[u] {
                let e = &self.edges[id];
                if e.cap > 0 && level[e.to] == usize::MAX {
                    level[e.to] = level[u] + 1;
                    q.push_back(e.to);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, limit: usize, level: &[usize], next: &mut [usize]) -> usize {
        if u == t {
            return limit;
        }
        while next[u] < self.out[u].len() {
            let id = self.out[u][next[u]];
            let (to, cap) = (self.edges[id].to, self.edges[id].cap);
            if cap > 0 && level[to] == level[u] + 1 {
                let got = self.push(to, t, limit.min(cap), level, next);
                if got > 0 {
                    self.edges[id].cap -= got;
                    self.edges[id ^ 1].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return total;
            }
            let mut next = vec![0; self.out.len()];
            loop {
                let got = self.push(s, t, usize::MAX, &level, &mut next);
                if got == 0 {
                    break;
                }
                total += got;
            }
        }
    }
}

/// Maximum capacitated matching. Voters with the same neighbourhood are
/// merged into one flow node and split back in index order.
pub fn max_matching(g: &DominationGraph) -> MatchingResult {
    let (n, m) = (g.n(), g.m);
    let mut types: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (i, adj) in g.adjacency.iter().enumerate() {
        types.entry(adj.as_slice()).or_default().push(i);
    }
    let types: Vec<(&[usize], Vec<usize>)> = types.into_iter().collect();
    let (s, t) = (0, 1);
    let cand = |k: usize| 2 + k;
    let ty = |j: usize| 2 + m + j;
    let mut flow = Flow::new(2 + m + types.len());
    for k in 0..m {
        flow.add(cand(k), t, g.capacity[k]);
    }
    let mut links = Vec::with_capacity(types.len());
    for (j, (adj, members)) in types.iter().enumerate() {
        flow.add(s, ty(j), members.len());
        links.push(
            adj.iter()
                .map(|&k| (k, flow.add(ty(j), cand(k), members.len())))
                .collect::<Vec<_>>(),
        );
    }
    let size = flow.max_flow(s, t);

    let mut assignment = vec![None; n];
    let mut usage = vec![0; m];
    for ((_, members), link) in types.iter().zip(&links) {
        let mut voters = members.iter();
        for &(k, id) in link {
            let used = flow.edges[id ^ 1].cap;
            for &i in voters.by_ref().take(used) {
                assignment[i] = Some(k);
            }
            usage[k] += used;
        }
    }
    let mut parts = vec![Vec::new(); m + 1];
    for (i, a) in assignment.iter().enumerate() {
        parts[a.map_or(0, |k| k + 1)].push(i);
    }
    let phi = if n == 0 { 0.0 } else { size as f64 / n as f64 };
    MatchingResult {
        size,
        usage,
        assignment,
        phi,
        parts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluralityMatchingResult {
    pub winner: usize,
    pub sizes: Vec<usize>,
    pub phi: Vec<f64>,
}

fn best_by_size(sizes: Vec<usize>, n: usize) -> PluralityMatchingResult {
    let winner = super::rules::argmax_first(&sizes).expect("at least one candidate");
    let phi = sizes
        .iter()
        .map(|&s| if n == 0 { 0.0 } else { s as f64 / n as f64 })
        .collect();
    PluralityMatchingResult { winner, sizes, phi }
}

/// Candidate whose domination graph has the largest matching, lowest index
/// among equals. Needs complete rankings.
pub fn plurality_matching(e: &Election) -> Result<PluralityMatchingResult> {
    e.require_total()?;
    if e.m() == 0 {
        return Err(Error::InvalidParameter("no candidates".into()));
    }
    let capacity = scores(e).plurality;
    let sizes = (0..e.m())
        .into_par_iter()
        .map(|a| max_matching(&DominationGraph::with_capacity(e, a, capacity.clone())).size)
        .collect();
    Ok(best_by_size(sizes, e.n()))
}

/// Best matching fraction for k-top lists using only edges implied by the
/// reported pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub best: usize,
    pub fraction: f64,
    /// Whether the fraction reaches `k / m`.
    pub holds: bool,
    pub phi: Vec<f64>,
}

pub fn conjecture_probe(e: &Election, k: usize) -> Result<ProbeResult> {
    let m = e.m();
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={m}, got {k}")));
    }
    for (voter, p) in e.voters().iter().enumerate() {
        if p.top_list().map(<[usize]>::len) != Some(k) {
            return Err(Error::Precondition {
                voter,
                what: format!("a top-{k} list is required"),
            });
        }
    }
    let capacity = scores(e).plurality;
    let sizes = (0..m)
        .into_par_iter()
        .map(|a| max_matching(&DominationGraph::with_capacity(e, a, capacity.clone())).size)
        .collect();
    let r = best_by_size(sizes, e.n());
    let fraction = r.phi[r.winner];
    // fraction >= k / m, compared on integers
    let holds = r.sizes[r.winner] * m >= k * e.n();
    Ok(ProbeResult {
        best: r.winner,
        fraction,
        holds,
        phi: r.phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_matches_everyone() {
        let g = DominationGraph {
            focal: 0,
            m: 2,
            adjacency: vec![vec![0, 1]; 4],
            capacity: vec![3, 1],
        };
        let r = max_matching(&g);
        assert_eq!(r.size, 4);
        assert_eq!(r.usage, vec![3, 1]);
        assert_eq!(r.parts[0], Vec::<usize>::new());
    }

    #[test]
    fn no_edges_no_matching() {
        let g = DominationGraph {
            focal: 0,
            m: 2,
            adjacency: vec![vec![]; 3],
            capacity: vec![2, 1],
        };
        let r = max_matching(&g);
        assert_eq!((r.size, r.phi), (0, 0.0));
        assert_eq!(r.parts[0], vec![0, 1, 2]);
    }

    #[test]
    fn identical_voters_pick_top() {
        let e = Election::from_rankings(3, &vec![vec![1, 2, 0]; 5]).unwrap();
        let r = plurality_matching(&e).unwrap();
        assert_eq!(r.winner, 1);
        assert_eq!(r.phi[1], 1.0);
    }

    #[test]
    fn middle_candidate_is_perfect() {
        // a > b > e and e > b > a
        let e = Election::from_rankings(3, &[vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let r = plurality_matching(&e).unwrap();
        assert_eq!(r.sizes, vec![2, 2, 2]);
        assert_eq!(r.phi[1], 1.0);
    }

    #[test]
    fn partial_profiles_rejected() {
        let e = Election::from_top_lists(3, &[vec![0]]).unwrap();
        assert!(plurality_matching(&e).is_err());
    }

    #[test]
    fn probe_full_lists() {
        let e = Election::from_rankings(3, &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        let r = conjecture_probe(&e, 3).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(r.holds);
    }
}
