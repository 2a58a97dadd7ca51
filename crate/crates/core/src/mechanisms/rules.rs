use std::cmp::Reverse;

use num_rational::Ratio;

use super::graph::{king_vertex, ThresholdDigraph};
use crate::election::{comparison_graph, scores, Election};
use crate::error::{Error, Result};

/// Doubled Copeland scores: two points per pairwise win, one per draw.
pub fn copeland_scores(e: &Election) -> Result<Vec<usize>> {
    let g = comparison_graph(e);
    let m = e.m();
    let mut score = vec![0; m];
    for a in 0..m {
        for b in a + 1..m {
            let (ab, ba) = (g.count(a, b), g.count(b, a));
            if ab + ba == 0 {
                return Err(Error::PairPrecondition {
                    a,
                    b,
                    what: "no voter compares this pair".into(),
                });
            }
            match ab.cmp(&ba) {
                std::cmp::Ordering::Greater => score[a] += 2,
                std::cmp::Ordering::Less => score[b] += 2,
                std::cmp::Ordering::Equal => {
                    score[a] += 1;
                    score[b] += 1;
                }
            }
        }
    }
    Ok(score)
}

/// Candidate with the most pairwise wins, draws counting half, lowest index
/// among equals.
pub fn copeland(e: &Election) -> Result<usize> {
    let s = copeland_scores(e)?;
    argmax_first(&s).ok_or_else(|| Error::InvalidParameter("no candidates".into()))
}

/// Candidate ranked first by the most voters, lowest index among equals.
pub fn plurality(e: &Election) -> Result<usize> {
    argmax_first(&scores(e).plurality).ok_or_else(|| Error::InvalidParameter("no candidates".into()))
}

pub(crate) fn argmax_first<T: Ord + Copy>(values: &[T]) -> Option<usize> {
    (0..values.len()).max_by_key(|&i| (values[i], Reverse(i)))
}

fn to_ratio(x: f64, what: &str) -> Result<Ratio<u64>> {
    Ratio::<i64>::approximate_float(x)
        .filter(|r| *r.numer() >= 0)
        .map(|r| Ratio::new(*r.numer() as u64, *r.denom() as u64))
        .ok_or_else(|| Error::InvalidParameter(format!("{what} must be a nonnegative number, got {x}")))
}

/// King of the digraph with an edge `(a, b)` whenever at least `alpha / 2` of
/// the voters certainly prefer `a` to `b`. Every pair must be compared by at
/// least an `alpha` fraction of the voters.
pub fn balanced_rule(e: &Election, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let g = comparison_graph(e);
    let alpha = to_ratio(alpha, "alpha")?;
    let n = e.n() as u128;
    let (num, den) = (*alpha.numer() as u128, *alpha.denom() as u128);
    for a in 0..e.m() {
        for b in a + 1..e.m() {
            if ((g.count(a, b) + g.count(b, a)) as u128) * den < num * n {
                return Err(Error::PairPrecondition {
                    a,
                    b,
                    what: format!("fewer than a {alpha} fraction of voters compare this pair"),
                });
            }
        }
    }
    let t = ThresholdDigraph::new(&g, alpha / 2);
    king_vertex(&t.graph)
}

/// The threshold digraph used by [`ktop_rule`]: `w(a, b) >= k / (3m)`.
pub fn ktop_digraph(e: &Election, k: usize) -> ThresholdDigraph {
    ThresholdDigraph::new(&comparison_graph(e), Ratio::new(k as u64, 3 * e.m() as u64))
}

/// For k-top lists: a vertex reaching all others within two hops in
/// [`ktop_digraph`], tried in order of decreasing top-k coverage.
pub fn ktop_rule(e: &Election, k: usize) -> Result<usize> {
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
    let g = ktop_digraph(e, k).graph;
    let cover = scores(e).topk_coverage;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&a| (Reverse(cover[a]), a));
    order
        .into_iter()
        .find(|&a| g.reaches_all_within(a, 2))
        .ok_or_else(|| Error::TheoremFalsified(format!("no vertex reaches all others in two hops (k = {k})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::Preference;

    #[test]
    fn copeland_unanimous() {
        let e = Election::from_rankings(3, &vec![vec![2, 0, 1]; 3]).unwrap();
        assert_eq!(copeland(&e).unwrap(), 2);
    }

    #[test]
    fn copeland_cycle_breaks_by_index() {
        let e = Election::from_rankings(3, &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(copeland_scores(&e).unwrap(), vec![2, 2, 2]);
        assert_eq!(copeland(&e).unwrap(), 0);
    }

    #[test]
    fn copeland_needs_support() {
        let e = Election::new(
            3,
            vec![
                Preference::from_pairs(3, &[(0, 1), (1, 2)]).unwrap(),
                Preference::empty(3),
            ],
        )
        .unwrap();
        assert_eq!(copeland(&e).unwrap(), 0);
        let e = Election::new(3, vec![Preference::from_pairs(3, &[(0, 1)]).unwrap()]).unwrap();
        assert!(matches!(copeland(&e), Err(Error::PairPrecondition { a: 0, b: 2, .. })));
    }

    #[test]
    fn balanced_coverage_error_names_pair() {
        let e = Election::new(3, vec![Preference::from_pairs(3, &[(0, 1), (0, 2)]).unwrap(); 2]).unwrap();
        assert!(matches!(
            balanced_rule(&e, 0.5),
            Err(Error::PairPrecondition { a: 1, b: 2, .. })
        ));
    }

    #[test]
    fn balanced_two_candidates() {
        let mut voters = vec![Preference::from_pairs(2, &[(1, 0)]).unwrap(); 2];
        voters.push(Preference::from_pairs(2, &[(0, 1)]).unwrap());
        voters.extend(vec![Preference::empty(2); 3]);
        let e = Election::new(2, voters).unwrap();
        assert_eq!(balanced_rule(&e, 0.5).unwrap(), 1);
    }

    #[test]
    fn ktop_unanimous_top() {
        let e = Election::from_top_lists(4, &[vec![2], vec![2], vec![2]]).unwrap();
        assert_eq!(ktop_rule(&e, 1).unwrap(), 2);
        assert!(matches!(ktop_rule(&e, 2), Err(Error::Precondition { voter: 0, .. })));
    }
}
