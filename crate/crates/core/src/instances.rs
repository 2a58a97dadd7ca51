//! Random profiles and the fixed adversarial constructions.
//!
//! Every generator is a pure function of its parameters and seed. Instances
//! with a ground-truth metric carry it as a witness, together with a few
//! expected values that [`GeneratedInstance::verify`] checks.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::election::{check_consistent, social_cost, Election, MetricWitness, Point, Preference, TAU_METRIC};
use crate::error::{Error, Result};
use crate::mechanisms::ComparisonOracle;
use crate::mechanisms::{MajorityOracle, TieBreak};
use crate::sampling::rng;

/// Default ratio between far and near distances.
pub const FAR_RATIO: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedInstance {
    #[serde(skip)]
    pub election: Election,
    #[serde(default)]
    pub generator: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<MetricWitness>,
    /// Named claims about the instance, e.g. `social_cost` or `distortion`.
    #[serde(default)]
    pub expected: BTreeMap<String, Value>,
    /// Knockout pairings for the elimination mechanism, one list per round.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<Vec<(usize, usize)>>>,
    /// Candidate names, for ingested data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GeneratedInstance {
    fn new(election: Election, generator: &str, params: Value) -> Self {
        Self {
            election,
            generator: generator.into(),
            params,
            seed: None,
            witness: None,
            expected: BTreeMap::new(),
            schedule: None,
            labels: None,
        }
    }

    /// Instance without a ground truth, e.g. read from data.
    pub fn plain(election: Election, generator: &str, params: Value) -> Self {
        Self::new(election, generator, params)
    }

    fn expect(mut self, key: &str, value: Value) -> Self {
        self.expected.insert(key.into(), value);
        self
    }

    /// Social cost of every candidate under the witness.
    pub fn social_costs(&self) -> Option<Vec<f64>> {
        self.witness
            .as_ref()
            .map(|w| (0..w.m()).map(|c| social_cost(w, c)).collect())
    }

    /// Checks that the witness is consistent with the profile and that a
    /// `social_cost` claim, when present, matches it. Returns the names of
    /// the claims that were checked.
    pub fn verify(&self) -> Result<Vec<String>> {
        let mut checked = Vec::new();
        let Some(w) = &self.witness else {
            return Ok(checked);
        };
        if !check_consistent(w, &self.election)? {
            return Err(Error::TheoremFalsified(format!(
                "{}: witness contradicts the profile",
                self.generator
            )));
        }
        checked.push("consistent".into());
        if let Some(Value::Array(claimed)) = self.expected.get("social_cost") {
            let sc = self.social_costs().expect("witness present");
            let tol = TAU_METRIC * w.scale() * w.n().max(1) as f64;
            let ok = claimed.len() == sc.len()
                && claimed
                    .iter()
                    .zip(&sc)
                    .all(|(c, s)| c.as_f64().is_some_and(|c| (c - s).abs() <= tol));
            if !ok {
                return Err(Error::TheoremFalsified(format!(
                    "{}: social costs {sc:?} differ from the claimed {claimed:?}",
                    self.generator
                )));
            }
            checked.push("social_cost".into());
        }
        Ok(checked)
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// `n` independent uniformly random rankings.
pub fn impartial_culture(n: usize, m: usize, seed: u64) -> Result<GeneratedInstance> {
    require(n >= 1 && m >= 1, || format!("need n, m >= 1, got n = {n}, m = {m}"))?;
    let mut r = rng(seed);
    let rankings: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut r);
            order
        })
        .collect();
    let mut inst = GeneratedInstance::new(
        Election::from_rankings(m, &rankings)?,
        "impartial_culture",
        json!({ "n": n, "m": m }),
    );
    inst.seed = Some(seed);
    Ok(inst)
}

/// Voters and candidates uniform in the unit cube, preferences by distance.
pub fn euclidean(n: usize, m: usize, dim: usize, seed: u64) -> Result<GeneratedInstance> {
    require(n >= 1 && m >= 1, || format!("need n, m >= 1, got n = {n}, m = {m}"))?;
    require(dim >= 1, || "dim must be at least 1".into())?;
    let mut r = rng(seed);
    let mut point = || (0..dim).map(|_| r.gen::<f64>()).collect::<Vec<f64>>();
    let voters: Vec<Vec<f64>> = (0..n).map(|_| point()).collect();
    let cands: Vec<Vec<f64>> = (0..m).map(|_| point()).collect();
    let w = MetricWitness::from_coordinates(&voters, &cands)?;
    let mut inst = GeneratedInstance::new(w.induce_election(), "euclidean", json!({ "n": n, "m": m, "dim": dim }));
    inst.seed = Some(seed);
    let sc: Vec<f64> = (0..m).map(|c| social_cost(&w, c)).collect();
    inst.witness = Some(w);
    Ok(inst.expect("social_cost", json!(sc)))
}

/// Line position of the `i`-th chain candidate, counting from 1.
fn chain_position(i: usize) -> f64 {
    match i {
        1 => 0.0,
        i if i % 2 == 0 => i as f64,
        i => -((i - 1) as f64),
    }
}

fn chain_witness(ell: usize) -> Result<MetricWitness> {
    let cands: Vec<Vec<f64>> = (1..=ell).map(|i| vec![chain_position(i)]).collect();
    MetricWitness::from_coordinates(&[vec![0.0], vec![1.0]], &cands)
}

/// Two voters on a line and `ell` candidates where each one beats the
/// previous, while social costs grow as `1, 3, 5, ...`.
pub fn chain(ell: usize) -> Result<GeneratedInstance> {
    require(ell >= 2, || format!("chain length must be at least 2, got {ell}"))?;
    let w = chain_witness(ell)?;
    let e = w.induce_election_by(|_, a, b| b.cmp(&a));
    let sc: Vec<usize> = (1..=ell).map(|i| 2 * i - 1).collect();
    let mut inst = GeneratedInstance::new(e, "chain", json!({ "ell": ell }));
    inst.witness = Some(w);
    Ok(inst
        .expect("social_cost", json!(sc))
        .expect("tiebreak", json!("higher_index_wins"))
        .expect("distortion", json!(2 * ell - 1)))
}

/// A chain of `log2 m + 1` candidates plus far-away fillers, and a knockout
/// schedule under which the last chain candidate wins.
pub fn dr_lower_bound(m: usize) -> Result<GeneratedInstance> {
    require(m >= 2 && m.is_power_of_two(), || {
        format!("m must be a power of two at least 2, got {m}")
    })?;
    let t = m.trailing_zeros() as usize;
    let ell = t + 1;
    let far = 100.0 * (2 * ell) as f64;
    let size = 2 + m;
    let mut dist = vec![far; size * size];
    let chain = chain_witness(ell)?;
    for p in 0..2 + ell {
        for q in 0..2 + ell {
            dist[p * size + q] = chain.d(point(p), point(q));
        }
    }
    for p in 0..size {
        dist[p * size + p] = 0.0;
    }
    let w = MetricWitness::new(2, m, dist)?;
    let e = w.induce_election_by(|_, a, b| b.cmp(&a));
    let schedule = dr_schedule(&e, ell)?;

    let winner = ell - 1;
    let mut sc: Vec<f64> = (1..=ell).map(|i| (2 * i - 1) as f64).collect();
    sc.extend(std::iter::repeat(2.0 * far).take(m - ell));
    let mut inst = GeneratedInstance::new(e, "dr_lower_bound", json!({ "m": m }));
    inst.witness = Some(w);
    inst.schedule = Some(schedule);
    Ok(inst
        .expect("social_cost", json!(sc))
        .expect("winner", json!(winner))
        .expect("distortion", json!(2 * t + 1)))
}

fn point(p: usize) -> Point {
    if p < 2 {
        Point::Voter(p)
    } else {
        Point::Candidate(p - 2)
    }
}

/// Round `r` pits chain candidates `r - 1` and `r` (zero-based); every later
/// chain candidate meets a filler, and the remaining fillers meet each other.
fn dr_schedule(e: &Election, ell: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut oracle = MajorityOracle::new(e, TieBreak::HigherIndexWins);
    let mut fillers: Vec<usize> = (ell..e.m()).collect();
    let mut rounds = Vec::new();
    for r in 1..ell {
        let mut pairs = vec![(r - 1, r)];
        for c in r + 1..ell {
            let f = fillers
                .pop()
                .ok_or_else(|| Error::Numerical("schedule ran out of fillers".into()))?;
            pairs.push((c, f));
        }
        let mut next_fillers = Vec::new();
        for pair in fillers.chunks(2) {
            match *pair {
                [f, g] => {
                    let loser = oracle.loser(f, g)?;
                    next_fillers.push(if loser == f { g } else { f });
                    pairs.push((f, g));
                }
                _ => return Err(Error::Numerical("odd number of fillers".into())),
            }
        }
        for &(c, f) in &pairs[1..pairs.len() - next_fillers.len()] {
            if oracle.loser(c, f)? != f {
                return Err(Error::TheoremFalsified(format!("filler {f} beat chain candidate {c}")));
            }
        }
        next_fillers.sort_unstable();
        fillers = next_fillers;
        rounds.push(pairs);
    }
    Ok(rounds)
}

/// Closed form of the worst ratio for the k-top star instance.
pub fn ktop_ratio(n: usize, ratio: f64) -> f64 {
    let k = (n - 1) as f64;
    (1.0 + k * (ratio + 2.0)) / (1.0 + k * ratio)
}

/// Star metric around an unreported candidate `x = m - 1`. Voter `j`
/// reports block `j k .. (j + 1) k`; the first voter sits at distance 1 from
/// `x` and its block, every other voter at distance `ratio`.
pub fn ktop_lower_bound(m: usize, k: usize, ratio: f64) -> Result<GeneratedInstance> {
    require(k >= 1 && m >= 2 && (m - 1) % k == 0, || {
        format!("k = {k} must divide m - 1 = {}", m.saturating_sub(1))
    })?;
    require(ratio > 0.0 && ratio.is_finite(), || {
        format!("ratio must be positive, got {ratio}")
    })?;
    let n = (m - 1) / k;
    let x = m - 1;
    let mut edges = Vec::new();
    let mut lists = Vec::with_capacity(n);
    for j in 0..n {
        let len = if j == 0 { 1.0 } else { ratio };
        edges.push((Point::Voter(j), Point::Candidate(x), len));
        let block: Vec<usize> = (j * k..(j + 1) * k).collect();
        for &c in &block {
            edges.push((Point::Voter(j), Point::Candidate(c), len));
        }
        lists.push(block);
    }
    let w = MetricWitness::shortest_paths(n, m, &edges)?;
    let e = Election::from_top_lists(m, &lists)?;
    let mut inst = GeneratedInstance::new(e, "ktop_lower_bound", json!({ "m": m, "k": k, "ratio": ratio }));
    let sc: Vec<f64> = (0..m).map(|c| social_cost(&w, c)).collect();
    inst.witness = Some(w);
    Ok(inst
        .expect("social_cost", json!(sc))
        .expect("distortion", json!(ktop_ratio(n, ratio)))
        .expect("distortion_limit", json!(2 * n - 1)))
}

/// Two candidates on a line with an `epsilon` fraction of voters silent.
/// Half of the reporting voters sit at the midpoint, the rest and all silent
/// voters on top of candidate 1.
pub fn missing_voters_tight(epsilon: f64) -> Result<GeneratedInstance> {
    require(epsilon > 0.0 && epsilon < 1.0, || {
        format!("epsilon must lie in (0, 1), got {epsilon}")
    })?;
    let eps = Ratio::<i64>::approximate_float(epsilon)
        .filter(|r| *r.denom() <= 10_000)
        .ok_or_else(|| Error::InvalidParameter(format!("epsilon {epsilon} has no small rational form")))?;
    let (num, den) = (*eps.numer() as usize, *eps.denom() as usize);
    let half = den - num;
    let n = 2 * den;
    let mut positions = Vec::with_capacity(n);
    let mut voters = Vec::with_capacity(n);
    for _ in 0..half {
        positions.push(vec![1.0]);
        voters.push(Preference::from_ranking(2, &[0, 1])?);
    }
    for _ in 0..half {
        positions.push(vec![2.0]);
        voters.push(Preference::from_ranking(2, &[1, 0])?);
    }
    for _ in 0..2 * num {
        positions.push(vec![2.0]);
        voters.push(Preference::empty(2));
    }
    let w = MetricWitness::from_coordinates(&positions, &[vec![0.0], vec![2.0]])?;
    let e = Election::new(2, voters)?;
    let value = 3.0 + 4.0 * epsilon / (1.0 - epsilon);
    let mut inst = GeneratedInstance::new(e, "missing_voters_tight", json!({ "epsilon": epsilon }));
    inst.witness = Some(w);
    Ok(inst
        .expect("missing", json!(2 * num))
        .expect("social_cost", json!([(3 * half + 4 * num) as f64, half as f64]))
        .expect("distortion", json!(value)))
}

/// Candidate 0 is every voter's second choice except for the last voter,
/// who ranks it last. Unit-length graph: 0 joined to every voter, voter `i`
/// joined to her top, the last voter joined to every other candidate.
pub fn veto_instance(m: usize) -> Result<GeneratedInstance> {
    require(m >= 3, || format!("need m >= 3, got {m}"))?;
    let n = m;
    let tops: Vec<usize> = std::iter::once(1).chain((2..m).rev()).collect();
    let mut rankings = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for (i, &t) in tops.iter().enumerate() {
        let rest = (1..m - 1).map(|s| 1 + (t - 1 + s) % (m - 1));
        rankings.push([t, 0].into_iter().chain(rest).collect::<Vec<_>>());
        edges.push((Point::Voter(i), Point::Candidate(0), 1.0));
        edges.push((Point::Voter(i), Point::Candidate(t), 1.0));
    }
    let last = n - 1;
    rankings.push(tops.iter().copied().chain([0]).collect());
    edges.push((Point::Voter(last), Point::Candidate(0), 1.0));
    for c in 1..m {
        edges.push((Point::Voter(last), Point::Candidate(c), 1.0));
    }
    let w = MetricWitness::shortest_paths(n, m, &edges)?;
    let e = Election::from_rankings(m, &rankings)?;
    let mut sc = vec![(3 * m - 4) as f64; m];
    sc[0] = m as f64;
    let mut inst = GeneratedInstance::new(e, "veto_instance", json!({ "m": m }));
    inst.witness = Some(w);
    Ok(inst
        .expect("social_cost", json!(sc))
        .expect("pairwise_support", json!([m - 2, m]))
        .expect("plurality_focal", json!(0))
        .expect("veto_focal", json!(1)))
}

/// Two voters, three candidates, preferences `0 > 1 > 2` and `2 > 1 > 0`,
/// with an `alpha`-decisive witness where candidate 1 costs `2 + alpha`.
pub fn decisive_instance(alpha: f64) -> Result<GeneratedInstance> {
    require((0.0..=1.0).contains(&alpha), || {
        format!("alpha must lie in [0, 1], got {alpha}")
    })?;
    let (v1, v2) = (Point::Voter(0), Point::Voter(1));
    let (a, b, c) = (Point::Candidate(0), Point::Candidate(1), Point::Candidate(2));
    let edges = [
        (v1, a, alpha),
        (v1, b, 1.0),
        (v1, c, 1.0),
        (v2, b, 1.0 + alpha),
        (v2, c, 0.0),
    ];
    let w = MetricWitness::shortest_paths(2, 3, &edges)?;
    let e = Election::from_rankings(3, &[vec![0, 1, 2], vec![2, 1, 0]])?;
    let mut inst = GeneratedInstance::new(e, "decisive_instance", json!({ "alpha": alpha }));
    inst.witness = Some(w);
    Ok(inst
        .expect("social_cost", json!([1.0 + 2.0 * alpha, 2.0 + alpha, 1.0]))
        .expect("distortion", json!([1.0 + 2.0 * alpha, 2.0 + alpha, 1.0 + 2.0 * alpha]))
        .expect("winners", json!([0, 2])))
}

/// Every voter at distance 1 from `chosen` and `FAR_RATIO` from the rest.
pub fn hidden_star(m: usize, chosen: usize) -> Result<GeneratedInstance> {
    let rest: Vec<usize> = (0..m).filter(|&c| c != chosen).collect();
    hidden_star_with_order(m, chosen, &rest, FAR_RATIO)
}

/// [`hidden_star`] where voters rank the other candidates in `rest` order,
/// with far distance `far` (near distance 1).
pub fn hidden_star_with_order(m: usize, chosen: usize, rest: &[usize], far: f64) -> Result<GeneratedInstance> {
    require(m >= 3, || format!("need m >= 3, got {m}"))?;
    require(chosen < m, || format!("chosen candidate {chosen} out of range"))?;
    require(far >= 2.0 && far.is_finite(), || {
        format!("far distance must be at least 2, got {far}")
    })?;
    let mut check: Vec<usize> = rest.iter().copied().chain([chosen]).collect();
    check.sort_unstable();
    require(check == (0..m).collect::<Vec<_>>(), || {
        "rest must list every other candidate once".into()
    })?;
    let n = m;
    let size = n + m;
    let mut dist = vec![far; size * size];
    for p in 0..size {
        for q in 0..size {
            dist[p * size + q] = match (p < n, q < n) {
                _ if p == q => 0.0,
                (true, true) => 2.0,
                (true, false) if q - n == chosen => 1.0,
                (false, true) if p - n == chosen => 1.0,
                _ => far,
            };
        }
    }
    let w = MetricWitness::new(n, m, dist)?;
    let ranking: Vec<usize> = std::iter::once(chosen).chain(rest.iter().copied()).collect();
    let e = Election::from_rankings(m, &vec![ranking; n])?;
    let mut sc = vec![far * n as f64; m];
    sc[chosen] = n as f64;
    let mut inst = GeneratedInstance::new(e, "hidden_star", json!({ "m": m, "chosen": chosen, "far": far }));
    inst.witness = Some(w);
    Ok(inst.expect("social_cost", json!(sc)).expect("optimum", json!(chosen)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{comparison_graph, scores};
    use crate::mechanisms::{domination_root, majority_oracle, PairingStrategy};

    #[test]
    fn impartial_culture_is_seeded() {
        let a = impartial_culture(20, 5, 3).unwrap();
        assert_eq!(a.election, impartial_culture(20, 5, 3).unwrap().election);
        assert_ne!(a.election, impartial_culture(20, 5, 4).unwrap().election);
        assert!(a.election.is_total());
        let one = impartial_culture(4, 1, 0).unwrap();
        assert!(one.election.voters().iter().all(|p| p.top() == Some(0)));
    }

    #[test]
    fn euclidean_witness_is_consistent() {
        let inst = euclidean(30, 6, 2, 11).unwrap();
        assert_eq!(inst.verify().unwrap(), vec!["consistent", "social_cost"]);
    }

    #[test]
    fn chain_costs_and_ties() {
        let inst = chain(2).unwrap();
        assert_eq!(inst.social_costs().unwrap(), vec![1.0, 3.0]);
        // the second voter is equidistant and the tie goes to candidate 2
        assert_eq!(inst.election.voter(1).top(), Some(1));
        for ell in 2..=7 {
            let inst = chain(ell).unwrap();
            inst.verify().unwrap();
            for i in 1..ell {
                assert_eq!(
                    majority_oracle(&inst.election, i - 1, i, TieBreak::HigherIndexWins),
                    i - 1
                );
            }
        }
        let sc = chain(5).unwrap().social_costs().unwrap();
        assert_eq!((sc[0], sc[4]), (1.0, 9.0));
    }

    #[test]
    fn dr_schedule_crowns_the_chain_end() {
        for t in 1..=4 {
            let m = 1 << t;
            let inst = dr_lower_bound(m).unwrap();
            inst.verify().unwrap();
            let mut oracle = MajorityOracle::new(&inst.election, TieBreak::HigherIndexWins);
            let strategy = PairingStrategy::Scheduled(inst.schedule.clone().unwrap());
            let cands: Vec<usize> = (0..m).collect();
            let (w, transcript) = domination_root(&cands, &mut oracle, &strategy).unwrap();
            assert_eq!(w, t);
            assert_eq!(transcript.comparisons(), m - 1);
            let sc = inst.social_costs().unwrap();
            assert_eq!(sc[w] / sc[0], (2 * t + 1) as f64);
        }
    }

    #[test]
    fn ktop_star_matches_closed_form() {
        let inst = ktop_lower_bound(5, 2, 0.5).unwrap();
        inst.verify().unwrap();
        let sc = inst.social_costs().unwrap();
        assert!((sc[0] / sc[4] - ktop_ratio(2, 0.5)).abs() < 1e-12);
        assert!((ktop_ratio(2, 1e-6) - 3.0).abs() < 1e-3);
        assert!(ktop_lower_bound(6, 2, 1.0).is_err());
    }

    #[test]
    fn missing_voters_value() {
        let inst = missing_voters_tight(0.2).unwrap();
        inst.verify().unwrap();
        let sc = inst.social_costs().unwrap();
        assert_eq!(sc[0] / sc[1], 4.0);
        assert_eq!(inst.election.voters().iter().filter(|p| p.is_empty()).count(), 2);
    }

    #[test]
    fn veto_profile_for_four() {
        let inst = veto_instance(4).unwrap();
        inst.verify().unwrap();
        let (a, b, e, f) = (0, 1, 2, 3);
        let want = [vec![b, a, e, f], vec![f, a, b, e], vec![e, a, f, b], vec![b, f, e, a]];
        for (i, r) in want.iter().enumerate() {
            assert_eq!(inst.election.voter(i).top_list(), Some(&r[..]));
        }
        let s = scores(&inst.election);
        assert_eq!((s.plurality[0], s.veto[0]), (0, 1));
    }

    #[test]
    fn veto_support_fraction() {
        for m in 3..=8 {
            let inst = veto_instance(m).unwrap();
            inst.verify().unwrap();
            let g = comparison_graph(&inst.election);
            for b in 1..m {
                assert_eq!(g.count(0, b), m - 2);
            }
        }
    }

    #[test]
    fn decisive_witness() {
        for alpha in [0.0, 0.3, 1.0] {
            let inst = decisive_instance(alpha).unwrap();
            inst.verify().unwrap();
            let w = inst.witness.as_ref().unwrap();
            for (i, p) in inst.election.voters().iter().enumerate() {
                let (top, sec) = (p.top().unwrap(), p.second().unwrap());
                assert!(w.vc(i, top) <= alpha * w.vc(i, sec) + 1e-12);
            }
        }
        assert_eq!(decisive_instance(1.0).unwrap().social_costs().unwrap()[1], 3.0);
    }

    #[test]
    fn hidden_star_costs() {
        let inst = hidden_star(5, 3).unwrap();
        inst.verify().unwrap();
        let sc = inst.social_costs().unwrap();
        assert_eq!(sc[3], 5.0);
        assert!(sc
            .iter()
            .enumerate()
            .all(|(c, &s)| c == 3 || s / sc[3] >= FAR_RATIO / 5.0 - 1.0));
    }
}
