use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_lp, Cmp, LinearProgram, LpOutcome, LpStatus};
use crate::election::{Election, MetricWitness, Point};
use crate::error::{Error, Result};
use crate::extended::ExtReal;

/// Relative tolerance on LP objective values.
pub const TAU_LP: f64 = 1e-7;

/// Which constraints of the distortion LP are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSet {
    /// Voter-candidate and candidate-candidate variables only. Voter-voter
    /// distances never enter the objective or the ordering rows, and the
    /// completion `d(i, j) = min_c d(i, c) + d(c, j)` always satisfies the
    /// dropped triangle rows.
    #[default]
    Pruned,
    /// Every pair of points is a variable, every triple contributes its three
    /// triangle rows and every stated pair its ordering row. Meant for
    /// cross-checking on small instances.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    /// Decisiveness: every voter's distance to her top candidate is at most
    /// `alpha` times the distance to her second one.
    pub alpha: Option<f64>,
    pub rows: RowSet,
    /// Start from the triangle rows through the reference candidate and add
    /// the others on violation. Ignored for [`RowSet::Full`].
    pub lazy: bool,
    /// Voters with identical preferences share one block of variables.
    /// Ignored for [`RowSet::Full`].
    pub aggregate: bool,
    /// Attach a worst-case pseudo-metric to each candidate in reports.
    pub witnesses: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            alpha: None,
            rows: RowSet::Pruned,
            lazy: true,
            aggregate: true,
            witnesses: false,
        }
    }
}

impl LpOptions {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha: Some(alpha),
            ..Self::default()
        }
    }

    pub fn full() -> Self {
        Self {
            rows: RowSet::Full,
            lazy: false,
            aggregate: false,
            ..Self::default()
        }
    }
}

/// The distortion LP of candidate `a` against `b`, with its variable map.
#[derive(Debug, Clone)]
pub struct MetricLp {
    pub lp: LinearProgram,
    n: usize,
    m: usize,
    a: usize,
    b: usize,
    rows: RowSet,
    /// LP voter block of each original voter.
    slot_of: Vec<usize>,
    slots: usize,
    cc_base: usize,
    vv_base: usize,
}

impl MetricLp {
    pub fn candidates(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    /// Number of distinct voter blocks in the program.
    pub fn voter_blocks(&self) -> usize {
        self.slots
    }

    fn vc(&self, slot: usize, c: usize) -> usize {
        slot * self.m + c
    }

    fn cc(&self, c: usize, d: usize) -> usize {
        let (x, y) = (c.min(d), c.max(d));
        // strict upper triangle, row by row
        self.cc_base + x * self.m - x * (x + 1) / 2 + (y - x - 1)
    }

    fn point(&self, p: Point) -> usize {
        match p {
            Point::Voter(i) => i,
            Point::Candidate(c) => self.n + c,
        }
    }

    fn full_var(&self, p: usize, q: usize) -> usize {
        let size = self.n + self.m;
        let (x, y) = (p.min(q), p.max(q));
        self.vv_base + x * size - x * (x + 1) / 2 + (y - x - 1)
    }

    /// Variable holding `d(p, q)`, if the program has one.
    pub fn var(&self, p: Point, q: Point) -> Option<usize> {
        if p == q {
            return None;
        }
        match self.rows {
            RowSet::Full => Some(self.full_var(self.point(p), self.point(q))),
            RowSet::Pruned => match (p, q) {
                (Point::Voter(i), Point::Candidate(c)) | (Point::Candidate(c), Point::Voter(i)) => {
                    Some(self.vc(self.slot_of[i], c))
                }
                (Point::Candidate(c), Point::Candidate(d)) => Some(self.cc(c, d)),
                (Point::Voter(_), Point::Voter(_)) => None,
            },
        }
    }
}

/// Build the LP maximizing `SC(a)` subject to `SC(b) = 1` over metrics
/// consistent with `e`.
pub fn build_metric_lp(e: &Election, a: usize, b: usize, opts: &LpOptions) -> Result<MetricLp> {
    e.check_candidate(a)?;
    e.check_candidate(b)?;
    if a == b {
        return Err(Error::InvalidParameter(format!(
            "the LP needs two distinct candidates, got {a} twice"
        )));
    }
    if e.n() == 0 {
        return Err(Error::InvalidParameter("the LP needs at least one voter".into()));
    }
    if let Some(alpha) = opts.alpha {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        for (voter, p) in e.voters().iter().enumerate() {
            if p.top().is_none() || p.second().is_none() {
                return Err(Error::Precondition {
                    voter,
                    what: "decisiveness needs an identified top and second candidate".into(),
                });
            }
        }
    }
    match opts.rows {
        RowSet::Pruned => Ok(build_pruned(e, a, b, opts)),
        RowSet::Full => Ok(build_full(e, a, b, opts.alpha)),
    }
}

fn voter_slots(e: &Election, aggregate: bool) -> (Vec<usize>, Vec<usize>) {
    let mut slot_of = Vec::with_capacity(e.n());
    let mut reps = Vec::new();
    let mut seen: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
    for (i, p) in e.voters().iter().enumerate() {
        let slot = if aggregate {
            *seen.entry(p.pairs().collect()).or_insert_with(|| {
                reps.push(i);
                reps.len() - 1
            })
        } else {
            reps.push(i);
            reps.len() - 1
        };
        slot_of.push(slot);
    }
    (slot_of, reps)
}

fn build_pruned(e: &Election, a: usize, b: usize, opts: &LpOptions) -> MetricLp {
    let (n, m) = (e.n(), e.m());
    let (slot_of, reps) = voter_slots(e, opts.aggregate);
    let slots = reps.len();
    let mut weight = vec![0.0; slots];
    for &s in &slot_of {
        weight[s] += 1.0;
    }
    let cc_base = slots * m;
    let mut mlp = MetricLp {
        lp: LinearProgram::new(),
        n,
        m,
        a,
        b,
        rows: RowSet::Pruned,
        slot_of,
        slots,
        cc_base,
        vv_base: cc_base + m * (m - 1) / 2,
    };
    let mut lp = LinearProgram::new();
    for s in 0..slots {
        for c in 0..m {
            lp.add_var(if c == a { weight[s] } else { 0.0 }, 0.0, f64::INFINITY);
        }
    }
    for _ in 0..m * (m - 1) / 2 {
        lp.add_var(0.0, 0.0, f64::INFINITY);
    }
    lp.add_row((0..slots).map(|s| (mlp.vc(s, b), weight[s])).collect(), Cmp::Eq, 1.0);

    for (s, &i) in reps.iter().enumerate() {
        let pref = e.voter(i);
        for (p, q) in pref.covering_pairs() {
            lp.add_row(vec![(mlp.vc(s, p), 1.0), (mlp.vc(s, q), -1.0)], Cmp::Le, 0.0);
        }
        if let Some(alpha) = opts.alpha {
            let (t, sec) = (pref.top().expect("checked"), pref.second().expect("checked"));
            lp.add_row(vec![(mlp.vc(s, t), 1.0), (mlp.vc(s, sec), -alpha)], Cmp::Le, 0.0);
        }
    }

    let triangle = |lp: &mut LinearProgram, eager: bool, x: usize, y: usize, z: usize| {
        // d(x) <= d(y) + d(z)
        let terms = vec![(x, 1.0), (y, -1.0), (z, -1.0)];
        if eager || !opts.lazy {
            lp.add_row(terms, Cmp::Le, 0.0);
        } else {
            lp.add_lazy_row(terms, Cmp::Le, 0.0);
        }
    };
    for (s, &i) in reps.iter().enumerate() {
        let pref = e.voter(i);
        for c in 0..m {
            for d in c + 1..m {
                let eager = c == b || d == b;
                let (vc, vd, cd) = (mlp.vc(s, c), mlp.vc(s, d), mlp.cc(c, d));
                triangle(&mut lp, eager, cd, vc, vd);
                // implied by the ordering row when the voter ranks c above d
                if !pref.prefers(c, d) {
                    triangle(&mut lp, eager, vc, vd, cd);
                }
                if !pref.prefers(d, c) {
                    triangle(&mut lp, eager, vd, vc, cd);
                }
            }
        }
    }
    for c in 0..m {
        for d in c + 1..m {
            for f in d + 1..m {
                let eager = c == b || d == b || f == b;
                let (cd, cf, df) = (mlp.cc(c, d), mlp.cc(c, f), mlp.cc(d, f));
                triangle(&mut lp, eager, cd, cf, df);
                triangle(&mut lp, eager, cf, cd, df);
                triangle(&mut lp, eager, df, cd, cf);
            }
        }
    }
    mlp.lp = lp;
    mlp
}

fn build_full(e: &Election, a: usize, b: usize, alpha: Option<f64>) -> MetricLp {
    let (n, m) = (e.n(), e.m());
    let size = n + m;
    let mut mlp = MetricLp {
        lp: LinearProgram::new(),
        n,
        m,
        a,
        b,
        rows: RowSet::Full,
        slot_of: (0..n).collect(),
        slots: n,
        cc_base: 0,
        vv_base: 0,
    };
    let mut lp = LinearProgram::new();
    for p in 0..size {
        for q in p + 1..size {
            let obj = if p < n && q == n + a { 1.0 } else { 0.0 };
            lp.add_var(obj, 0.0, f64::INFINITY);
        }
    }
    let d = |p: usize, q: usize| mlp.full_var(p, q);
    lp.add_row((0..n).map(|i| (d(i, n + b), 1.0)).collect(), Cmp::Eq, 1.0);
    for (i, pref) in e.voters().iter().enumerate() {
        for (p, q) in pref.pairs() {
            lp.add_row(vec![(d(i, n + p), 1.0), (d(i, n + q), -1.0)], Cmp::Le, 0.0);
        }
        if let Some(alpha) = alpha {
            let (t, sec) = (pref.top().expect("checked"), pref.second().expect("checked"));
            lp.add_row(vec![(d(i, n + t), 1.0), (d(i, n + sec), -alpha)], Cmp::Le, 0.0);
        }
    }
    for p in 0..size {
        for q in p + 1..size {
            for r in q + 1..size {
                let (pq, pr, qr) = (d(p, q), d(p, r), d(q, r));
                lp.add_row(vec![(pq, 1.0), (pr, -1.0), (qr, -1.0)], Cmp::Le, 0.0);
                lp.add_row(vec![(pr, 1.0), (pq, -1.0), (qr, -1.0)], Cmp::Le, 0.0);
                lp.add_row(vec![(qr, 1.0), (pq, -1.0), (pr, -1.0)], Cmp::Le, 0.0);
            }
        }
    }
    mlp.lp = lp;
    mlp
}

/// Build and solve the LP for `(a, b)`.
pub fn solve_pair(e: &Election, a: usize, b: usize, opts: &LpOptions) -> Result<(MetricLp, LpOutcome)> {
    let mlp = build_metric_lp(e, a, b, opts)?;
    let out = solve_lp(&mlp.lp).map_err(|err| Error::Solver {
        a,
        b,
        msg: err.to_string(),
    })?;
    if out.status == LpStatus::Infeasible {
        return Err(Error::Solver {
            a,
            b,
            msg: "the program was reported infeasible".into(),
        });
    }
    Ok((mlp, out))
}

/// Worst ratio `SC(a) / SC(b)` over metrics consistent with `e`.
pub fn distortion_pair(e: &Election, a: usize, b: usize) -> Result<ExtReal> {
    distortion_pair_with(e, a, b, &LpOptions::default())
}

pub fn distortion_pair_with(e: &Election, a: usize, b: usize, opts: &LpOptions) -> Result<ExtReal> {
    e.check_candidate(a)?;
    e.check_candidate(b)?;
    if a == b {
        return Ok(ExtReal::Finite(1.0));
    }
    let (_, out) = solve_pair(e, a, b, opts)?;
    Ok(out.value.expect("feasible outcomes carry a value"))
}

/// First index whose value is within tolerance of the largest one.
fn argmax_tol(values: &[ExtReal]) -> usize {
    let best = values
        .iter()
        .copied()
        .fold(ExtReal::Finite(f64::NEG_INFINITY), ExtReal::max);
    values
        .iter()
        .position(|v| match (v, best) {
            (_, ExtReal::Infinite) => !v.is_finite(),
            (ExtReal::Finite(x), ExtReal::Finite(y)) => *x >= y - TAU_LP * y.abs().max(1.0),
            _ => false,
        })
        .unwrap_or(0)
}

/// First index whose value is within tolerance of the smallest one.
fn argmin_tol(values: &[ExtReal]) -> usize {
    let finite: Vec<f64> = values.iter().filter_map(|v| v.finite()).collect();
    let Some(best) = finite.iter().copied().reduce(f64::min) else {
        return 0;
    };
    values
        .iter()
        .position(|v| matches!(v, ExtReal::Finite(x) if *x <= best + TAU_LP * best.abs().max(1.0)))
        .expect("the minimum is attained")
}

/// `max_b D(a | b)` together with the first maximizing `b`.
pub fn distortion_of(e: &Election, a: usize, opts: &LpOptions) -> Result<(ExtReal, usize)> {
    e.check_candidate(a)?;
    let row: Vec<Result<ExtReal>> = (0..e.m())
        .into_par_iter()
        .map(|b| distortion_pair_with(e, a, b, opts))
        .collect();
    let row = row.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = argmax_tol(&row);
    Ok((row[worst], worst))
}

/// Per-candidate worst-case distortion and the instance-optimal winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub winner: usize,
    /// `D(a) = max_b D(a | b)`.
    pub distortion: Vec<ExtReal>,
    pub worst_opponent: Vec<usize>,
    /// `table[a][b] = D(a | b)`.
    pub table: Vec<Vec<ExtReal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Option<MetricWitness>>>,
}

impl DistortionReport {
    pub fn winner_distortion(&self) -> ExtReal {
        self.distortion[self.winner]
    }
}

/// Minimax over all pairs; with `alpha` this is the decisive variant.
pub fn minimax(e: &Election, alpha: Option<f64>) -> Result<DistortionReport> {
    minimax_with(
        e,
        &LpOptions {
            alpha,
            ..LpOptions::default()
        },
    )
}

pub fn minimax_with(e: &Election, opts: &LpOptions) -> Result<DistortionReport> {
    let m = e.m();
    if m == 0 {
        return Err(Error::InvalidParameter("no candidates".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
    let values: Vec<Result<ExtReal>> = pairs
        .par_iter()
        .map(|&(a, b)| distortion_pair_with(e, a, b, opts))
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let table: Vec<Vec<ExtReal>> = values.chunks(m).map(<[_]>::to_vec).collect();
    let worst_opponent: Vec<usize> = table.iter().map(|row| argmax_tol(row)).collect();
    let distortion: Vec<ExtReal> = (0..m).map(|a| table[a][worst_opponent[a]]).collect();
    let winner = argmin_tol(&distortion);
    let witnesses = if opts.witnesses {
        let ws: Vec<Result<Option<MetricWitness>>> = (0..m)
            .into_par_iter()
            .map(|a| {
                let b = worst_opponent[a];
                if a == b || !distortion[a].is_finite() {
                    return Ok(None);
                }
                let (mlp, out) = solve_pair(e, a, b, opts)?;
                extract_pseudometric(&mlp, &out).map(Some)
            })
            .collect();
        Some(ws.into_iter().collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    Ok(DistortionReport {
        winner,
        distortion,
        worst_opponent,
        table,
        witnesses,
    })
}

/// Turn an optimal LP solution into a metric over all voters and candidates.
///
/// Missing voter-voter distances are completed through candidates, the table
/// is closed under shortest paths, and points at distance zero are merged so
/// that they share identical rows.
pub fn extract_pseudometric(mlp: &MetricLp, outcome: &LpOutcome) -> Result<MetricWitness> {
    let x = match (&outcome.status, &outcome.witness) {
        (LpStatus::Optimal, Some(x)) => x,
        _ => return Err(Error::InvalidParameter("a witness needs an optimal outcome".into())),
    };
    let (n, m) = (mlp.n, mlp.m);
    let size = n + m;
    let mut dist = vec![f64::INFINITY; size * size];
    let pt = |k: usize| {
        if k < n {
            Point::Voter(k)
        } else {
            Point::Candidate(k - n)
        }
    };
    for p in 0..size {
        dist[p * size + p] = 0.0;
        for q in 0..size {
            if let Some(v) = mlp.var(pt(p), pt(q)) {
                dist[p * size + q] = x[v].max(0.0);
            }
        }
    }
    for k in 0..size {
        for i in 0..size {
            let dik = dist[i * size + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..size {
                let via = dik + dist[k * size + j];
                if via < dist[i * size + j] {
                    dist[i * size + j] = via;
                }
            }
        }
    }
    let scale = dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut rep: Vec<usize> = (0..size).collect();
    for p in 0..size {
        if let Some(q) = (0..p).find(|&q| rep[q] == q && dist[p * size + q] <= eps) {
            rep[p] = q;
        }
    }
    let merged: Vec<f64> = (0..size * size)
        .map(|k| {
            let (p, q) = (rep[k / size], rep[k % size]);
            if p == q {
                0.0
            } else {
                let (lo, hi) = (p.min(q), p.max(q));
                dist[lo * size + hi]
            }
        })
        .collect();
    MetricWitness::new(n, m, merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{check_consistent, social_cost, Preference};

    fn close(x: ExtReal, y: f64) -> bool {
        matches!(x, ExtReal::Finite(v) if (v - y).abs() <= 1e-7 * y.max(1.0))
    }

    #[test]
    fn single_voter_lp_shape() {
        let e = Election::new(2, vec![Preference::from_pairs(2, &[(0, 1)]).unwrap()]).unwrap();
        let mlp = build_metric_lp(&e, 0, 1, &LpOptions::default()).unwrap();
        assert_eq!(mlp.lp.num_vars(), 3);
        let (va, vb) = (
            mlp.var(Point::Voter(0), Point::Candidate(0)).unwrap(),
            mlp.var(Point::Voter(0), Point::Candidate(1)).unwrap(),
        );
        assert!(mlp
            .lp
            .rows
            .iter()
            .any(|r| r.cmp == Cmp::Le && r.rhs == 0.0 && r.terms == vec![(va, 1.0), (vb, -1.0)]));
    }

    #[test]
    fn single_voter_values() {
        let e = Election::new(2, vec![Preference::from_pairs(2, &[(0, 1)]).unwrap()]).unwrap();
        assert!(close(distortion_pair(&e, 0, 1).unwrap(), 1.0));
        assert_eq!(distortion_pair(&e, 1, 0).unwrap(), ExtReal::Infinite);
        assert_eq!(distortion_pair(&e, 1, 1).unwrap(), ExtReal::Finite(1.0));
    }

    #[test]
    fn split_vote_is_three() {
        let e = Election::from_rankings(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        for opts in [LpOptions::default(), LpOptions::full()] {
            assert!(close(distortion_pair_with(&e, 0, 1, &opts).unwrap(), 3.0));
        }
    }

    #[test]
    fn empty_preferences_only_normalize() {
        let e = Election::new(3, vec![Preference::empty(3); 2]).unwrap();
        let mlp = build_metric_lp(
            &e,
            0,
            1,
            &LpOptions {
                lazy: false,
                ..LpOptions::default()
            },
        )
        .unwrap();
        // one normalization row, the rest are triangle rows
        assert_eq!(mlp.lp.rows.iter().filter(|r| r.cmp == Cmp::Eq).count(), 1);
        assert!(mlp
            .lp
            .rows
            .iter()
            .filter(|r| r.cmp != Cmp::Eq)
            .all(|r| r.terms.len() == 3));
        assert_eq!(distortion_pair(&e, 0, 1).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn alpha_zero_pins_top() {
        let e = Election::from_rankings(3, &[vec![0, 1, 2]]).unwrap();
        let mlp = build_metric_lp(&e, 0, 1, &LpOptions::with_alpha(0.0)).unwrap();
        let top = mlp.var(Point::Voter(0), Point::Candidate(0)).unwrap();
        let sec = mlp.var(Point::Voter(0), Point::Candidate(1)).unwrap();
        assert!(mlp.lp.rows.iter().any(|r| r.terms == vec![(top, 1.0), (sec, -0.0)]));
        let (_, out) = solve_pair(&e, 1, 2, &LpOptions::with_alpha(0.0)).unwrap();
        assert!(out.witness.unwrap()[top].abs() < 1e-12);
    }

    #[test]
    fn alpha_needs_top_and_second() {
        let e = Election::from_top_lists(3, &[vec![0]]).unwrap();
        assert!(matches!(
            build_metric_lp(&e, 0, 1, &LpOptions::with_alpha(0.5)),
            Err(Error::Precondition { voter: 0, .. })
        ));
    }

    #[test]
    fn witness_achieves_split_vote_ratio() {
        let e = Election::from_rankings(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let (mlp, out) = solve_pair(&e, 0, 1, &LpOptions::default()).unwrap();
        let w = extract_pseudometric(&mlp, &out).unwrap();
        assert!(check_consistent(&w, &e).unwrap());
        let ratio = social_cost(&w, 0) / social_cost(&w, 1);
        assert!((ratio - 3.0).abs() < 1e-7);
        assert!(w.triangle_violation().is_none());
    }

    #[test]
    fn merged_points_share_rows() {
        let e = Election::from_rankings(2, &[vec![0, 1], vec![1, 0]]).unwrap();
        let (mlp, out) = solve_pair(&e, 0, 1, &LpOptions::default()).unwrap();
        let w = extract_pseudometric(&mlp, &out).unwrap();
        let size = 4;
        let pt = |k: usize| {
            if k < 2 {
                Point::Voter(k)
            } else {
                Point::Candidate(k - 2)
            }
        };
        for p in 0..size {
            for q in 0..size {
                if p != q && w.d(pt(p), pt(q)) == 0.0 {
                    assert!((0..size).all(|r| w.d(pt(p), pt(r)) == w.d(pt(q), pt(r))));
                }
            }
        }
    }

    #[test]
    fn single_candidate_minimax() {
        let e = Election::from_rankings(1, &[vec![0], vec![0]]).unwrap();
        let r = minimax(&e, None).unwrap();
        assert_eq!(r.winner, 0);
        assert_eq!(r.winner_distortion(), ExtReal::Finite(1.0));
    }

    #[test]
    fn report_serializes() {
        let e = Election::new(2, vec![Preference::from_pairs(2, &[(0, 1)]).unwrap()]).unwrap();
        let r = minimax(&e, None).unwrap();
        assert_eq!(r.winner, 0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"inf\""));
        let back: DistortionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.winner, 0);
    }
}
