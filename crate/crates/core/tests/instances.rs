use metric_distortion::election::social_cost;
use metric_distortion::instances::{
    chain, decisive_instance, dr_lower_bound, ktop_lower_bound, ktop_ratio, missing_voters_tight, veto_instance,
};
use metric_distortion::lp::{distortion_of, distortion_pair, minimax, LpOptions};
use metric_distortion::mechanisms::{
    domination_root, ktop_rule, ComparisonOracle, MajorityOracle, PairingStrategy, TieBreak,
};
use metric_distortion::ExtReal;

fn close(x: ExtReal, want: f64, tol: f64) -> bool {
    x.finite().is_some_and(|v| (v - want).abs() <= tol * want.max(1.0))
}

#[test]
fn veto_focal_candidate_values() {
    for m in 4..=8 {
        let e = veto_instance(m).unwrap().election;
        let (d0, _) = distortion_of(&e, 0, &LpOptions::default()).unwrap();
        let want = (m + 2) as f64 / (m - 2) as f64;
        assert!(close(d0, want, 1e-6), "m = {m}: {d0} vs {want}");
    }
    for m in 4..=6 {
        let e = veto_instance(m).unwrap().election;
        let (d1, _) = distortion_of(&e, 1, &LpOptions::default()).unwrap();
        let want = (3 * m - 5) as f64 / (m - 1) as f64;
        assert!(close(d1, want, 1e-6), "m = {m}: {d1} vs {want}");
    }
}

#[test]
fn veto_minimax_winner() {
    // at m = 4 the runner-up beats the focal candidate: 7/3 against 3
    assert_eq!(minimax(&veto_instance(4).unwrap().election, None).unwrap().winner, 1);
    for m in 5..=7 {
        assert_eq!(
            minimax(&veto_instance(m).unwrap().election, None).unwrap().winner,
            0,
            "m = {m}"
        );
    }
}

#[test]
fn chain_costs_reach_the_bound() {
    for ell in 2..=6 {
        let inst = chain(ell).unwrap();
        let w = inst.witness.as_ref().unwrap();
        let mut oracle = MajorityOracle::new(&inst.election, TieBreak::HigherIndexWins);
        for i in 1..ell {
            assert_eq!(oracle.loser(i - 1, i).unwrap(), i - 1);
        }
        let winner = ell - 1;
        let ratio = social_cost(w, winner) / social_cost(w, 0);
        assert_eq!(ratio, (2 * ell - 1) as f64);
    }
}

#[test]
fn knockout_lower_bound_under_its_schedule() {
    for t in 1..=4u32 {
        let m = 1usize << t;
        let inst = dr_lower_bound(m).unwrap();
        let schedule = PairingStrategy::Scheduled(inst.schedule.clone().unwrap());
        let mut oracle = MajorityOracle::new(&inst.election, TieBreak::HigherIndexWins);
        let cands: Vec<usize> = (0..m).collect();
        let (winner, transcript) = domination_root(&cands, &mut oracle, &schedule).unwrap();
        assert_eq!(transcript.comparisons(), m - 1);
        let sc = inst.social_costs().unwrap();
        let best = sc.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(sc[winner] / best, (2 * t + 1) as f64);
    }
}

#[test]
fn missing_voters_value() {
    for eps in [0.2, 0.4, 0.6] {
        let e = missing_voters_tight(eps).unwrap().election;
        let want = 3.0 + 4.0 * eps / (1.0 - eps);
        let d = distortion_pair(&e, 0, 1).unwrap();
        assert!(close(d, want, 1e-5), "eps = {eps}: {d} vs {want}");
    }
}

#[test]
fn decisive_values() {
    for alpha in [0.0, 0.25, 0.5, 1.0] {
        let inst = decisive_instance(alpha).unwrap();
        let r = minimax(&inst.election, Some(alpha)).unwrap();
        let want = [1.0 + 2.0 * alpha, 2.0 + alpha, 1.0 + 2.0 * alpha];
        for c in 0..3 {
            assert!(
                close(r.distortion[c], want[c], 1e-6),
                "alpha {alpha}, {c}: {}",
                r.distortion[c]
            );
        }
    }
}

#[test]
fn ktop_star_ratio() {
    for (m, k) in [(5, 2), (7, 3), (7, 2), (9, 4)] {
        let inst = ktop_lower_bound(m, k, 1e-6).unwrap();
        let n = (m - 1) / k;
        let sc = inst.social_costs().unwrap();
        let winner = ktop_rule(&inst.election, k).unwrap();
        let worst = (0..m - 1).map(|c| sc[c] / sc[m - 1]).fold(0.0, f64::max);
        assert!((worst - ktop_ratio(n, 1e-6)).abs() < 1e-3);
        assert!(sc[winner] / sc[m - 1] <= worst + 1e-9);
        assert!(worst > (2 * n - 1) as f64 - 1e-3);
    }
}
