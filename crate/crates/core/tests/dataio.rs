use std::collections::BTreeMap;
use std::path::PathBuf;

use metric_distortion::dataio::{
    candidate_ids, load_csv, parse_filter, positional_score, scores_to_election, Schema, ScoringRule,
};
use metric_distortion::election::{comparison_graph, scores};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn three_rows() {
    let t = load_csv(data("three.csv"), &Schema::eurovision(), &[]).unwrap();
    let e = scores_to_election(&t).unwrap();
    assert_eq!((e.n(), e.m()), (2, 3));
    let id = candidate_ids(&t);
    let (a, b, c) = (id["A"], id["B"], id["C"]);
    // B > C > A for the first voter, A above the rest for the second
    assert!(e.voter(0).is_total());
    assert!(e.voter(0).prefers(b, c) && e.voter(0).prefers(c, a));
    assert_eq!(e.voter(1).pairs().count(), 2);
    assert!(!e.voter(1).compares(b, c));
    let g = comparison_graph(&e);
    assert_eq!((g.count(b, a), g.count(a, b)), (1, 1));
}

#[test]
fn mini_contest_totals() {
    let t = load_csv(data("mini.csv"), &Schema::points("voter", "candidate", "points"), &[]).unwrap();
    let e = scores_to_election(&t).unwrap();
    assert_eq!((e.n(), e.m()), (5, 4));
    let id = candidate_ids(&t);
    let named = |totals: &[u64]| -> BTreeMap<&str, u64> { id.iter().map(|(&k, &i)| (k, totals[i])).collect() };

    let r = positional_score(&e, &"3,2,1".parse::<ScoringRule>().unwrap());
    assert_eq!(
        named(&r.totals),
        BTreeMap::from([("w", 5), ("x", 9), ("y", 6), ("z", 6)])
    );
    assert_eq!(r.winner, id["x"]);

    let plu = positional_score(&e, &ScoringRule::plurality());
    assert_eq!(
        named(&plu.totals),
        BTreeMap::from([("w", 1), ("x", 2), ("y", 1), ("z", 1)])
    );
    let counts: Vec<u64> = scores(&e).plurality.iter().map(|&c| c as u64).collect();
    assert_eq!(plu.totals, counts);

    // dan lists only x: x beats everyone else and no other pair is compared
    let dan = t.voters.iter().position(|v| v == "dan").unwrap();
    assert_eq!(e.voter(dan).pairs().count(), 3);
    assert!(e.voter(dan).prefers(id["x"], id["w"]));
}

#[test]
fn contest_shaped_table() {
    let filters = [parse_filter("Round=final").unwrap()];
    let t = load_csv(data("contest.csv"), &Schema::eurovision(), &filters).unwrap();
    let e = scores_to_election(&t).unwrap();
    assert_eq!((e.n(), e.m()), (36, 24));
    assert!(e.voters().iter().all(|p| p.top_list().map(<[usize]>::len) == Some(10)));

    // raw point sums straight from the file
    let text = std::fs::read_to_string(data("contest.csv")).unwrap();
    let mut raw: BTreeMap<String, u64> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "final" {
            *raw.entry(f[3].to_string()).or_default() += f[4].parse::<u64>().unwrap();
        }
    }
    let r = positional_score(&e, &ScoringRule::eurovision());
    let id = candidate_ids(&t);
    for (name, total) in &raw {
        assert_eq!(r.totals[id[name.as_str()]], *total, "{name}");
    }
    assert_eq!(t.candidates[r.winner], "F15");
    assert_eq!(r.totals[r.winner], 129);

    let all = load_csv(data("contest.csv"), &Schema::eurovision(), &[]).unwrap();
    assert_eq!(all.candidates.len(), 25);
}
