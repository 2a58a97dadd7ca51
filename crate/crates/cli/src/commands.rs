use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;
use serde_json::{json, Value};

use metric_distortion::dataio::{load_csv, parse_filter, positional_score, scores_to_election, Schema, ScoringRule};
use metric_distortion::election::{write_election, Transcript, TranscriptEvent};
use metric_distortion::instances::GeneratedInstance;
use metric_distortion::lp::{distortion_of, minimax_with, LpOptions};
use metric_distortion::mechanisms::{
    balanced_rule, copeland, domination_root, ktop_rule, plurality, plurality_matching, MajorityOracle,
    PairingStrategy, TieBreak,
};
use metric_distortion::sampling::{
    rng, sampled_copeland_with, sampled_plurality_matching_with, trial_rng, CapacitySource, SampleMode, SamplePlan,
};
use metric_distortion::{Election, ExtReal};

use crate::report::{self, ext, opt, Table};
use crate::source::sidecar_path;
use crate::{
    Capacity, CliResult, Command, EvalArgs, Failure, GenArgs, IngestArgs, KRule, Mechanism, OutputArgs, Pairing,
    RunArgs, SampleArgs, SampledMechanism, SweepKArgs, SweepMissingArgs, Tiebreak,
};

pub fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Gen(a) => gen(&a),
        Command::Ingest(a) => ingest(&a),
        Command::Run(a) => with_pool(&a.output, || run(&a)),
        Command::Eval(a) => with_pool(&a.output, || eval(&a)),
        Command::SweepK(a) => with_pool(&a.output, || sweep_k(&a)),
        Command::SweepMissing(a) => with_pool(&a.output, || sweep_missing(&a)),
        Command::Sample(a) => with_pool(&a.output, || sample(&a)),
    }
}

fn with_pool(out: &OutputArgs, f: impl FnOnce() -> CliResult<()> + Send) -> CliResult<()> {
    if out.jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(out.jobs)
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))?
        .install(f)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Config(msg()))
    }
}

fn check_alpha(alpha: Option<f64>) -> CliResult<()> {
    check(alpha.map_or(true, |a| (0.0..=1.0).contains(&a)), || {
        "--alpha must lie in [0, 1]".into()
    })
}

fn check_sampling(epsilon: f64, delta: f64) -> CliResult<()> {
    check(epsilon > 0.0 && epsilon <= 4.0, || {
        format!("--epsilon must lie in (0, 4], got {epsilon}")
    })?;
    check(delta > 0.0 && delta < 1.0, || {
        format!("--delta must lie in (0, 1), got {delta}")
    })
}

fn elapsed(timing: bool, start: Instant) -> Value {
    if timing {
        json!(start.elapsed().as_millis() as u64)
    } else {
        Value::Null
    }
}

/// `SC(w) / min SC` under the instance's witness.
fn realized(inst: &GeneratedInstance, winner: usize) -> Option<ExtReal> {
    let sc = inst.social_costs()?;
    let best = sc.iter().copied().fold(f64::INFINITY, f64::min);
    Some(ExtReal::ratio(sc[winner], best))
}

fn label(inst: &GeneratedInstance, c: usize) -> Value {
    inst.labels
        .as_ref()
        .and_then(|l| l.get(c))
        .map_or(Value::Null, |s| json!(s))
}

fn truncated(e: &Election, k: Option<usize>) -> CliResult<Election> {
    match k {
        Some(0) => Err(Failure::Config("--k must be at least 1".into())),
        Some(k) => Ok(e.truncate(k)?),
        None => Ok(e.clone()),
    }
}

fn write_instance(inst: &GeneratedInstance, out: Option<&std::path::Path>) -> CliResult<()> {
    let text = write_election(&inst.election)?;
    report::emit(text.as_bytes(), out)?;
    if let Some(path) = out {
        let side = sidecar_path(path);
        check(side != path, || {
            "the election file must not have a .json extension".into()
        })?;
        let json = serde_json::to_string_pretty(inst).map_err(|e| Failure::Internal(e.to_string()))?;
        report::emit(format!("{json}\n").as_bytes(), Some(&side))?;
    }
    Ok(())
}

fn gen(a: &GenArgs) -> CliResult<()> {
    check(a.instance.is_generated(), || "gen needs --generator".into())?;
    let inst = a.instance.load(0)?;
    inst.verify()?;
    write_instance(&inst, a.out.as_deref())
}

fn ingest(a: &IngestArgs) -> CliResult<()> {
    let schema: Schema = a.schema.parse()?;
    let filters = a
        .filters
        .iter()
        .map(|f| parse_filter(f))
        .collect::<Result<Vec<_>, _>>()?;
    let table = load_csv(&a.input, &schema, &filters)?;
    let e = scores_to_election(&table)?;
    eprintln!("mdist: {} voters, {} candidates", e.n(), e.m());
    let mut inst = GeneratedInstance::plain(e, "ingest", json!({ "schema": a.schema, "filters": a.filters }));
    inst.labels = Some(table.candidates);
    write_instance(&inst, a.out.as_deref())
}

const RUN_COLUMNS: &[&str] = &[
    "mechanism",
    "winner",
    "label",
    "comparisons",
    "samples",
    "realized_distortion",
    "lp_distortion",
    "lp_worst_opponent",
];

fn run(a: &RunArgs) -> CliResult<()> {
    check_alpha(a.alpha)?;
    check_sampling(a.epsilon, a.delta)?;
    let inst = a.instance.load(0)?;
    let e = truncated(&inst.election, a.k)?;
    let tb = match a.tiebreak {
        Tiebreak::Higher => TieBreak::HigherIndexWins,
        Tiebreak::Lower => TieBreak::LowerIndexWins,
    };
    let capacity = match a.capacity {
        Capacity::Sample => CapacitySource::Sample,
        Capacity::Full => CapacitySource::FullElectorate,
    };
    let mut transcript = None;
    let mut samples = None;
    let mut lp = None;
    let winner = match a.mechanism {
        Mechanism::Dr => {
            let strategy = match a.pairing {
                Pairing::Input => PairingStrategy::InputOrder,
                Pairing::Shuffle => PairingStrategy::SeededShuffle(a.run_seed),
                Pairing::Schedule => PairingStrategy::Scheduled(
                    inst.schedule
                        .clone()
                        .ok_or_else(|| Failure::Config("the instance has no schedule".into()))?,
                ),
            };
            let cands: Vec<usize> = (0..e.m()).collect();
            let (w, t) = domination_root(&cands, &mut MajorityOracle::new(&e, tb), &strategy)?;
            transcript = Some(t);
            w
        }
        Mechanism::Copeland => copeland(&e)?,
        Mechanism::Plurality => plurality(&e)?,
        Mechanism::Balanced => balanced_rule(&e, a.alpha.unwrap_or(1.0))?,
        Mechanism::Ktop => ktop_rule(&e, a.k.ok_or_else(|| Failure::Config("ktop needs --k".into()))?)?,
        Mechanism::PluralityMatching => plurality_matching(&e)?.winner,
        Mechanism::Minimax => {
            let r = minimax_with(
                &e,
                &LpOptions {
                    alpha: a.alpha,
                    ..LpOptions::default()
                },
            )?;
            lp = Some((r.winner_distortion(), r.worst_opponent[r.winner]));
            r.winner
        }
        Mechanism::SampledCopeland | Mechanism::SampledPluralityMatching => {
            let mode = if a.mechanism == Mechanism::SampledCopeland {
                SampleMode::Copeland
            } else {
                SampleMode::PluralityMatching
            };
            let plan = SamplePlan::new(a.epsilon, a.delta, e.m(), mode, a.run_seed)?;
            let out = match mode {
                SampleMode::Copeland => sampled_copeland_with(&e, &plan, &mut rng(a.run_seed))?,
                SampleMode::PluralityMatching => {
                    sampled_plurality_matching_with(&e, &plan, capacity, &mut rng(a.run_seed))?
                }
            };
            let mut t = Transcript::new();
            for &voter in &out.sample {
                t.push(TranscriptEvent::Sample { voter });
            }
            samples = Some(plan.c);
            transcript = Some(t);
            out.winner
        }
    };
    if a.lp && lp.is_none() {
        let alpha = if a.mechanism == Mechanism::Minimax {
            a.alpha
        } else {
            None
        };
        lp = Some(distortion_of(
            &e,
            winner,
            &LpOptions {
                alpha,
                ..LpOptions::default()
            },
        )?);
    }
    if let (Some(path), Some(t)) = (&a.transcript, &transcript) {
        let file = std::fs::File::create(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        t.write_json_lines(std::io::BufWriter::new(file))?;
    }
    let mut table = Table::new(RUN_COLUMNS);
    table.push(vec![
        serde_json::to_value(a.mechanism).unwrap_or(Value::Null),
        json!(winner),
        label(&inst, winner),
        opt(transcript
            .as_ref()
            .map(|t| t.comparisons())
            .filter(|_| samples.is_none())),
        opt(samples),
        realized(&inst, winner).map_or(Value::Null, ext),
        lp.map_or(Value::Null, |(d, _)| ext(d)),
        opt(lp.map(|(_, b)| b)),
    ]);
    report::write(&table, "run", a, a.output.format, a.output.out.as_deref())
}

const EVAL_COLUMNS: &[&str] = &[
    "candidate",
    "label",
    "distortion",
    "worst_opponent",
    "minimax_winner",
    "social_cost",
    "score",
];

fn eval(a: &EvalArgs) -> CliResult<()> {
    check_alpha(a.alpha)?;
    let rule: Option<ScoringRule> = a.scoring.as_deref().map(str::parse).transpose()?;
    let inst = a.instance.load(0)?;
    let e = truncated(&inst.election, a.k)?;
    let r = minimax_with(
        &e,
        &LpOptions {
            alpha: a.alpha,
            ..LpOptions::default()
        },
    )?;
    let sc = inst.social_costs();
    let scores = rule.map(|rule| positional_score(&e, &rule).totals);
    let dropped = |c: usize| {
        a.drop
            .iter()
            .any(|d| *d == c.to_string() || inst.labels.as_ref().is_some_and(|l| l.get(c) == Some(d)))
    };
    let mut table = Table::new(EVAL_COLUMNS);
    for c in (0..e.m()).filter(|&c| !dropped(c)) {
        table.push(vec![
            json!(c),
            label(&inst, c),
            ext(r.distortion[c]),
            json!(r.worst_opponent[c]),
            json!(c == r.winner),
            opt(sc.as_ref().map(|s| s[c])),
            opt(scores.as_ref().map(|s| s[c])),
        ]);
    }
    table.summary.push(("winner".into(), json!(r.winner)));
    table
        .summary
        .push(("winner_distortion".into(), ext(r.winner_distortion())));
    report::write(&table, "eval", a, a.output.format, a.output.out.as_deref())
}

const SWEEP_K_COLUMNS: &[&str] = &[
    "realization",
    "seed",
    "k",
    "winner",
    "distortion",
    "ktop_winner",
    "ktop_distortion",
    "elapsed_ms",
];

fn sweep_k(a: &SweepKArgs) -> CliResult<()> {
    let realizations = if a.instance.is_generated() {
        a.trials
    } else {
        a.trials.min(1)
    };
    let instances: Vec<GeneratedInstance> = (0..realizations)
        .map(|r| a.instance.load(r))
        .collect::<CliResult<_>>()?;
    let jobs: Vec<(usize, usize)> = instances
        .iter()
        .enumerate()
        .flat_map(|(r, inst)| (1..=inst.election.m()).map(move |k| (r, k)))
        .collect();
    let timing = a.output.timing;
    let rows: Vec<CliResult<Vec<Value>>> = jobs
        .par_iter()
        .map(|&(r, k)| {
            let start = Instant::now();
            let inst = &instances[r];
            let e = inst.election.truncate(k)?;
            let rep = minimax_with(&e, &LpOptions::default())?;
            let ktop = match a.mechanism {
                KRule::Ktop => {
                    let w = ktop_rule(&e, k)?;
                    Some((w, rep.distortion[w]))
                }
                KRule::Minimax => None,
            };
            Ok(vec![
                json!(r),
                opt(inst.seed),
                json!(k),
                json!(rep.winner),
                ext(rep.winner_distortion()),
                opt(ktop.map(|(w, _)| w)),
                ktop.map_or(Value::Null, |(_, d)| ext(d)),
                elapsed(timing, start),
            ])
        })
        .collect();
    let mut table = Table::new(SWEEP_K_COLUMNS);
    for row in rows {
        table.push(row?);
    }
    report::write(&table, "sweep-k", a, a.output.format, a.output.out.as_deref())
}

const SWEEP_MISSING_COLUMNS: &[&str] = &[
    "realization",
    "seed",
    "epsilon",
    "missing",
    "winner",
    "distortion",
    "envelope",
    "realized_distortion",
    "elapsed_ms",
];

/// Number of silent voters for a fraction, rounded up.
fn missing_count(epsilon: f64, n: usize) -> usize {
    let x = epsilon * n as f64;
    // products such as 0.6 * 5 land a hair above the integer
    let whole = x.round();
    let count = if (x - whole).abs() <= 1e-9 * x.max(1.0) {
        whole
    } else {
        x.ceil()
    };
    (count as usize).min(n)
}

fn sweep_missing(a: &SweepMissingArgs) -> CliResult<()> {
    check(!a.epsilon.is_empty(), || "--epsilon needs at least one value".into())?;
    for &eps in &a.epsilon {
        check((0.0..1.0).contains(&eps), || {
            format!("every --epsilon must lie in [0, 1), got {eps}")
        })?;
    }
    let realizations = if a.instance.is_generated() {
        a.trials
    } else {
        a.trials.min(1)
    };
    let instances: Vec<GeneratedInstance> = (0..realizations)
        .map(|r| a.instance.load(r))
        .collect::<CliResult<_>>()?;
    let grid = a.epsilon.len();
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|r| (0..grid).map(move |j| (r, j)))
        .collect();
    let timing = a.output.timing;
    let rows: Vec<CliResult<Vec<Value>>> = jobs
        .par_iter()
        .map(|&(r, j)| {
            let start = Instant::now();
            let inst = &instances[r];
            let eps = a.epsilon[j];
            let n = inst.election.n();
            let count = missing_count(eps, n);
            let mut picks = index::sample(&mut trial_rng(a.instance.seed, (r * grid + j) as u64), n, count).into_vec();
            picks.sort_unstable();
            let masked = inst.election.mask(&picks)?;
            let rep = minimax_with(&masked, &LpOptions::default())?;
            let envelope = 3.0 + eps / (1.0 - eps) * 4.0;
            Ok(vec![
                json!(r),
                opt(inst.seed),
                json!(eps),
                json!(count),
                json!(rep.winner),
                ext(rep.winner_distortion()),
                json!(envelope),
                realized(inst, rep.winner).map_or(Value::Null, ext),
                elapsed(timing, start),
            ])
        })
        .collect();
    let mut table = Table::new(SWEEP_MISSING_COLUMNS);
    for row in rows {
        table.push(row?);
    }
    report::write(&table, "sweep-missing", a, a.output.format, a.output.out.as_deref())
}

const SAMPLE_COLUMNS: &[&str] = &[
    "trial",
    "seed",
    "c",
    "winner",
    "realized_distortion",
    "phi_hat_max",
    "phi_within_bound",
    "elapsed_ms",
];

/// Nearest-rank quantile of sorted values.
fn quantile(sorted: &[ExtReal], q: f64) -> Value {
    if sorted.is_empty() {
        return Value::Null;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    ext(sorted[rank - 1])
}

fn sample(a: &SampleArgs) -> CliResult<()> {
    check_sampling(a.epsilon, a.delta)?;
    let inst = a.instance.load(0)?;
    let e = &inst.election;
    let mode = match a.mechanism {
        SampledMechanism::SampledCopeland => SampleMode::Copeland,
        SampledMechanism::SampledPluralityMatching => SampleMode::PluralityMatching,
    };
    let capacity = match a.capacity {
        Capacity::Sample => CapacitySource::Sample,
        Capacity::Full => CapacitySource::FullElectorate,
    };
    let plan = SamplePlan::new(a.epsilon, a.delta, e.m(), mode, a.instance.seed)?;
    let phi = match mode {
        SampleMode::PluralityMatching => Some(plurality_matching(e)?.phi),
        SampleMode::Copeland => None,
    };
    let timing = a.output.timing;
    let trials: Vec<CliResult<(ExtReal, Option<bool>, Vec<Value>)>> = (0..a.trials)
        .into_par_iter()
        .map(|t| {
            let start = Instant::now();
            let mut r = trial_rng(a.instance.seed, t);
            let out = match mode {
                SampleMode::Copeland => sampled_copeland_with(e, &plan, &mut r)?,
                SampleMode::PluralityMatching => sampled_plurality_matching_with(e, &plan, capacity, &mut r)?,
            };
            let dist = match realized(&inst, out.winner) {
                Some(d) => d,
                None => distortion_of(e, out.winner, &LpOptions::default())?.0,
            };
            let slack = e.m() as f64 / plan.c as f64;
            let within = phi.as_ref().map(|phi| {
                phi.iter()
                    .zip(&out.phi_hat)
                    .all(|(&p, &h)| (h - p).abs() <= a.epsilon * p + slack + 1e-12)
            });
            let phi_max = out.phi_hat.iter().copied().reduce(f64::max);
            let row = vec![
                json!(t),
                json!(a.instance.seed),
                json!(plan.c),
                json!(out.winner),
                ext(dist),
                opt(phi_max),
                opt(within),
                elapsed(timing, start),
            ];
            Ok((dist, within, row))
        })
        .collect();
    let mut table = Table::new(SAMPLE_COLUMNS);
    let mut dists = Vec::new();
    let mut within = 0;
    for trial in trials {
        let (d, w, row) = trial?;
        dists.push(d);
        within += usize::from(w == Some(true));
        table.push(row);
    }
    let bound = match mode {
        SampleMode::Copeland => 5.0 + a.epsilon,
        SampleMode::PluralityMatching => 3.0 + a.epsilon,
    };
    let below = dists.iter().filter(|d| d.finite().is_some_and(|x| x <= bound)).count();
    dists.sort_by(ExtReal::total_cmp);
    table.summary.push(("trials".into(), json!(a.trials)));
    table.summary.push(("distortion_bound".into(), json!(bound)));
    table.summary.push(("within_distortion_bound".into(), json!(below)));
    if phi.is_some() {
        table.summary.push(("phi_within_bound".into(), json!(within)));
    }
    for (name, q) in [("p50", 0.5), ("p90", 0.9), ("p95", 0.95), ("max", 1.0)] {
        table
            .summary
            .push((format!("realized_distortion_{name}"), quantile(&dists, q)));
    }
    report::write(&table, "sample", a, a.output.format, a.output.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_counts_round_up() {
        assert_eq!(missing_count(0.6, 5), 3);
        assert_eq!(missing_count(0.5, 5), 3);
        assert_eq!(missing_count(0.0, 5), 0);
        assert_eq!(missing_count(0.2, 50), 10);
    }

    #[test]
    fn nearest_rank() {
        let v: Vec<ExtReal> = (1..=10).map(|x| ExtReal::Finite(x as f64)).collect();
        assert_eq!(quantile(&v, 0.95), json!(10.0));
        assert_eq!(quantile(&v, 0.5), json!(5.0));
        assert_eq!(quantile(&[], 0.5), Value::Null);
    }
}
