//! Sampled Copeland and sampled plurality matching.
//!
//! Random draws use ChaCha8 seeded through `seed_from_u64`; trial `t` of a
//! sweep uses stream `t` of the same seed.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::election::{comparison_graph, scores, Election, Transcript, TranscriptEvent};
use crate::error::{Error, Result};
use crate::mechanisms::{king_vertex, max_matching, DominationGraph, ThresholdDigraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    Copeland,
    PluralityMatching,
}

/// Generator for one run.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for trial `trial` of a sweep seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// Number of sampled voters.
///
/// Copeland: `ceil(ln(2 m^2 / delta) / (2 (epsilon / 16)^2))`, raised to the
/// next odd number. Plurality matching: `ceil(2 (m + ln(2 m / delta)) /
/// (epsilon / 8)^2)`.
pub fn sample_size(epsilon: f64, delta: f64, m: usize, mode: SampleMode) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 4], got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("no candidates".into()));
    }
    let m_f = m as f64;
    let c = match mode {
        SampleMode::Copeland => {
            let c = ((2.0 * m_f * m_f / delta).ln() / (2.0 * (epsilon / 16.0).powi(2))).ceil() as usize;
            c.max(1) | 1
        }
        SampleMode::PluralityMatching => {
            ((2.0 * (m_f + (2.0 * m_f / delta).ln())) / (epsilon / 8.0).powi(2)).ceil() as usize
        }
    };
    Ok(c.max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: SampleMode,
    pub c: usize,
    pub replacement: bool,
    pub seed: u64,
}

impl SamplePlan {
    /// Published sample size; with replacement for Copeland, without for
    /// plurality matching.
    pub fn new(epsilon: f64, delta: f64, m: usize, mode: SampleMode, seed: u64) -> Result<Self> {
        let c = sample_size(epsilon, delta, m, mode)?;
        let replacement = mode == SampleMode::Copeland;
        Ok(Self {
            epsilon,
            delta,
            mode,
            c,
            replacement,
            seed,
        })
    }
}

/// Draw `plan.c` voters. Returns the sampled sub-election, its voter indices
/// and a transcript of the draws.
pub fn sample_voters(e: &Election, plan: &SamplePlan) -> Result<(Election, Vec<usize>, Transcript)> {
    sample_voters_with(e, plan, &mut rng(plan.seed))
}

pub fn sample_voters_with(
    e: &Election,
    plan: &SamplePlan,
    rng: &mut impl Rng,
) -> Result<(Election, Vec<usize>, Transcript)> {
    let n = e.n();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot sample from an empty electorate".into()));
    }
    let picks: Vec<usize> = if plan.replacement {
        (0..plan.c).map(|_| rng.gen_range(0..n)).collect()
    } else {
        if plan.c > n {
            return Err(Error::InvalidParameter(format!(
                "cannot draw {} of {n} voters without replacement",
                plan.c
            )));
        }
        index::sample(rng, n, plan.c).into_vec()
    };
    let mut t = Transcript::new();
    for &voter in &picks {
        t.push(TranscriptEvent::Sample { voter });
    }
    Ok((e.restrict(&picks)?, picks, t))
}

/// Integer capacities summing to `c`, proportional to `counts`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledScores {
    pub capacity: Vec<usize>,
}

/// Largest-remainder rounding of `c * counts[k] / sum(counts)`; equal
/// remainders favour the lower index.
pub fn scaled_plurality(counts: &[usize], c: usize) -> Result<ScaledScores> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::InvalidParameter("counts sum to zero".into()));
    }
    let (c, n128) = (c as u128, n as u128);
    let mut capacity: Vec<usize> = counts.iter().map(|&p| (c * p as u128 / n128) as usize).collect();
    let short = c as usize - capacity.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(c * counts[k] as u128 % n128), k));
    for &k in order.iter().take(short) {
        capacity[k] += 1;
    }
    Ok(ScaledScores { capacity })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledOutcome {
    pub winner: usize,
    pub plan: SamplePlan,
    pub sample: Vec<usize>,
    /// Matching fractions on the sample; empty for Copeland.
    pub phi_hat: Vec<f64>,
}

/// Copeland king of the tournament of sampled majorities.
pub fn sampled_copeland(e: &Election, epsilon: f64, delta: f64, seed: u64) -> Result<SampledOutcome> {
    let plan = SamplePlan::new(epsilon, delta, e.m(), SampleMode::Copeland, seed)?;
    sampled_copeland_with(e, &plan, &mut rng(seed))
}

pub fn sampled_copeland_with(e: &Election, plan: &SamplePlan, rng: &mut impl Rng) -> Result<SampledOutcome> {
    e.require_total()?;
    let (s, sample, _) = sample_voters_with(e, plan, rng)?;
    let g = comparison_graph(&s);
    let mut t = ThresholdDigraph::new(&g, num_rational::Ratio::new(1, 2)).graph;
    // an even sample may tie; keep the edge towards the higher index
    for a in 0..e.m() {
        for b in a + 1..e.m() {
            if t.has_edge(a, b) && t.has_edge(b, a) {
                t.remove_edge(a, b);
            }
        }
    }
    let winner = king_vertex(&t)?;
    Ok(SampledOutcome {
        winner,
        plan: plan.clone(),
        sample,
        phi_hat: Vec::new(),
    })
}

/// Where right-hand capacities of the sampled domination graphs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacitySource {
    /// Plurality counts within the sample.
    #[default]
    Sample,
    /// Electorate-wide plurality scaled down to the sample size.
    FullElectorate,
}

/// Largest sampled matching fraction, lowest index among equals.
pub fn sampled_plurality_matching(e: &Election, epsilon: f64, delta: f64, seed: u64) -> Result<SampledOutcome> {
    let plan = SamplePlan::new(epsilon, delta, e.m(), SampleMode::PluralityMatching, seed)?;
    sampled_plurality_matching_with(e, &plan, CapacitySource::Sample, &mut rng(seed))
}

pub fn sampled_plurality_matching_with(
    e: &Election,
    plan: &SamplePlan,
    source: CapacitySource,
    rng: &mut impl Rng,
) -> Result<SampledOutcome> {
    e.require_total()?;
    let (s, sample, _) = sample_voters_with(e, plan, rng)?;
    let (winner, phi_hat) = matching_fractions(e, &s, source)?;
    Ok(SampledOutcome {
        winner,
        plan: plan.clone(),
        sample,
        phi_hat,
    })
}

/// Matching fractions of every candidate on the sub-election `s` of `e`.
pub fn matching_fractions(e: &Election, s: &Election, source: CapacitySource) -> Result<(usize, Vec<f64>)> {
    let c = s.n();
    let capacity = match source {
        CapacitySource::Sample => scores(s).plurality,
        CapacitySource::FullElectorate => scaled_plurality(&scores(e).plurality, c)?.capacity,
    };
    let sizes: Vec<usize> = (0..e.m())
        .map(|a| max_matching(&DominationGraph::with_capacity(s, a, capacity.clone())).size)
        .collect();
    let winner = (0..sizes.len())
        .max_by_key(|&a| (sizes[a], std::cmp::Reverse(a)))
        .ok_or_else(|| Error::InvalidParameter("no candidates".into()))?;
    Ok((winner, sizes.iter().map(|&x| x as f64 / c.max(1) as f64).collect()))
}
