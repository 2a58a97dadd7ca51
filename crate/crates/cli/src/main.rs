mod commands;
mod report;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use metric_distortion::Error;

pub use report::Format;
pub use source::InstanceArgs;

#[derive(Parser, Debug)]
#[command(name = "mdist", version, about = "Metric distortion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an instance: election text plus a JSON sidecar.
    Gen(GenArgs),
    /// Run one mechanism on an instance.
    Run(RunArgs),
    /// Instance-optimal distortion of every candidate.
    Eval(EvalArgs),
    /// Minimax distortion as the reported prefix grows from 1 to m.
    SweepK(SweepKArgs),
    /// Minimax distortion as a growing fraction of voters stays silent.
    SweepMissing(SweepMissingArgs),
    /// Repeated runs of a sampled mechanism.
    Sample(SampleArgs),
    /// Convert a score table into an election.
    Ingest(IngestArgs),
}

/// Output options shared by every reporting command. None of them change
/// the reported values, so they stay out of the recorded configuration.
#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Fill the elapsed_ms column. Timings differ between runs.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Election file to write; the sidecar goes next to it with a .json
    /// extension. Standard output when absent (no sidecar).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Dr,
    Copeland,
    Plurality,
    Balanced,
    Ktop,
    PluralityMatching,
    Minimax,
    SampledCopeland,
    SampledPluralityMatching,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    Input,
    Shuffle,
    Schedule,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tiebreak {
    Higher,
    Lower,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Capacity {
    #[default]
    Sample,
    Full,
}

#[derive(Args, Debug, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum)]
    pub mechanism: Mechanism,
    /// Truncate every voter to her top k before running.
    #[arg(long)]
    pub k: Option<usize>,
    /// Decisiveness for minimax and for LP evaluation.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Seed of the shuffled pairing and of sampling.
    #[arg(long = "run-seed", default_value_t = 0)]
    pub run_seed: u64,
    #[arg(long, value_enum, default_value_t = Pairing::Input)]
    pub pairing: Pairing,
    #[arg(long, value_enum, default_value_t = Tiebreak::Higher)]
    pub tiebreak: Tiebreak,
    #[arg(long, value_enum, default_value_t = Capacity::Sample)]
    pub capacity: Capacity,
    /// Also solve the distortion LPs of the winner.
    #[arg(long)]
    pub lp: bool,
    /// Write the query transcript as JSON lines.
    #[arg(long)]
    #[serde(skip)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Positional rule for the score column: eurovision, f1, plurality or
    /// comma-separated weights.
    #[arg(long)]
    pub scoring: Option<String>,
    /// Candidates (label or index) left out of the output rows.
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KRule {
    Minimax,
    Ktop,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepKArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Independent realizations; realization r uses seed + r.
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    /// `ktop` also runs the threshold-king rule on every prefix.
    #[arg(long, value_enum, default_value_t = KRule::Minimax)]
    pub mechanism: KRule,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepMissingArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    /// Fractions of silent voters.
    #[arg(long, value_delimiter = ',', default_value = "0.8,0.6,0.4,0.2,0")]
    pub epsilon: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampledMechanism {
    SampledCopeland,
    SampledPluralityMatching,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum)]
    pub mechanism: SampledMechanism,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Capacity::Sample)]
    pub capacity: Capacity,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    /// CSV score table.
    #[arg(long)]
    pub input: PathBuf,
    /// eurovision, f1, generic:VOTER,CANDIDATE,SCORE or
    /// generic-rank:VOTER,CANDIDATE,POSITION.
    #[arg(long)]
    pub schema: String,
    /// Keep rows whose column equals the value; repeatable.
    #[arg(long = "filter")]
    pub filters: Vec<String>,
    /// Election file to write, with a .json sidecar holding the labels.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Data(String),
    Theorem(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Theorem(_) => 4,
            Failure::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) | Failure::Theorem(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let msg = err.to_string();
        match err {
            Error::InvalidParameter(_) => Failure::Config(msg),
            Error::TheoremFalsified(_) => Failure::Theorem(msg),
            Error::Solver { .. } | Error::Numerical(_) => Failure::Internal(msg),
            _ => Failure::Data(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Data(err.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mdist: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
