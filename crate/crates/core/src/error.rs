use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inconsistent preferences: {a} and {b} are ranked above each other")]
    InconsistentPreferences { a: usize, b: usize },

    #[error("candidate {candidate} out of range for {m} candidates")]
    CandidateOutOfRange { candidate: usize, m: usize },

    #[error("voter {voter} out of range for {n} voters")]
    VoterOutOfRange { voter: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("voter {voter}: preferences cannot be written in the ranked-groups format")]
    NotExpressible { voter: usize },

    #[error("voter {voter}: {what}")]
    Precondition { voter: usize, what: String },

    #[error("pair ({a}, {b}): {what}")]
    PairPrecondition { a: usize, b: usize, what: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lp solver failure on pair ({a}, {b}): {msg}")]
    Solver { a: usize, b: usize, msg: String },

    #[error("lp solver failure: {0}")]
    Numerical(String),

    #[error("guaranteed structure not found: {0}")]
    TheoremFalsified(String),

    #[error("row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("duplicate row for voter `{voter}` and candidate `{candidate}`")]
    DuplicateRow { voter: String, candidate: String },

    #[error("voter `{voter}` gives the same score to several candidates")]
    TiedScores { voter: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let row = err.position().map(|p| p.line() as usize).unwrap_or_default();
        Error::Csv {
            row,
            msg: err.to_string(),
        }
    }
}
