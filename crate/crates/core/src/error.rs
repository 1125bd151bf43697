use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model construction failed: {0}")]
    ModelConstruction(String),

    /// A symmetric matrix failed the Cholesky pivot test.
    #[error("rank-deficient matrix ({what}): pivot ratio {pivot_ratio:.3e}, condition estimate {condition:.3e}")]
    RankDeficient {
        what: String,
        pivot_ratio: f64,
        condition: f64,
    },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("exact enumeration needs {sequences} bootstrap sequences (cap {cap}); use bag_monte_carlo instead")]
    EnumerationTooLarge { sequences: f64, cap: u64 },

    #[error("all {attempted} component fits failed; last error: {last}")]
    AllComponentsFailed { attempted: usize, last: String },

    #[error("insufficient components: need at least 2, got {0}")]
    InsufficientComponents(usize),

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("MCMC contract violation in {run}: expected {expected} samples, got {got}")]
    ContractViolation { run: String, expected: usize, got: usize },

    #[error("invalid start: log density at initial state is {0}")]
    InvalidStart(f64),

    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed tabular input; `row` is 1-based and counts the header.
    #[error("data format error at row {row}, column {column}: {message}")]
    DataFormat { row: usize, column: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
