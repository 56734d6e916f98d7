use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("lag {lag} is too large for a series of length {n}")]
    LagTooLarge { lag: usize, n: usize },

    #[error("lag budget K={lags} out of range 1..={max}")]
    LagBudget { lags: usize, max: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("column {column} has degenerate variance ({value:e})")]
    DegenerateVariance { column: usize, value: f64 },

    #[error("estimated tr(Sigma^2) is not positive ({0:e}); the sum-type test is undefined")]
    DegenerateTrace(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("recursion matrix has spectral radius {0:.4} >= 0.999")]
    NonStationary(f64),

    #[error("design matrix is rank deficient (|R_ii| = {value:e} at column {column})")]
    RankDeficient { column: usize, value: f64 },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("no results to emit")]
    EmptyResults,

    #[error("power-curve cells do not share (scenario, n, p, K): {0}")]
    InvalidGrouping(String),

    #[error("power curve is missing m = {0:?}")]
    MissingAbscissae(Vec<usize>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config { .. } => ErrorCategory::Config,
            Error::Io { .. } => ErrorCategory::Io,
            Error::Csv(e) if e.is_io_error() => ErrorCategory::Io,
            _ => ErrorCategory::Data,
        }
    }
}
