use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by an evaluator. Kept separate from [`Error`] so the
/// baselines can match on capacity errors without string inspection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// The context is larger than the model accepts. `limit` is known for
    /// surrogates and absent when a bridge reports exhaustion.
    #[error("context of {samples} rows x {features} features exceeds capacity")]
    CapacityExceeded {
        samples: usize,
        features: usize,
        limit: Option<crate::evaluator::Budget>,
    },
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("probability row {row} is malformed: {reason}")]
    MalformedProbabilities { row: usize, reason: String },
    #[error("bridge protocol error: {0}")]
    Protocol(String),
    #[error("bridge reported an error: {0}")]
    Remote(String),
    #[error("bridge did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("metric undefined: {0}")]
    Metric(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse failure at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("label column is single-class")]
    SingleClass,
    #[error("table is empty")]
    EmptyTable,
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid config field '{field}': {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("all optimization runs failed; first error: {0}")]
    AllRunsFailed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
