//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by any ledgerlens operation.
#[derive(Debug, Error)]
pub enum Error {
    /// A network or scoring parameter failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input vector or matrix had the wrong shape.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An input violated a documented precondition.
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// A required CSV column is absent.
    #[error("schema error: missing column '{0}'")]
    MissingColumn(String),

    /// A CSV data row could not be parsed.
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    /// A gradient became non-finite during optimization.
    #[error("non-finite gradient in weight layer {layer}")]
    NonFiniteGradient { layer: usize },

    /// The training loss became non-finite.
    #[error("non-finite loss")]
    NonFiniteLoss,

    /// Wraps a failure with the epoch at which training aborted.
    #[error("training aborted at epoch {epoch}: {source}")]
    TrainingAborted {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    /// An iterative numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A metric is undefined for the given input.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
