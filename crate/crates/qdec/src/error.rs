use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label collision: {0}")]
    LabelCollision(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
