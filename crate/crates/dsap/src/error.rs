//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid constraint family: {0}")]
    InvalidFamily(String),

    #[error("invalid index vector: {0}")]
    InvalidIndexVector(String),

    #[error("constraint index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("invalid amalgamator: {0}")]
    InvalidAmalgamator(String),

    #[error("configuration error: {0}")]
    InvalidConfig(String),

    #[error("objective error: {0}")]
    Objective(String),

    #[error("trace is thinned (stride {0}); diagnostics require unthinned traces")]
    ThinnedTrace(u64),

    #[error("trace is missing objective values: {0}")]
    MissingPhi(String),

    #[error("objective mismatch: '{left}' vs '{right}'")]
    ObjectiveMismatch { left: String, right: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
