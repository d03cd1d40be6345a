use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point outside the domain of the distance-generating function: {0}")]
    Domain(String),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step index {index} is beyond the custom schedule of length {len}")]
    Index { index: usize, len: usize },

    #[error("record lists no solution")]
    MissingSolution,

    #[error("record carries no half-step iterates")]
    MissingHalfStep,

    #[error("schedule has no analytic sum of squares: {0}")]
    Uncertifiable(String),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput(what.to_string()))
    }
}
