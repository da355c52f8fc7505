use thiserror::Error;

/// Failures raised by the solvers and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("negative density {value} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),

    #[error("evolution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("nodeless regime violated at t = {time}: density ratio {ratio:e} below floor {floor:e}")]
    NodelessViolation { time: f64, ratio: f64, floor: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
