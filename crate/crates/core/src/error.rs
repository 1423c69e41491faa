use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("instance violates an invariant: {0}")]
    BadInstance(String),

    #[error("instance has nonzero external fields; absorb them first")]
    FieldsPresent,

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("dynamics diverged: non-finite state at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("spin count {n} exceeds the exhaustive-enumeration cap of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("lower bound {lower} exceeds best energy {best}")]
    BoundAboveBest { lower: f64, best: f64 },

    #[error("rewire budget exhausted: {0}")]
    RewireExhausted(String),

    #[error("pairing failed after {attempts} restarts for a {k}-regular graph on {n} vertices")]
    PairingFailed { n: usize, k: usize, attempts: usize },

    #[error("probability band [{lo}, {hi}] unreachable within iteration ceiling {ceiling}")]
    BandUnreachable { lo: f64, hi: f64, ceiling: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
