use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid exponent p = {0}: must satisfy 1 <= p < inf")]
    InvalidExponent(f64),

    #[error("empty tuple")]
    EmptyTuple,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sign enumeration cap exceeded: tuple has {size} functionals, cap is {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("consistency violation: lower bound {lower} exceeds upper bound {upper}")]
    ConsistencyViolation { lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}
