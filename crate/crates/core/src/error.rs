use thiserror::Error;

/// Errors raised by the dynamics engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is not in the upper half-plane (Im z = {0})")]
    NotInUpperHalfPlane(f64),

    #[error("fundamental-domain reduction exceeded {steps} steps")]
    NonTermination { steps: usize },

    #[error("denominator 1 - r*s = {0} vanishes")]
    DenominatorVanishes(f64),

    #[error("commutation equation has no solution: {0}")]
    NoSolution(String),

    #[error("bump support escapes the sampling cutoff: {0}")]
    SupportEscapesCutoff(String),

    #[error("approximant {p}/{q} violates the bound: err {err:e} >= {bound:e}")]
    BoundViolated {
        p: i64,
        q: i64,
        err: f64,
        bound: f64,
    },

    #[error("decimal input cannot certify partial quotient #{index}")]
    PrecisionExhausted { index: usize },

    #[error("no excursion within T_max satisfies the variance condition")]
    EmptySchedule,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that indicate a broken internal invariant rather than
    /// a bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::BoundViolated { .. } | Error::NonTermination { .. }
        )
    }
}
