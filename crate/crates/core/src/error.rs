use thiserror::Error;

/// Errors raised by the exponent library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("degenerate reference: the update kernel has no positive mass")]
    DegenerateReference,

    #[error("cost constraint still binding at eta_max = {eta_max}; increase eta_max")]
    ConstraintAtCap { eta_max: f64 },

    #[error("grid too large: {points} points exceeds the cap of {cap}")]
    TooLarge { points: f64, cap: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported divergence weights: {0}")]
    UnsupportedWeights(String),
}

pub type Result<T> = std::result::Result<T, Error>;
