use thiserror::Error;

/// Errors raised by the testing library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates the precondition of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The truncation length evaluated below 2, leaving no usable lag.
    #[error("degenerate truncation T = {t} (at least 2 lags are required)")]
    DegenerateTruncation { t: usize },

    /// The brute-force extremal solver did not reach its tolerance.
    #[error(
        "extremal oracle did not converge after {iterations} iterations (relative gap {gap:e})"
    )]
    OracleDivergence { iterations: usize, gap: f64 },

    /// The triangular factorization found a non-positive pivot.
    #[error("matrix is not positive definite (pivot {min_pivot:e} at row {row})")]
    PdViolation { min_pivot: f64, row: usize },

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid simulation configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
