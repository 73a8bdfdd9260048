use thiserror::Error;

/// Errors raised by channel construction, evaluation and optimization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid probability at index {index}: {value}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, not 1 (tolerance {tolerance:e})")]
    NotNormalized { sum: f64, tolerance: f64 },

    #[error("{0}")]
    InvalidShape(String),

    #[error("parameter `{name}` = {value} outside {allowed}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("enumeration needs {required} states but the budget allows {cap}")]
    BudgetExceeded { required: u128, cap: u64 },

    #[error("instance too large: {what} = {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("optimizer stopped after {iterations} iterations with residual {residual:e} (best value {value})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        value: f64,
        argmax: Vec<f64>,
    },

    #[error("{what} failed after {attempts} attempts")]
    RetriesExhausted { what: &'static str, attempts: usize },

    #[error("numerical self-check failed: {0}")]
    NumericalCheck(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("{0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
