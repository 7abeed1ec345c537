use thiserror::Error;

/// Errors raised by space construction, estimators and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("evaluation budget exceeded: {required} evaluations requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("negative radicand {value} raised to non-integer power {exponent}")]
    NegativeRadicand { value: f64, exponent: f64 },

    #[error("operation requires a complex space, got `{0}`")]
    RealOnlySpace(String),

    #[error("operation requires a real space, got `{0}`")]
    ComplexOnlySpace(String),

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("malformed definition: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> GeomError {
    GeomError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(GeomError::DimensionMismatch { expected, actual })
    }
}
