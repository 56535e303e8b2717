use alloc::string::String;

/// Errors raised by the numerics in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degree {degree} exceeds supported maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("volatility {sigma} outside bounds [{lo}, {hi}]")]
    BoundsViolation { sigma: f64, lo: f64, hi: f64 },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid scenario: {0}")]
    ScenarioSpec(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cost limit exceeded: {0}")]
    CostLimit(String),

    #[error("integrand is not symmetric at {0}")]
    NotSymmetric(String),

    #[error("scenario list is empty")]
    EmptyScenarios,

    #[error("invalid functional: {0}")]
    InvalidFunctional(String),

    #[error("invalid PDE configuration: {0}")]
    PdeConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
