use thiserror::Error;

/// Errors raised by the solvers, estimators and applications in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported divergence: {0}")]
    UnsupportedDivergence(String),

    #[error("grid resolution too coarse: {0}")]
    Resolution(String),

    #[error("empty data source")]
    EmptyData,

    #[error("non-finite gradient at iteration {iteration} (norm = {norm})")]
    NonFiniteGradient { iteration: usize, norm: f64 },

    #[error("Monte Carlo budget {0} is below the minimum of 100 samples")]
    McBudget(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerics rather than by user input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteGradient { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
