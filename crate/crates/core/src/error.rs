use thiserror::Error;

/// Errors raised by the operator toolkit.
///
/// `Structural` errors mean the inputs do not fit together (sizes, site
/// counts, subsystem layout). `ContractViolation` errors mean the inputs fit
/// but break a stated precondition such as Hermiticity or positivity.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site count mismatch: {left} vs {right}")]
    SiteCountMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
