use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unphysical state: {0}")]
    UnphysicalState(String),

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("matrix is not orthogonal-symplectic (residual {residual:.3e})")]
    NotOrthoSymplectic { residual: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("eigenvalues of Ωσ do not pair as ±iν (residual {residual:.3e})")]
    NumericalDegeneracy { residual: f64 },

    #[error("numerical failure in {stage}: residual {residual:.3e}")]
    NumericalFailure { stage: &'static str, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range {lo}..={hi}")]
    OutOfRange { index: usize, lo: usize, hi: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("wrong direction: {0}")]
    WrongDirection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
