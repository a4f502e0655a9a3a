use thiserror::Error;

/// Errors raised by the numeric routines.
///
/// Values are stored as `f64` regardless of the scalar type in use so the
/// error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below -{tol:e}")]
    NotPsd { eigenvalue: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative eigenvalue {value:e} at index {index}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("integration diverged at step {step}: covariance norm {norm:e}")]
    StepDiverged { step: usize, norm: f64 },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension {dim} too large for grid discretization (max {max})")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("Sinkhorn iterations did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

impl Error {
    /// Wraps an error with the integration step at which it occurred.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } | e @ Error::StepDiverged { .. } => e,
            e => Error::AtStep {
                step,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, with step context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
