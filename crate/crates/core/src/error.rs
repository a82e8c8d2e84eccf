use thiserror::Error;

/// Errors raised by the reduction and estimation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two objects that must live on the same space or dimension do not.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An argument or constructed object violates its invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A Gram matrix that must be positive definite is not.
    #[error("rank-deficient Gram matrix: {0}")]
    RankDeficient(String),

    /// An iterative scheme hit its iteration cap before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
    },

    /// A randomized acceptance loop ran out of attempts.
    #[error("retry budget of {retries} exhausted (best statistic {best:.6})")]
    RetryExhausted { retries: usize, best: f64 },
}

impl Error {
    /// True for failures of the algorithm itself, as opposed to rejected inputs.
    pub fn is_algorithmic(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::RetryExhausted { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
