use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Configuration problem, carrying the offending field for diagnostics.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("state overflow at step {step}: |X| exceeded {limit:e}")]
    StateOverflow { step: usize, limit: f64 },

    /// Fixed-point iteration ran out of iterations. The history of successive
    /// distances is preserved for rate diagnostics.
    #[error("fixed-point iteration did not converge after {max_iter} iterations")]
    NonConvergence { max_iter: usize, history: Vec<f64> },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("expected jump count {expected:.3e} exceeds the per-path budget {budget:.3e}; raise the cutoff or the budget")]
    JumpBudgetExceeded { expected: f64, budget: f64 },

    #[error("no weight found: {0}")]
    SearchFailure(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
