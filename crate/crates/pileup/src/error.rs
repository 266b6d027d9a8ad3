//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation
    /// (e.g. evaluating the potential at `s = 0` where it diverges).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value or structure violates a documented invariant
    /// (unsorted positions, non-unit mass, empty lists, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two walls coincide, so the interaction energy is `+inf`.
    #[error("singular configuration: walls {i} and {j} coincide (positions {x:e})")]
    SingularConfiguration { i: usize, j: usize, x: f64 },

    /// Parameters are inconsistent with the requested asymptotic regime,
    /// e.g. the supercritical rescaling needs `(2/π)β² > 1`.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// The requested operation has no implementation for this case
    /// (e.g. a closed-form minimizer where none exists).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical minimizer's support reached the grid boundary; rerun
    /// with a larger domain.
    #[error("domain too small: support touches the right boundary, retry with length >= {suggested_l}")]
    DomainTooSmall { suggested_l: f64 },

    /// The adaptive gradient-flow step fell below `1e-16` without an
    /// acceptable move: the dynamics are stuck.
    #[error("gradient flow stagnated at t = {t:e} with dt = {dt:e}")]
    Stagnation { t: f64, dt: f64 },

    /// The gradient flow exhausted its step budget before reaching `t_end`.
    #[error("gradient flow exceeded {steps} steps before t_end")]
    StepBudget { steps: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
