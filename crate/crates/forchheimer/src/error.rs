use crate::stationary::SolveReport;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Non-finite or otherwise out-of-domain numerical input.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated an API precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A linear sub-solve hit a singular-to-working-precision pivot.
    #[error("ill-conditioned linearization: {0}")]
    Conditioning(String),

    /// Nonlinear iteration exhausted its budget; the report carries the
    /// full residual history, never a silent partial answer.
    #[error("nonlinear solve did not converge (residual {final_residual:.3e} after {iterations} iterations)")]
    Nonconvergence {
        final_residual: f64,
        iterations: usize,
        report: Box<SolveReport>,
    },

    /// The regularization schedule ran out of stages before successive
    /// solutions settled; all stage records are attached.
    #[error("continuation schedule exhausted after {stages} stages (last stage distance {last_distance:.3e})")]
    ContinuationExhausted {
        stages: usize,
        last_distance: f64,
        report: Box<SolveReport>,
    },

    /// A descent-based test oracle stalled. This flags broken test
    /// infrastructure, not a product defect.
    #[error("oracle failure: {0}")]
    Oracle(String),

    /// Configuration text could not be parsed.
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Configuration parsed but violates a model assumption.
    #[error("config validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
