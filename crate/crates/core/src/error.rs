use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    /// A point or parameter lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A functional has a vanishing denominator (zero boundary mass, zero norm).
    #[error("degenerate quantity: {0}")]
    Degenerate(String),

    /// The obstacle solver stopped at `max_iter` above its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
