//! Error types shared across the estimation pipeline.

pub type Result<T> = std::result::Result<T, CocoError>;

/// Errors surfaced by loss evaluation, solvers and the outer fitting loops.
#[derive(Debug, Clone)]
pub enum CocoError {
    /// An argument left the mathematical domain of an operation
    /// (e.g. a negative convex-loss value passed to a concave component).
    Domain(String),

    /// A specification or configuration failed validation at construction.
    Validation(String),

    /// The problem is degenerate and admits no sensible solution
    /// (all observation weights zero, fewer than two rows, ...).
    Degenerate(String),

    /// A trimming step removed every observation; `iteration` is the
    /// outer iteration at which the weight vector became identically zero.
    DegenerateTrim { iteration: usize },

    /// An iterative solver failed to make progress. The objective values
    /// recorded so far are carried along for post-mortem inspection.
    Convergence { message: String, trace: Vec<f64> },
}

impl std::fmt::Display for CocoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CocoError::Domain(msg) => write!(f, "domain error: {msg}"),
            CocoError::Validation(msg) => write!(f, "validation error: {msg}"),
            CocoError::Degenerate(msg) => write!(f, "degenerate problem: {msg}"),
            CocoError::DegenerateTrim { iteration } => write!(
                f,
                "degenerate trim: all observation weights are zero at outer iteration {iteration}"
            ),
            CocoError::Convergence { message, trace } => write!(
                f,
                "convergence failure after {} recorded objective values: {message}",
                trace.len()
            ),
        }
    }
}

impl std::error::Error for CocoError {}
