use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum HfError {
    /// A series operation received an operand violating its preconditions.
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// An argument lies outside the domain of the requested function.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Modular reduction needed more steps than the configured cap.
    #[error("reduction overflow after {steps} steps at tau = {re} + {im}i")]
    ReductionOverflow { steps: usize, re: f64, im: f64 },

    /// An iterative solver or adaptive quadrature failed to converge.
    #[error("no convergence: {what} (achieved error estimate {achieved:e})")]
    ConvergenceError { what: String, achieved: f64 },

    /// An internal invariant was violated.
    #[error("algorithm error: {0}")]
    AlgorithmError(String),

    /// User supplied input is malformed or unsupported.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two independent computations of the same quantity disagree.
    #[error("consistency error: {what}: {a} vs {b} (difference {diff:e})")]
    ConsistencyError {
        what: String,
        a: String,
        b: String,
        diff: f64,
    },

    /// Oscillatory quadrature would need more nodes than the budget allows.
    #[error("resolution error: {0}")]
    ResolutionError(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HfError>;

impl From<serde_json::Error> for HfError {
    fn from(e: serde_json::Error) -> Self {
        HfError::Parse(e.to_string())
    }
}

impl From<csv::Error> for HfError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                return HfError::Io(io);
            }
            unreachable!("is_io_error implies an Io kind");
        }
        HfError::Parse(e.to_string())
    }
}
