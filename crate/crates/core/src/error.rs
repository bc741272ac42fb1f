//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    /// A field of an instance or policy violates an invariant.
    #[error("validation error in {field}{}: {message}", index_suffix(.index))]
    Validation {
        field: String,
        index: Vec<usize>,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("extreme kernel count {count} exceeds cap {cap} at state {state}")]
    ExplosionGuard { state: usize, count: usize, cap: usize },

    #[error("enumeration of {count} policies exceeds cap {cap}")]
    EnumerationCapExceeded { count: u128, cap: usize },

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("solver tolerance not met: achieved {achieved:e}, requested {requested:e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },

    #[error("max iterations ({iters}) exceeded, last residual {last_residual:e}")]
    MaxItersExceeded { iters: usize, last_residual: f64 },

    #[error("no element of the controller set meets the bound at state {state} (shortfall {shortfall:e})")]
    ExtractionFailed { state: usize, shortfall: f64 },

    #[error("state {from} cannot reach target {target}")]
    TargetUnreachable { from: usize, target: usize },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("infeasible linear program")]
    Infeasible,

    #[error("unbounded linear program")]
    Unbounded,
}

fn index_suffix(index: &[usize]) -> String {
    if index.is_empty() {
        String::new()
    } else {
        let parts: Vec<String> = index.iter().map(|i| i.to_string()).collect();
        format!("[{}]", parts.join("]["))
    }
}

impl Error {
    pub(crate) fn validation(field: &str, index: &[usize], message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            index: index.to_vec(),
            message: message.into(),
        }
    }
}
