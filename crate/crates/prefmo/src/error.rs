use thiserror::Error;

/// Errors produced across the toolkit. Each maps to a process exit code in the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cap exceeded: {what} requires {needed} > cap {cap}")]
    CapExceeded {
        what: String,
        needed: usize,
        cap: usize,
    },

    #[error("independence violation: {0}")]
    IndependenceViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("linear program infeasible")]
    Infeasible,

    #[error("linear program unbounded")]
    Unbounded,

    #[error("inconsistent oracle answers: admissible region is empty")]
    InconsistentOracle,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error at {path}: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// CLI exit-code contract: 0 success, 2 validation, 3 cap exceeded, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::DimensionMismatch { .. }
            | Error::IndependenceViolation(_)
            | Error::InconsistentOracle
            | Error::Io(_)
            | Error::Schema { .. } => 2,
            Error::CapExceeded { .. } => 3,
            Error::Numerical(_) | Error::Infeasible | Error::Unbounded => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
