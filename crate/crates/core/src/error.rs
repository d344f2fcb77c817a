use thiserror::Error;

/// Errors raised by the library.
///
/// The variants line up with the CLI exit codes: invalid input maps to 2,
/// numerical failures (singular pencil, consistency) to 3, and the dense cap
/// to 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization broke down at `pivot` even after jitter.
    #[error("singular pencil: Cholesky factorization failed at pivot {pivot}")]
    SingularPencil { pivot: usize },

    #[error("numerical consistency: {0}")]
    NumericalConsistency(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Json(_) => 2,
            Error::SingularPencil { .. } | Error::NumericalConsistency(_) => 3,
            Error::ResourceLimit(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
