use std::path::PathBuf;

/// Errors raised anywhere in the solver stack.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh format error: {0}")]
    Format(String),

    #[error("mesh validation error: {0}")]
    Validation(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The factorization found no usable pivot; `row` is the offending
    /// (permuted) pivot row when known.
    #[error("singular matrix: no usable pivot at row {row}")]
    SingularMatrix { row: usize },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for input and configuration problems, 3 for
    /// solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularMatrix { .. }
            | Error::NonConvergence { .. }
            | Error::InvalidState(_) => 3,
            _ => 2,
        }
    }
}
