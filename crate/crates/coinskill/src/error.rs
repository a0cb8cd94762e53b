use thiserror::Error;

/// Errors surfaced by the library and mapped to CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or malformed input value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A documented precondition of an operation does not hold.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// The iteration produced NaN or diverged.
    #[error("numerical divergence at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 parse, 3 parameter/precondition, 4 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) => 2,
            Error::Parameter(_) | Error::Precondition(_) => 3,
            Error::Divergence { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
