use thiserror::Error;

/// Errors produced by the library and the `umlab` binary.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A triplet of points whose triangle has no well-defined angles
    /// (coincident or collinear points).
    #[error("degenerate triangle")]
    DegenerateTriangle,

    /// EM kept collapsing a component onto a point mass.
    #[error("EM collapsed for k = {k} after {retries} retries")]
    EmCollapse { k: usize, retries: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input (the CLI maps these to exit code 2).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Parse { .. } | Error::DegenerateTriangle
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
