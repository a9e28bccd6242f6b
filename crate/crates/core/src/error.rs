use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("dataset file {path} not found; {hint}")]
    MissingData { path: PathBuf, hint: String },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_usage_error(&self) -> bool {
        match self {
            Error::Validation(_) | Error::UnknownDataset(_) | Error::MissingData { .. } => true,
            Error::Iteration { source, .. } => source.is_usage_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
