use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented invariant. `field` names the
    /// offending item (an index, a JSON path, a column).
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("{path}:{line}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("cannot read {path}: {source}")]
    MissingFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(
        "fold {fold} of {folds} has no training samples of class {class}; use fewer folds"
    )]
    EmptyTrainingClass {
        fold: usize,
        folds: usize,
        class: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by the program.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
