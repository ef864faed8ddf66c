use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A data row that could not be decoded. `row` is the 1-based line number
    /// in the file, header included.
    #[error("row {row}, field `{field}`: {message}")]
    Row {
        row: u64,
        field: String,
        message: String,
    },

    #[error("row {row}: unknown size label `{label}`")]
    UnknownSize { row: u64, label: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    /// The data violates a structural invariant of the model.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A caller passed arguments outside an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn row(row: u64, field: &str, message: impl Into<String>) -> Self {
        Error::Row {
            row,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
