use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: row {row}: field `{field}`: {message}")]
    Parse {
        file: String,
        row: u64,
        field: String,
        message: String,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid cell index {0}")]
    InvalidCell(usize),

    #[error("unknown lineup `{requested}`; available lineups:\n{available}")]
    UnknownLineup { requested: String, available: String },

    #[error("unknown {kind} `{name}` (registered: {registered})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        registered: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
