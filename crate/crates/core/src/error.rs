use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("no visual features for sample {sample} (image {image_id})")]
    MissingFeature { sample: usize, image_id: String },

    #[error("{kind} needs {what} for sample {sample} (image {image_id})")]
    MissingSideInfo {
        kind: String,
        what: String,
        sample: usize,
        image_id: String,
    },

    #[error("id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: usize, size: usize },

    #[error("unknown {what} '{value}', expected one of: {expected}")]
    Unknown {
        what: &'static str,
        value: String,
        expected: String,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
