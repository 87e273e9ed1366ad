use std::path::PathBuf;

use thiserror::Error;

use crate::media::MediaShape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch {
        expected: MediaShape,
        found: MediaShape,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("unsupported {what} in {path}: found {found}, expected {expected}")]
    Codec {
        path: PathBuf,
        what: &'static str,
        found: String,
        expected: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{scheme}: no content-agnostic reference exists")]
    NoReference { scheme: &'static str },

    #[error("{scheme}: scheme carries no payload; use detect_score")]
    NoPayload { scheme: &'static str },

    #[error("insufficient data: need {needed} {what}, have {available}")]
    Insufficient {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by user-supplied configuration rather than data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::Malformed { .. })
    }
}
