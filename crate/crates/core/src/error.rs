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

    #[error("{path}: unsupported image format")]
    UnsupportedFormat { path: PathBuf },

    #[error("{path}: failed to decode image: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("invalid level count {0}: need at least 2")]
    InvalidLevels(u32),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid crop: {0}")]
    InvalidCrop(String),

    #[error("image {width}x{height} too small: {needed}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        needed: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty candidate pool")]
    EmptyPool,

    #[error("requested {requested} items from a pool of {available}")]
    InvalidCount { requested: usize, available: usize },

    #[error("class {label:?} has {size} member(s); at least 2 are required")]
    ClassTooSmall { label: String, size: usize },

    #[error("malformed feature table: {0}")]
    Table(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
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
