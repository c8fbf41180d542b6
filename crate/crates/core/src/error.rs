use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("segment duration must be positive, got {dt} s")]
    ZeroOrNegativeDuration { dt: f64 },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("column mapping error: {0}")]
    Mapping(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
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
