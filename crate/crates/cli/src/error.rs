use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Input(trajclean::Error),

    #[error("{0} detector run(s) failed; partial results written")]
    DetectorFailures(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::File { .. } | CliError::Input(_) => 3,
            CliError::DetectorFailures(_) => 4,
        }
    }

    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::File {
            path: path.into(),
            source,
        }
    }
}

impl From<trajclean::Error> for CliError {
    fn from(e: trajclean::Error) -> Self {
        use trajclean::Error as E;
        match e {
            E::Config(m) | E::Mapping(m) => CliError::Config(m),
            E::Io { path, source } => CliError::File { path, source },
            other => CliError::Input(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
