use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Core(nashae_core::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::Data(message.into())
    }

    /// Process exit status: 2 configuration, 3 data or IO, 4 non-finite values.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Data(_) | Self::Io { .. } => 3,
            Self::Numeric(_) => 4,
            Self::Core(e) => match e {
                nashae_core::Error::NonFinite(_) => 4,
                nashae_core::Error::InvalidConfig(_) => 2,
                _ => 3,
            },
        }
    }
}

impl From<nashae_core::Error> for CliError {
    fn from(e: nashae_core::Error) -> Self {
        match e {
            nashae_core::Error::NonFinite(what) => Self::Numeric(format!("non-finite {what}; training aborted")),
            other => Self::Core(other),
        }
    }
}

/// Attaches the path to an IO error.
pub(crate) trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
