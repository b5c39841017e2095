use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] reinfect::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {msg}", path.display())]
    Csv { path: PathBuf, msg: String },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        CliError::Csv { path: path.into(), msg: msg.to_string() }
    }

    /// 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
