use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] sntail::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 3 for I/O, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                sntail::Error::InvalidParameter(_)
                | sntail::Error::DimensionMismatch { .. }
                | sntail::Error::OutsideValidity(_)
                | sntail::Error::NonFinite(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } => 3,
            CliError::Csv(_) => 3,
        }
    }
}
