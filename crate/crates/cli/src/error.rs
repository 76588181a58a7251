use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error(transparent)]
    Core(#[from] centrex_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: 2 usage, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } | CliError::Io(_) | CliError::Csv(_) => 3,
            CliError::Core(e) if e.is_numeric() => 4,
            CliError::Core(centrex_core::Error::InvalidArgument(_)) => 2,
            CliError::Core(centrex_core::Error::Precondition(_)) => 4,
            CliError::Core(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
