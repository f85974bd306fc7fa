use std::path::PathBuf;

use thiserror::Error;

/// Everything a subcommand can fail with, mapped onto exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config file, override or strategy name. Exit 2.
    #[error("{0}")]
    Config(String),

    /// Unreadable input or unwritable output. Exit 2.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A directory that `report` cannot interpret. Exit 2.
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    /// The solver produced non-finite values. Exit 3.
    #[error("{0}")]
    Blowup(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Malformed { .. } => 2,
            CliError::Blowup(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
