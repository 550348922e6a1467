//! Library side of the `growfrag` command-line tool: configuration, output
//! writers and the subcommands.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use config::RunConfig;

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] growfrag::Error),
    #[error("check failed: {0}")]
    Check(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for domain and configuration errors, 3 when a numerical guard trips,
    /// 4 for failed checks and 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_numerical_guard() => 3,
            CliError::Model(_) => 2,
            CliError::Check(_) => 4,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
