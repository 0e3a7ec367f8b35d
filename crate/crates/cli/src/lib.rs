//! Command-line front end: configuration, output files and the four
//! experiment commands (`simulate`, `sync`, `optimize`, `table`).

pub mod batch;
pub mod cli;
pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for a diverged simulation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Divergence(_) => 2,
        }
    }
}

impl From<colpitts_sync::Error> for CliError {
    fn from(e: colpitts_sync::Error) -> Self {
        match e {
            colpitts_sync::Error::Diverged { .. } => CliError::Divergence(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
