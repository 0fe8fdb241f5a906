use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] qmetro_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// Process exit status: 1 for a bad scenario, 2 for anything that fails
    /// after the scenario was accepted.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(_) => 1,
            CliError::Numerical(_) | CliError::Io { .. } => 2,
        }
    }
}
