//! File formats and subcommand implementations behind the `polytomo` binary.

pub mod commands;
pub mod files;

use thiserror::Error;

/// Every failure maps onto one of the stable exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("protocol is informationally incomplete: {0}")]
    Unbounded(String),
    #[error("confidence region is empty: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Io(_) | CliError::Other(_) => 1,
            CliError::Unbounded(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<polytomo::Error> for CliError {
    fn from(e: polytomo::Error) -> Self {
        match e {
            polytomo::Error::Unbounded(m) => CliError::Unbounded(m),
            polytomo::Error::EmptyRegion(m) => CliError::Infeasible(m),
            other => CliError::Other(other.to_string()),
        }
    }
}
