//! Experiment driver for `noma-qfl-core`: configuration, file formats and
//! the `noma-qfl` subcommands.

use std::fmt;

pub mod commands;
pub mod config;
pub mod formats;

pub use commands::{run, Cli, Command};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad command-line usage; exit code 2.
    Usage(String),
    /// Anything that fails after argument parsing; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<noma_qfl_core::Error> for CliError {
    fn from(e: noma_qfl_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
