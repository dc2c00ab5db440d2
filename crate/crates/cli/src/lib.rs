//! Library side of the `quasim` command-line front end. The binary in
//! `main.rs` is a thin argument-parsing shell around [`commands`]; keeping
//! the logic here lets the integration tests drive every command in-process.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;

/// Command failure that maps to exit code 1 (usage, configuration, I/O).
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError(e.to_string())
    }
}

impl From<quasim::Error> for CliError {
    fn from(e: quasim::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(format!("I/O error: {e}"))
    }
}

/// `Ok(true)`: all numerical checks passed (exit 0).
/// `Ok(false)`: the run completed but a check failed (exit 2).
/// `Err(_)`: usage/config/IO failure (exit 1).
pub type CommandOutcome = Result<bool, CliError>;
