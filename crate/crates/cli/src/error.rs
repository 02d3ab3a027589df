//! CLI error type carrying the process exit code: 2 for config/input
//! problems, 3 for solver capacity limits.

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 2 }
    }

    pub fn capacity(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 3 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<efpqubo_core::Error> for CliError {
    fn from(e: efpqubo_core::Error) -> Self {
        match e {
            efpqubo_core::Error::CapacityExceeded { .. } => CliError::capacity(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("I/O error: {e}"))
    }
}
