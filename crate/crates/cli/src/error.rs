// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// A failed command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input data: unknown tokens, unreadable files, malformed scores.
    #[error("{0}")]
    Input(String),
    /// Bad flags or configuration.
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl From<whitebox_core::Error> for CliError {
    fn from(e: whitebox_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn io_error(what: &str, path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("cannot {what} {}: {e}", path.display()))
}
