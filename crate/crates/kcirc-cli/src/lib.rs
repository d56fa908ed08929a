//! IO, file formats, configuration, thread fan-out, and the command
//! implementations behind the `kcirc` binary.

pub mod commands;
pub mod config;
pub mod formats;
pub mod parallel;

/// Failure carrying the process exit code: 2 for invalid input or a
/// violated expectation, 1 for internal trouble (IO and the like).
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::internal(format!("io error: {e}"))
    }
}
