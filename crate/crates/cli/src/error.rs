use std::fmt;

use toeplitz_minimax::Error;

/// Failure of a CLI run, mapped onto a process exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn missing(key: &str) -> Self {
        CliError::Validation(format!("missing required parameter --{key}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(Error::PdViolation { .. }) => 3,
            CliError::Core(Error::OracleDivergence { .. } | Error::Domain(_)) => 4,
            CliError::Core(_) => 2,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
