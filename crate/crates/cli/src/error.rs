//! Exit-code contract: 0 success, 1 verification failure, 2 config or flag
//! error, 3 runtime solver failure.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
    Usage,
    Runtime,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::CheckFailed => 1,
            Status::Usage => 2,
            Status::Runtime => 3,
        }
    }

    /// Success when every check passed, otherwise a verification failure.
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Success
        } else {
            Status::CheckFailed
        }
    }
}

/// An error together with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches an exit status to any error.
pub trait Classify<T> {
    fn usage(self) -> CliResult<T>;
    fn runtime(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> CliResult<T> {
        self.map_err(|e| CliError { status: Status::Usage, error: e.into() })
    }

    fn runtime(self) -> CliResult<T> {
        self.map_err(|e| CliError { status: Status::Runtime, error: e.into() })
    }
}

pub fn usage_error(msg: impl fmt::Display) -> CliError {
    CliError { status: Status::Usage, error: anyhow::anyhow!("{msg}") }
}
