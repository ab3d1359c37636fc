//! Library side of the `tmlab` command: config parsing, the subcommands and
//! the verification suites, exposed so that integration tests can drive them
//! without spawning processes.

pub mod commands;
pub mod config;
pub mod error;
pub mod suites;

pub use error::{CliError, CliResult, Status};
