//! Command-line harness: configuration, commands and the acceptance suite.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::{load_config, Command, RunConfig, Settings};
pub use error::{CliError, CliResult};
