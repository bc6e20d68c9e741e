//! Command-line front end: configuration parsing, subcommands and output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{parse_config, RunConfig};
pub use error::{CliError, CliResult};
