use std::fmt;
use std::process::ExitCode;

use replica_tradeoff::Error;

/// Failure of a subcommand, tagged with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Unstable(String),
    /// Exit 4.
    Numerical(String),
    /// Exit 1: file system and other I/O failures.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Unstable(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn into_exit(self) -> ExitCode {
        eprintln!("error: {self}");
        ExitCode::from(self.exit_code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m)
            | CliError::Unstable(m)
            | CliError::Numerical(m)
            | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Unstable(_) => CliError::Unstable(msg),
            Error::Domain(_) | Error::InvalidParameter(_) => CliError::Config(msg),
            Error::StateSpaceTooLarge { .. }
            | Error::NoConvergence { .. }
            | Error::Singular(_)
            | Error::ScanCap { .. } => CliError::Numerical(msg),
        }
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

pub type CliResult<T> = Result<T, CliError>;
