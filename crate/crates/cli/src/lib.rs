//! Batch front-end for the standing-wave decay simulation.

pub mod commands;
pub mod config;

use std::path::PathBuf;

pub use commands::Artifact;
pub use config::{Format, ScenarioConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(swdecay_core::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_convergence_failure() => EXIT_CONVERGENCE,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<swdecay_core::Error> for CliError {
    fn from(e: swdecay_core::Error) -> Self {
        CliError::Core(e)
    }
}
