//! Command-line driver: scenario files in, CSV or JSON tables out.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use commands::{
    analytic_tables, calibrate_curves, pair_tables, run_simulation, AnalyticTables, PairTables, SimulationReport,
};
pub use config::Scenario;
pub use output::{Format, Table};

/// Failures, grouped by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad invocation or unreadable input file.
    Usage(String),
    /// Invalid scenario or data file.
    Config(String),
    /// Numerical or I/O failure while running.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<jdfpt_core::Error> for CliError {
    fn from(e: jdfpt_core::Error) -> Self {
        match e {
            jdfpt_core::Error::Data { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
