//! Library side of the `abring` command-line tool.

pub mod check;
pub mod commands;
pub mod config;

pub use check::{cmd_check, run_checks, CheckResult};
pub use commands::{
    cmd_energy, cmd_entropy, cmd_figures, entropy_sweep, CliError, CommandOutput, SweepResults,
};
pub use config::{ConfigError, OutputFormat, RunConfig, SweepPoint};
