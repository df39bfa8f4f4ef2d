//! Batch front-end: a flat configuration file in, CSV tables and plot data out.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigError, LoadKind, RunConfig};
pub use run::{run, CliError, RunSummary};
