//! Configuration, orchestration and file output for rupture experiments.

pub mod config;
mod error;
pub mod output;
pub mod runner;

pub use config::{parse_config, parse_config_with, serialize_config, Mode, RunConfig};
pub use error::{CliError, ConfigError};
pub use runner::{run, run_in, Completed};
