//! Batch driver for the lottery solver: configuration, runs and artifacts.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{load_config, preset, Overrides, RunConfig};
pub use error::CliError;
