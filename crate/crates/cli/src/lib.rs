//! Experiment driver for target-aligned replay: config loading, seeded
//! training runs, run comparison and the sign-model check.

pub mod compare;
pub mod config;
pub mod error;
pub mod metrics;
pub mod runner;
pub mod theory;

pub use config::{load_config, save_config, ConfigError, RunConfig};
pub use error::{CliError, Result};
