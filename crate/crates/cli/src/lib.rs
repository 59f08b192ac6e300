//! Config-driven experiments on top of `eigenforge-core`: JSON in, CSV and
//! JSON out, byte-identical for identical inputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use error::CliError;
