//! Experiment driver: reads a JSON config, evaluates closed forms, bounds
//! or simulations over a parameter sweep and writes CSV plus a metadata
//! sidecar.

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{cmd_analytic, cmd_bounds, cmd_simulate, run, CliError, Command};
pub use config::{ConfigError, ExperimentConfig, SCHEMA_ID};
