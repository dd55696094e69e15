//! Batch front end: subcommand configs, run dispatch, and manifests.

pub mod config;
pub mod run;

pub use config::{load_config, ConfigDocument};
pub use run::{run, CliOverrides, RunOutcome};
