//! Configuration, presets, output and run orchestration behind the `dicke`
//! command.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{ConfigError, RunConfig, SCHEMA_VERSION};
pub use run::{run_stability, run_trajectory, Overrides, RunError};
