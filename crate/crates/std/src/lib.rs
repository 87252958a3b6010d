//! Command-line front end of `mbandit-core`: instance files, experiment
//! configs, parallel experiment cells and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod instance_file;

pub use config::{ConfigFile, Environment, ExperimentConfig, RegretMode, Seeds};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, ExperimentReport, InstantClock};
pub use instance_file::{load_instance, InstanceFile};
