//! Command-line front end for `rmab-core`: JSON experiment configs, figure
//! presets and CSV output for each subcommand.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

pub use commands::{cmd_evaluate, cmd_index, cmd_oracle, cmd_queueing, cmd_simulate, cmd_subsidy, execute};
pub use config::{ExperimentConfig, Mode, Overrides};
pub use error::{CliError, Result};
pub use presets::Preset;
