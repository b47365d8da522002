//! Library side of the `shqmm` command: configuration, checkpoints and the
//! subcommand implementations.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;

pub use checkpoint::{AnyModel, Checkpoint};
pub use config::{ExperimentConfig, Family};
pub use error::{CliError, Result};
