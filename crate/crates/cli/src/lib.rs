//! Seeded experiment runner for hybrid oscillator-qubit QAOA on Max-Cut.

pub mod config;
pub mod error;
pub mod experiment;
pub mod graph_io;
pub mod output;

pub use config::{ExperimentConfig, Kind};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, Outcome, RunRow};
