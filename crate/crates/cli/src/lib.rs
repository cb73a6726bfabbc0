//! Configuration and pipelines behind the `graphscale` binary.

pub mod config;
pub mod runner;

pub use config::ExperimentConfig;
pub use runner::{run_experiment, Command, Outcome};
