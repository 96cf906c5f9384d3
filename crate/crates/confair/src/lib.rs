//! Data loading, experiment harness and output files for fairness-constrained
//! kernel SVMs built on `confair-core`.

pub mod cli;
pub mod config;
pub mod dataio;
pub mod experiment;
pub mod model_io;
pub mod output;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ResultRow};
