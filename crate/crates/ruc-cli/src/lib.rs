//! Command-line harness: configuration loading, experiment dispatch, and
//! reproducible result files.

pub mod config;
pub mod records;
pub mod runner;

pub use config::{load_config, ExperimentConfig, ExperimentKind, Params, RawConfig};
pub use runner::run;
