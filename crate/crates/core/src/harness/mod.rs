//! Named verification experiments, configuration ingestion and reports.
//!
//! Each experiment builds its own meshes and data, runs the relevant kernels
//! at desk scale, and emits an [`report::ExperimentReport`] whose assertions
//! carry the mathematical claim being checked, the measured value, and the
//! bounds it must satisfy. Reports are reproducible bit for bit for a fixed
//! (config, seed) pair, and experiments never share mutable state, so they
//! can run in any order or in parallel.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{run_all, run_experiment, EXPERIMENT_NAMES};
pub use report::{Assertion, ExperimentReport};
