//! Experiment drivers, file formats and command-line plumbing for
//! Schmidt-number certification.
//!
//! The numerical work lives in `schmidt-core`; this crate resolves configs,
//! fans trials out over a thread pool and writes CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;

pub use config::{Experiment, ExperimentConfig, RotationSpec, StateSpec};
pub use error::{CliError, Result};
pub use experiments::{run, RunOutput};
