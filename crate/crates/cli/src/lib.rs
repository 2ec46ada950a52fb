//! Reproduction harness: JSON experiment configs, CSV sweeps, and the
//! validation suite that checks every closed form against its oracle.

pub mod config;
pub mod error;
pub mod oracle;
pub mod output;
pub mod sweeps;
pub mod validate;

pub use config::{ExperimentConfig, ExperimentKind, ResolvedConfig};
pub use error::{CliError, Result};
