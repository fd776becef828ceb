//! Configuration and orchestration behind the `gsmvlc` binary.

pub mod config;
pub mod run;

pub use config::{ExperimentSpec, Mode, Overrides};
pub use run::run;
