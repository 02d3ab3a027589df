//! Experiment driver for degeneracy-engineered l0-norm sparse regression:
//! event generation, λ sweeps, degeneracy profiles and sweep comparisons.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, CliResult};
