//! Command-line front end for `anomaly-core`: run configuration, JSON/CSV
//! output and a chain-parallel Monte Carlo driver.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod mc;

pub use commands::Output;
pub use config::{Format, Mode, Settings};
pub use error::CliError;
pub use mc::{mc_gamma_par, sweep_par, with_threads};
