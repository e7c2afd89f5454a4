//! Configuration-driven experiments on top of `mfrf-core`: single designs,
//! parameter sweeps, SER and detection curves, and SINR-loss comparisons,
//! written as CSV tables with a TOML manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod problem;

pub use config::RunConfig;
pub use error::CliError;
