//! Command-line front end for the solver and the scaling benchmark.
//!
//! The `kgbench` binary is a thin wrapper around [`run_cli`]; everything else
//! here is exposed so tests and fuzz targets can reach the parsers directly.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod values;

pub use args::Cli;
pub use commands::{run_cli, Environment, WORKERS_ENV};
pub use config::{parse_config, ConfigError, ConfigFile};
pub use error::{exit, CliError};
