//! Configuration parsing and command dispatch for the `dirdiff` binary.

pub mod config;
pub mod dispatch;

pub use config::{parse_config, Command, ConfigError, OutputFormat, RunConfig};
pub use dispatch::{dispatch, run};
