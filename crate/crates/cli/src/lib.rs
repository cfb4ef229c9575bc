//! Argument and config-file handling for the `oddsratio` binary, plus the
//! two run modes.

mod config;
mod run;

pub use config::{parse_config, ConfigError, Mode, RunConfig};
pub use run::{execute, run_estimate};
