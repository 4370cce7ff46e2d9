//! Configuration, output files and the command-line surface.

pub mod commands;
pub mod config;
pub mod files;

pub use commands::{analyze, simulate, sweep, Cli, Command};
pub use config::{parse_config, parse_config_str, RunConfig};
pub use files::{read_prices, summarize, SeriesStats, Summary};
