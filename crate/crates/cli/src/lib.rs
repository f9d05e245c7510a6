//! Command-line front end: configuration, result files and the subcommand
//! pipelines behind the `bandspec` binary.

pub mod app;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod table;

pub use app::{execute, main_with_args, RunOutcome};
pub use commands::Command;
pub use config::RunConfig;
