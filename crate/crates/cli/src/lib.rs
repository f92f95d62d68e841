//! Command-line front end: configuration loading, the `run`, `sweep` and
//! `verify` subcommands, CSV output and SVG charts.

pub mod commands;
pub mod csv_io;
pub mod svg;

pub use commands::{cmd_run, cmd_sweep, cmd_verify, exit, CliError, Options};
