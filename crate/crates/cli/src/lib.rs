//! Experiment harness for the `macroplace` toolkit: the `macroplace` binary's
//! subcommands, JSON experiment specs, parallel multi-seed runs and SVG rendering.

pub mod args;
pub mod commands;
pub mod error;
pub mod render;
pub mod runner;
pub mod spec;

pub use commands::run;
pub use error::{CliError, Result};
