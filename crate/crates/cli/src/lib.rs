//! Front end for the `ssrbell` binary: configuration, state families,
//! commands and deterministic CSV/JSON output.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod family;
pub mod output;
pub mod report;
pub mod reproduce;

pub use args::{run, Cli};
pub use error::{CliError, Result};

#[cfg(test)]
mod end_to_end;
