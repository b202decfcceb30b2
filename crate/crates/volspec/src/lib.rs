//! File formats, run configuration and the command-line driver for
//! [`volspec_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{run, RunArgs};
pub use config::Command;
pub use error::{exit, CliError, CliResult};
