//! File formats, configuration and the `qball` command line on top of
//! [`qball_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod plot;

pub use config::RunConfig;
pub use error::{CliError, Stage};
