//! File formats, configuration and the command-line front end for the
//! `photonkd-core` simulator.

pub mod cli;
pub mod config;
pub mod error;
pub mod keyfile;
pub mod report;
pub mod runner;

pub use error::{CliError, ExitKind};
