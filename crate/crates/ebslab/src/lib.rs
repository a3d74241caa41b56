//! Command-line front end, file formats and a parallel experiment runner for
//! [`ebslab_core`].
//!
//! Exit codes: 0 success or condition satisfied, 1 condition not satisfied,
//! 2 input or configuration error, 3 numerical failure.

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod vector_io;

pub use error::{CliError, CliResult};
