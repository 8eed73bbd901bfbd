//! Command-line front end for `seqalloc`: config handling, instance files
//! and the `solve`, `simulate` and `gen-scenario` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod instance_file;
pub mod output;

pub use error::{CliError, CliResult};
