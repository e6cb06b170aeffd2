//! Library side of the `gpflow` command: config parsing, run orchestration
//! and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{GlobalOptions, Status};
pub use config::{InitialData, RunConfig};
pub use error::{CliError, CliResult};
