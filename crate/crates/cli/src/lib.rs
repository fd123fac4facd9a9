//! Command-line front end for `fpboost`.
//!
//! Every subcommand writes a CSV trace with a one-line header and a
//! `<trace>.manifest.txt` file listing the inputs and parameters of the run.
//! Exit codes: 0 success, 2 usage, 3 input, 4 numerical failure, 5 solver stall.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod inputs;
pub mod manifest;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
