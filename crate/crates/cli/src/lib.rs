//! File I/O, subcommands and the built-in verification suite behind the
//! `bvlab` binary.

pub mod commands;
pub mod error;
pub mod snapshot;
pub mod table;
pub mod verify;

pub use commands::{cmd_report, cmd_run, cmd_sweep, cmd_verify, load_config, output_root};
pub use error::CliError;
