//! Command-line front end and verification harness.

pub mod cli;
pub mod verify;

pub use cli::{run_cli, run_cli_with};
