//! Command-line surface of the qubit information engine: scenario files,
//! sweep arguments, deterministic CSV output and the self-validation suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod validate;

pub use error::CliError;
