//! Command-line front end: daily rainfall ingestion, JSON run
//! configuration and the fit, simulate, validate, compare and simstudy
//! commands, each writing plot-ready CSV output and a run manifest.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod study;
pub mod synth;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, Result};
