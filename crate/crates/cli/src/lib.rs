//! Batch front end: motion files, synthetic clips and the `physimetrics`
//! subcommands.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod synth;

pub use error::{CliError, CliResult};
pub use format::{MotionFile, PayloadKind, UpAxis};
