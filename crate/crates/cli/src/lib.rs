//! Command-line pipeline around the `graphdrift` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, Result};
