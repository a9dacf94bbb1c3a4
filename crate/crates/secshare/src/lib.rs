//! Command line tool, file formats and parallel drivers for `secshare-core`.

pub mod app;
pub mod cli;
pub mod commands;
pub mod drivers;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod reproduce;
pub mod svg;

pub use error::{CliError, CliResult};
