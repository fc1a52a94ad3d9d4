//! File formats, configuration and command implementations around
//! `trendcx-core`.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod output;

pub use error::{Result, RunError};
