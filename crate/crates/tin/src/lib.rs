//! File formats, checkpoints and the `tin` command-line pipeline built on
//! `tin-core`.

pub mod checkpoint;
pub mod config;
pub mod dump;
mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
