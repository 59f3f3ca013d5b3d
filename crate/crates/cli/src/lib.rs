//! File formats, configuration and the `nashae` command line on top of
//! `nashae-core`.
//!
//! - [`config`]: the flat JSON experiment description.
//! - [`data`], [`checkpoint`], [`tables`]: dataset files, model checkpoints,
//!   training traces and latent dumps.
//! - [`report`]: metric evaluation and the JSON report.
//! - [`run`]: training trials, evaluation and multi-seed sweeps.
//!
//! Byte layouts are documented in `docs/formats.md`.

mod binio;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
mod error;
pub mod report;
pub mod run;
pub mod tables;

pub use error::{CliError, Result};
