//! Adversarial covariance-minimizing autoencoder (NashAE) and its evaluation suite.
//!
//! The crate is `no_std` + `alloc`. Everything here is pure computation:
//!
//! - [`numerics`]: row-major matrices, dense SELU/sigmoid/ReLU layers with
//!   hand-derived backward passes, Adam, initialization and a finite-difference
//!   gradient checker.
//! - [`model`]: encoder, decoder and predictor ensemble, the four losses and the
//!   alternating training loop.
//! - [`beam`]: the synthetic pulse-train waveform dataset (frequency x duty cycle).
//! - [`metrics`]: threshold-sweep AUROC, total AUROC difference with entropy
//!   disqualification, the pair-difference classifier score, per-latent R² and
//!   learned-latent counting.
//!
//! File formats, configuration and the command line live in the `nashae-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod beam;
mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
pub use numerics::{Activation, AdamConfig, DenseLayer, Matrix, Mlp};
