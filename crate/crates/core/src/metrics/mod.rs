//! Evaluation metrics for latent representations.

mod auroc;
pub mod bvae;
pub mod entropy;
mod latents;
mod r2;
pub mod synthetic;
mod tad;

pub use auroc::{auroc, auroc_with_thresholds, THRESHOLDS};
pub use bvae::{beta_vae_score, discretize, BvaeConfig};
pub use entropy::{entropy_disqualify, Qualification, DEFAULT_REDUCTION_THRESHOLD};
pub use latents::{count_learned_latents, latent_ranges, LEARNED_RANGE};
pub use r2::{mean_r_squared, r_squared_per_latent, DEAD_LATENT_SS};
pub use synthetic::{synthetic_tad_table, SyntheticTad};
pub use tad::{tad, tad_with_threshold, AttributeScore, LatentTable, TadReport, CAPTURE_THRESHOLD};
