//! The adversarial autoencoder, its losses and the training loop.

pub mod losses;
mod nashae;
mod train;

pub use losses::{
    adversarial_loss, batch_covariance, combined_ae_loss, mask_latent, predictor_loss, reconstruction_loss,
};
pub use nashae::{ModelConfig, NashAe, StepRecord};
pub use train::{fit, fit_with, StepSummary, TrainConfig, TrainTrace, TraceStep};
