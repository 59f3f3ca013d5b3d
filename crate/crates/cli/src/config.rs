//! Flat JSON experiment description.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use nashae_core::beam::BeamConfig;
use nashae_core::model::{ModelConfig, TrainConfig};
use nashae_core::{Activation, AdamConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, IoContext, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Metric names accepted by `metrics` and `eval --metrics`.
pub const METRIC_NAMES: [&str; 4] = ["tad", "bvae", "r2", "count"];

/// One experiment: data, model, optimization and trial seeds.
///
/// Every key is optional except `schema_version`; missing keys take the beam
/// waveform defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    #[serde(default = "missing_version")]
    pub schema_version: u32,
    /// Dataset file written by `generate-data`. When absent the beam waveforms
    /// are generated from the keys below.
    pub data_path: Option<PathBuf>,
    pub frequencies: Vec<u32>,
    pub duty_cycle_count: usize,
    pub duty_cycle_lo: f64,
    pub duty_cycle_hi: f64,
    pub waveform_len: usize,
    pub ramp_tau: f64,
    pub noise_sigma: f64,
    pub data_seed: u64,

    pub hidden: Vec<usize>,
    pub latent_dim: usize,
    pub predictor_hidden: Vec<usize>,
    pub hidden_activation: String,
    pub lambda: f64,
    pub predictor_steps: usize,
    pub ae_lr: f64,
    pub predictor_lr: f64,

    pub batch_size: usize,
    pub epochs: usize,
    pub shuffle: bool,
    /// Also write a checkpoint every this many epochs; 0 keeps only the final one.
    pub checkpoint_every: usize,

    pub seeds: Vec<u64>,
    pub metrics: Vec<String>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let beam = BeamConfig::default();
        let model = ModelConfig::beam(4, 0.2);
        let train = TrainConfig::default();
        Self {
            schema_version: SCHEMA_VERSION,
            data_path: None,
            frequencies: beam.frequencies,
            duty_cycle_count: beam.duty_cycle_count,
            duty_cycle_lo: beam.duty_cycle_range.0,
            duty_cycle_hi: beam.duty_cycle_range.1,
            waveform_len: beam.waveform_len,
            ramp_tau: beam.ramp_tau,
            noise_sigma: beam.noise_sigma,
            data_seed: beam.seed,
            hidden: model.hidden,
            latent_dim: model.latent_dim,
            predictor_hidden: model.predictor_hidden,
            hidden_activation: model.hidden_activation.name().to_string(),
            lambda: model.lambda,
            predictor_steps: model.predictor_steps,
            ae_lr: model.ae_adam.learning_rate,
            predictor_lr: model.predictor_adam.learning_rate,
            batch_size: train.batch_size,
            epochs: train.epochs,
            shuffle: train.shuffle,
            checkpoint_every: 0,
            seeds: vec![0],
            metrics: vec!["count".into(), "r2".into()],
            out_dir: None,
        }
    }
}

fn missing_version() -> u32 {
    0
}

pub fn parse_activation(name: &str) -> Option<Activation> {
    [Activation::Identity, Activation::Sigmoid, Activation::Selu, Activation::Relu]
        .into_iter()
        .find(|a| a.name().eq_ignore_ascii_case(name))
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            // Unknown and duplicate keys report the parent path; name the key itself.
            let named = ["unknown field `", "duplicate field `"]
                .iter()
                .find_map(|p| message.strip_prefix(p))
                .and_then(|rest| rest.split('`').next());
            match named {
                Some(k) => CliError::config(k, message.clone()),
                None => CliError::config(if key == "." { "(document)".into() } else { key }, message),
            }
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: &str| Err(CliError::config(key, msg));
        if self.schema_version == 0 {
            return fail("schema_version", "required");
        }
        if self.schema_version != SCHEMA_VERSION {
            return fail("schema_version", &format!("unsupported version, expected {SCHEMA_VERSION}"));
        }
        if self.data_path.is_none() {
            if let Err(e) = self.beam().validate() {
                return Err(CliError::config(beam_key(&e.to_string()), e.to_string()));
            }
        }
        if self.latent_dim == 0 {
            return fail("latent_dim", "must be positive");
        }
        if self.hidden.contains(&0) {
            return fail("hidden", "widths must be positive");
        }
        if self.predictor_hidden.contains(&0) {
            return fail("predictor_hidden", "widths must be positive");
        }
        if parse_activation(&self.hidden_activation).is_none() {
            return fail("hidden_activation", "expected one of identity, sigmoid, selu, relu");
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return fail("lambda", "must lie in [0, 1)");
        }
        if !(self.ae_lr > 0.0 && self.ae_lr.is_finite()) {
            return fail("ae_lr", "must be positive");
        }
        if !(self.predictor_lr > 0.0 && self.predictor_lr.is_finite()) {
            return fail("predictor_lr", "must be positive");
        }
        if self.batch_size < 2 {
            return fail("batch_size", "must be at least 2");
        }
        if self.epochs == 0 {
            return fail("epochs", "must be positive");
        }
        if self.seeds.is_empty() {
            return fail("seeds", "at least one seed is needed");
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return fail("seeds", "seeds must be distinct");
        }
        if let Some(bad) = self.metrics.iter().find(|m| !METRIC_NAMES.contains(&m.as_str())) {
            return fail("metrics", &format!("unknown metric `{bad}`"));
        }
        Ok(())
    }

    pub fn beam(&self) -> BeamConfig {
        BeamConfig {
            frequencies: self.frequencies.clone(),
            duty_cycle_count: self.duty_cycle_count,
            duty_cycle_range: (self.duty_cycle_lo, self.duty_cycle_hi),
            waveform_len: self.waveform_len,
            ramp_tau: self.ramp_tau,
            noise_sigma: self.noise_sigma,
            seed: self.data_seed,
        }
    }

    /// Model settings for an `input_dim`-wide dataset.
    pub fn model(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            input_dim,
            hidden: self.hidden.clone(),
            latent_dim: self.latent_dim,
            predictor_hidden: self.predictor_hidden.clone(),
            hidden_activation: parse_activation(&self.hidden_activation).unwrap_or(Activation::Selu),
            lambda: self.lambda,
            predictor_steps: self.predictor_steps,
            ae_adam: AdamConfig::with_lr(self.ae_lr),
            predictor_adam: AdamConfig::with_lr(self.predictor_lr),
        }
    }

    pub fn train(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            shuffle: self.shuffle,
        }
    }
}

/// Maps a beam validation message back to the config key it concerns.
fn beam_key(message: &str) -> &'static str {
    for (needle, key) in [
        ("frequencies", "frequencies"),
        ("duty_cycle_count", "duty_cycle_count"),
        ("duty_cycle_range", "duty_cycle_lo"),
        ("waveform_len", "waveform_len"),
        ("ramp_tau", "ramp_tau"),
        ("noise_sigma", "noise_sigma"),
    ] {
        if message.contains(needle) {
            return key;
        }
    }
    "(beam)"
}
