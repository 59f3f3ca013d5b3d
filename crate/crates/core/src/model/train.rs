use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{NashAe, StepRecord};
use crate::rng::{self, Purpose};
use crate::{Error, Matrix, Result};

/// Minibatch schedule for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Master seed; only its `Shuffle` stream is used here.
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            epochs: 2000,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "batch_size must be at least 2, got {}",
                self.batch_size
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }

    /// Row-index batches for one epoch of `n` samples, in visiting order.
    ///
    /// A trailing batch of a single sample is dropped: covariance over one
    /// sample is undefined.
    pub fn batches(&self, order: &[usize]) -> Vec<Vec<usize>> {
        order
            .chunks(self.batch_size)
            .filter(|c| c.len() >= 2)
            .map(<[usize]>::to_vec)
            .collect()
    }
}

/// Losses of one optimizer step, without the per-predictor breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSummary {
    pub recon: f64,
    pub adversarial: f64,
    pub combined: f64,
    pub mean_predictor_loss: f64,
}

impl From<&StepRecord> for StepSummary {
    fn from(r: &StepRecord) -> Self {
        Self {
            recon: r.recon,
            adversarial: r.adversarial,
            combined: r.combined,
            mean_predictor_loss: r.mean_predictor_loss(),
        }
    }
}

/// One optimizer step of the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    pub epoch: usize,
    pub record: StepSummary,
}

/// Everything recorded during [`fit`].
///
/// Nothing here is allocated once training starts. Small long-lived
/// allocations made between the per-step matrices pin freed heap chunks, and
/// over a few thousand epochs the process grows by hundreds of megabytes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub steps: Vec<TraceStep>,
    latent_dim: usize,
    /// Per-epoch latent minima, `latent_dim` values per epoch.
    range_min: Vec<f64>,
    range_max: Vec<f64>,
}

impl TrainTrace {
    fn with_capacity(latent_dim: usize, epochs: usize, steps: usize) -> Self {
        Self {
            steps: Vec::with_capacity(steps),
            latent_dim,
            range_min: Vec::with_capacity(epochs * latent_dim),
            range_max: Vec::with_capacity(epochs * latent_dim),
        }
    }

    pub fn last(&self) -> Option<&TraceStep> {
        self.steps.last()
    }

    /// Completed epochs.
    pub fn epoch_count(&self) -> usize {
        if self.latent_dim == 0 {
            0
        } else {
            self.range_min.len() / self.latent_dim
        }
    }

    /// Per-latent `(min, max)` over every batch of epoch `e`.
    pub fn epoch_range(&self, e: usize) -> Option<(&[f64], &[f64])> {
        let m = self.latent_dim;
        (e < self.epoch_count()).then(|| (&self.range_min[e * m..(e + 1) * m], &self.range_max[e * m..(e + 1) * m]))
    }

    fn open_epoch(&mut self) {
        let m = self.latent_dim;
        self.range_min.extend(core::iter::repeat(f64::INFINITY).take(m));
        self.range_max.extend(core::iter::repeat(f64::NEG_INFINITY).take(m));
    }

    fn absorb(&mut self, z: &Matrix) {
        let at = self.range_min.len() - self.latent_dim;
        let (lo, hi) = (&mut self.range_min[at..], &mut self.range_max[at..]);
        for r in 0..z.rows() {
            for (c, &v) in z.row(r).iter().enumerate() {
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
    }
}

/// Trains `model` on the rows of `data` for `cfg.epochs` epochs.
pub fn fit(model: &mut NashAe, data: &Matrix, cfg: &TrainConfig) -> Result<TrainTrace> {
    fit_with(model, data, cfg, |_, _, _| {})
}

/// [`fit`] with a callback invoked after every epoch with
/// `(epoch, model, trace)`.
pub fn fit_with(
    model: &mut NashAe,
    data: &Matrix,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, &NashAe, &TrainTrace),
) -> Result<TrainTrace> {
    cfg.validate()?;
    if data.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.cols() != model.config().input_dim {
        return Err(Error::Shape {
            op: "fit",
            left: data.shape(),
            right: (data.rows(), model.config().input_dim),
        });
    }
    let m = model.latent_dim();
    let mut shuffle_rng = rng::stream(cfg.seed, Purpose::Shuffle, 0);
    let mut order: Vec<usize> = (0..data.rows()).collect();
    let per_epoch = cfg.batches(&order).len();
    let mut trace = TrainTrace::with_capacity(m, cfg.epochs, cfg.epochs * per_epoch);
    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        trace.open_epoch();
        for batch in cfg.batches(&order) {
            let x = data.select_rows(&batch);
            let (record, z) = model.step_with_latents(&x)?;
            trace.absorb(&z);
            trace.steps.push(TraceStep {
                step: trace.steps.len(),
                epoch,
                record: StepSummary::from(&record),
            });
        }
        on_epoch(epoch, model, &trace);
    }
    Ok(trace)
}
