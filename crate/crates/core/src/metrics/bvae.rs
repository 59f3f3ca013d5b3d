//! Pair-difference classifier score (the β-VAE disentanglement metric).
//!
//! A batch fixes one generative factor, draws pairs of samples that share its
//! value, and summarizes the batch as the mean absolute latent difference.
//! A linear softmax classifier then has to name the fixed factor from that
//! summary.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::rng::{self, Purpose, Rng};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvaeConfig {
    /// Sample pairs averaged into one feature vector.
    pub pairs_per_batch: usize,
    /// Classifier updates; each uses `classifier_batch` fresh feature vectors.
    pub train_steps: usize,
    pub classifier_batch: usize,
    /// Feature vectors scored for the reported accuracy.
    pub eval_batches: usize,
    pub learning_rate: f64,
    /// Learning rate over the final `final_fraction` of updates.
    pub final_learning_rate: f64,
    pub final_fraction: f64,
    pub seed: u64,
}

impl Default for BvaeConfig {
    fn default() -> Self {
        Self {
            pairs_per_batch: 100,
            train_steps: 1000,
            classifier_batch: 100,
            eval_batches: 1000,
            learning_rate: 1.0,
            final_learning_rate: 0.05,
            final_fraction: 0.05,
            seed: 0,
        }
    }
}

/// Maps arbitrary factor values to dense category indices (sorted order).
pub fn discretize(values: &[f64]) -> Vec<usize> {
    let mut uniq: Vec<f64> = values.to_vec();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup();
    values
        .iter()
        .map(|v| uniq.binary_search_by(|u| u.total_cmp(v)).expect("value present"))
        .collect()
}

/// Rows grouped by value, per factor: `groups[f][v]` lists the rows where
/// factor `f` takes its `v`-th value.
struct FactorGroups {
    groups: Vec<Vec<Vec<usize>>>,
}

impl FactorGroups {
    fn new(factors: &[Vec<usize>]) -> Result<Self> {
        let n_factors = factors.first().map_or(0, Vec::len);
        if n_factors < 2 {
            return Err(Error::InvalidArgument("at least two generative factors are needed".into()));
        }
        let mut groups = vec![Vec::new(); n_factors];
        for (row, vals) in factors.iter().enumerate() {
            if vals.len() != n_factors {
                return Err(Error::InvalidArgument("factor rows differ in length".into()));
            }
            for (f, &v) in vals.iter().enumerate() {
                let g: &mut Vec<Vec<usize>> = &mut groups[f];
                if g.len() <= v {
                    g.resize(v + 1, Vec::new());
                }
                g[v].push(row);
            }
        }
        for g in &mut groups {
            g.retain(|rows| !rows.is_empty());
        }
        if let Some(f) = groups.iter().position(|g| g.len() < 2) {
            return Err(Error::InvalidArgument(alloc::format!(
                "factor {f} takes a single value and cannot be held fixed"
            )));
        }
        Ok(Self { groups })
    }

    fn factor_count(&self) -> usize {
        self.groups.len()
    }

    /// One feature vector: mean |z1 - z2| over pairs sharing factor `f`.
    fn feature(&self, latents: &Matrix, f: usize, pairs: usize, rng: &mut Rng) -> Vec<f64> {
        let values = &self.groups[f];
        let mut acc = vec![0.0; latents.cols()];
        for _ in 0..pairs {
            let rows = &values[rng.gen_range(0..values.len())];
            let a = latents.row(rows[rng.gen_range(0..rows.len())]);
            let b = latents.row(rows[rng.gen_range(0..rows.len())]);
            for ((s, x), y) in acc.iter_mut().zip(a).zip(b) {
                *s += (x - y).abs();
            }
        }
        acc.iter_mut().for_each(|s| *s /= pairs as f64);
        acc
    }

    fn labeled_feature(&self, latents: &Matrix, pairs: usize, rng: &mut Rng) -> (Vec<f64>, usize) {
        let f = rng.gen_range(0..self.factor_count());
        (self.feature(latents, f, pairs, rng), f)
    }
}

/// Softmax regression `classes x inputs`.
struct LinearClassifier {
    weights: Matrix,
    bias: Vec<f64>,
}

impl LinearClassifier {
    /// Kaiming normal weights, zero bias.
    fn new(inputs: usize, classes: usize, rng: &mut Rng) -> Self {
        let std = libm::sqrt(2.0 / inputs.max(1) as f64);
        let mut weights = Matrix::zeros(classes, inputs);
        for w in weights.as_mut_slice() {
            *w = rng::normal(rng, std);
        }
        Self {
            weights,
            bias: vec![0.0; classes],
        }
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.bias.len())
            .map(|c| self.bias[c] + self.weights.row(c).iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    fn predict(&self, x: &[f64]) -> usize {
        let l = self.logits(x);
        let mut best = 0;
        for (c, &v) in l.iter().enumerate() {
            if v > l[best] {
                best = c;
            }
        }
        best
    }

    /// One step of gradient descent on the mean cross-entropy of a batch.
    fn sgd_step(&mut self, batch: &[(Vec<f64>, usize)], lr: f64) {
        let mut gw = Matrix::zeros(self.weights.rows(), self.weights.cols());
        let mut gb = vec![0.0; self.bias.len()];
        for (x, y) in batch {
            let l = self.logits(x);
            let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = l.iter().map(|v| libm::exp(v - max)).collect();
            let z: f64 = e.iter().sum();
            for c in 0..e.len() {
                let d = e[c] / z - if c == *y { 1.0 } else { 0.0 };
                gb[c] += d;
                for (g, v) in gw.row_mut(c).iter_mut().zip(x) {
                    *g += d * v;
                }
            }
        }
        let scale = lr / batch.len() as f64;
        self.weights.add_scaled(-scale, &gw).expect("same shape");
        for (b, g) in self.bias.iter_mut().zip(&gb) {
            *b -= scale * g;
        }
    }
}

/// Classifier accuracy in `[0, 1]` at identifying the fixed factor.
///
/// `latents` holds the encoding of every dataset row; `factors[row]` gives
/// that row's discrete value index for each generative factor.
pub fn beta_vae_score(latents: &Matrix, factors: &[Vec<usize>], cfg: &BvaeConfig) -> Result<f64> {
    if latents.rows() != factors.len() {
        return Err(Error::Shape {
            op: "beta_vae_score",
            left: latents.shape(),
            right: (factors.len(), 0),
        });
    }
    if latents.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if cfg.pairs_per_batch == 0 || cfg.classifier_batch == 0 || cfg.eval_batches == 0 {
        return Err(Error::InvalidConfig("pair, batch and evaluation counts must be positive".into()));
    }
    let groups = FactorGroups::new(factors)?;
    let mut rng = rng::stream(cfg.seed, Purpose::Metric, 0);
    let mut clf = LinearClassifier::new(latents.cols(), groups.factor_count(), &mut rng);

    let final_from = cfg.train_steps - libm::round(cfg.train_steps as f64 * cfg.final_fraction.clamp(0.0, 1.0)) as usize;
    for step in 0..cfg.train_steps {
        let batch: Vec<(Vec<f64>, usize)> = (0..cfg.classifier_batch)
            .map(|_| groups.labeled_feature(latents, cfg.pairs_per_batch, &mut rng))
            .collect();
        let lr = if step >= final_from {
            cfg.final_learning_rate
        } else {
            cfg.learning_rate
        };
        clf.sgd_step(&batch, lr);
    }

    let mut eval_rng = rng::stream(cfg.seed, Purpose::Metric, 1);
    let correct = (0..cfg.eval_batches)
        .filter(|_| {
            let (x, y) = groups.labeled_feature(latents, cfg.pairs_per_batch, &mut eval_rng);
            clf.predict(&x) == y
        })
        .count();
    Ok(correct as f64 / cfg.eval_batches as f64)
}
