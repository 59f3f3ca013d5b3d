//! Two-latent, one-attribute tables with a known amount of disentanglement.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::tad::LatentTable;
use crate::rng::{self, Purpose};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTad {
    /// Class-conditional means are `+mu` / `-mu`.
    pub mu: f64,
    /// Correlation in `[-1, 1]` between the attribute and the second latent's
    /// class.
    pub r: f64,
    pub samples: usize,
    /// Probability that the attribute is true.
    pub positive_rate: f64,
    pub seed: u64,
}

impl SyntheticTad {
    pub fn balanced(mu: f64, r: f64, samples: usize, seed: u64) -> Self {
        Self {
            mu,
            r,
            samples,
            positive_rate: 0.5,
            seed,
        }
    }
}

/// Draws the table:
///
/// - `c ~ Bernoulli(positive_rate)`;
/// - `z_alpha | c ~ N(+mu, 1)` if `c` else `N(-mu, 1)`;
/// - `c_beta` copies `c` with probability `(1 + r) / 2` and is its negation
///   otherwise, so `corr(c, c_beta) = r` for balanced classes;
/// - `z_beta | c_beta` is distributed like `z_alpha | c`.
pub fn synthetic_tad_table(p: &SyntheticTad) -> Result<LatentTable> {
    if !(-1.0..=1.0).contains(&p.r) || !(p.positive_rate > 0.0 && p.positive_rate < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "need r in [-1, 1] and positive_rate in (0, 1), got r={} rate={}",
            p.r,
            p.positive_rate
        )));
    }
    let mut rng = rng::stream(p.seed, Purpose::Synthetic, 0);
    let agree = (1.0 + p.r) / 2.0;
    let mut latents = Vec::with_capacity(p.samples * 2);
    let mut attrs = Vec::with_capacity(p.samples);
    for _ in 0..p.samples {
        let c = rng.gen_bool(p.positive_rate);
        let c_beta = if rng.gen_bool(agree) { c } else { !c };
        let shift = |b: bool| if b { p.mu } else { -p.mu };
        let na = rng::standard_normal(&mut rng);
        let nb = rng::standard_normal(&mut rng);
        latents.push(shift(c) + na);
        latents.push(shift(c_beta) + nb);
        attrs.push(vec![c]);
    }
    LatentTable::new(Matrix::from_vec(p.samples, 2, latents)?).with_attributes(attrs)
}
