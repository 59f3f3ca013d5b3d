use alloc::vec::Vec;

use crate::Matrix;

/// A latent whose range over the data reaches this is counted as learned.
pub const LEARNED_RANGE: f64 = 0.2;

/// Per-column minimum and maximum.
pub fn latent_ranges(z: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let mut lo = alloc::vec![f64::INFINITY; z.cols()];
    let mut hi = alloc::vec![f64::NEG_INFINITY; z.cols()];
    for r in 0..z.rows() {
        for (c, &v) in z.row(r).iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    (lo, hi)
}

/// Number of latents with `max - min >= threshold` (inclusive).
pub fn count_learned_latents(min: &[f64], max: &[f64], threshold: f64) -> usize {
    min.iter().zip(max).filter(|(lo, hi)| *hi - *lo >= threshold).count()
}
