//! Seeded random streams.
//!
//! A single master seed fans out into independent ChaCha streams, one per
//! purpose, so that changing (say) the shuffling order leaves initialization
//! and dataset noise untouched.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    Init = 1,
    Shuffle = 2,
    Noise = 3,
    Metric = 4,
    Synthetic = 5,
}

/// Independent stream for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u32) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | u64::from(index));
    rng
}

/// One draw from N(0, 1) by the Marsaglia polar method.
///
/// All float math goes through `libm`, so the draws are bit-identical in every
/// build of the crate. Samplers whose transcendental functions depend on
/// which `std` features happen to be unified into the build are not.
pub fn standard_normal(rng: &mut Rng) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * libm::sqrt(-2.0 * libm::log(s) / s);
        }
    }
}

/// One draw from N(0, std²).
pub fn normal(rng: &mut Rng, std: f64) -> f64 {
    std * standard_normal(rng)
}
