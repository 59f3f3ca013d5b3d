//! Synthetic beam-current waveforms: a chopped pulse train under an
//! exponential source ramp-up, with white noise.
//!
//! Two factors vary: the number of pulses in the window (categorical) and the
//! fraction of each period the chopper is open (continuous). Both change the
//! length of an individual "on" period, which is what makes the pair hard to
//! separate.

use alloc::vec;
use alloc::vec::Vec;


use crate::rng::{self, Purpose, Rng};
use crate::{Error, Matrix, Result};

/// Features whose standard deviation falls below this are only centered.
pub const MIN_STD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    /// Pulses per window, one category each.
    pub frequencies: Vec<u32>,
    pub duty_cycle_count: usize,
    /// Half-open sweep range `[lo, hi)` for the duty cycle.
    pub duty_cycle_range: (f64, f64),
    pub waveform_len: usize,
    /// Ramp-up time constant as a fraction of the window.
    pub ramp_tau: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            frequencies: vec![10, 15, 20],
            duty_cycle_count: 120,
            duty_cycle_range: (0.2, 0.8),
            waveform_len: 1000,
            ramp_tau: 0.05,
            noise_sigma: 0.01,
            seed: 0,
        }
    }
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.frequencies.is_empty() || self.frequencies.contains(&0) {
            return fail("frequencies must be a non-empty list of positive pulse counts");
        }
        if self.duty_cycle_count == 0 {
            return fail("duty_cycle_count must be positive");
        }
        let (lo, hi) = self.duty_cycle_range;
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return fail("duty_cycle_range must satisfy 0 < lo < hi <= 1");
        }
        if self.waveform_len == 0 {
            return fail("waveform_len must be positive");
        }
        if !(self.ramp_tau > 0.0) {
            return fail("ramp_tau must be positive");
        }
        if !(self.noise_sigma >= 0.0) {
            return fail("noise_sigma must be non-negative");
        }
        Ok(())
    }

    /// Uniform sweep `lo + (hi - lo) * j / count` for `j in 0..count`.
    pub fn duty_cycles(&self) -> Vec<f64> {
        let (lo, hi) = self.duty_cycle_range;
        let n = self.duty_cycle_count as f64;
        (0..self.duty_cycle_count).map(|j| lo + (hi - lo) * j as f64 / n).collect()
    }

    pub fn sample_count(&self) -> usize {
        self.frequencies.len() * self.duty_cycle_count
    }
}

/// One waveform sampled at `t = j / waveform_len`:
/// `(1 - exp(-t / ramp_tau)) * [frac(freq * t) < duty_cycle] + noise`.
///
/// `noise` of `None` gives the noiseless signal.
pub fn synthesize_waveform(
    freq: u32,
    duty_cycle: f64,
    cfg: &BeamConfig,
    noise: Option<&mut Rng>,
) -> Result<Vec<f64>> {
    if !(duty_cycle > 0.0 && duty_cycle < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "duty cycle must lie in (0, 1), got {duty_cycle}"
        )));
    }
    if freq == 0 {
        return Err(Error::InvalidArgument("frequency must be at least 1".into()));
    }
    let len = cfg.waveform_len;
    let mut w: Vec<f64> = (0..len)
        .map(|j| {
            let t = j as f64 / len as f64;
            // Exact phase: frac(freq * j / len) as an integer remainder.
            let phase = ((u64::from(freq) * j as u64) % len as u64) as f64 / len as f64;
            let pulse = if phase < duty_cycle { 1.0 } else { 0.0 };
            envelope(t, cfg.ramp_tau) * pulse
        })
        .collect();
    if let Some(rng) = noise {
        if cfg.noise_sigma > 0.0 {
            for v in &mut w {
                *v += rng::normal(rng, cfg.noise_sigma);
            }
        }
    }
    Ok(w)
}

/// Source ramp-up `1 - exp(-t / tau)`.
pub fn envelope(t: f64, tau: f64) -> f64 {
    -libm::expm1(-t / tau)
}

/// Per-feature mean/std standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    /// Column means and population standard deviations of `data`.
    pub fn fit(data: &Matrix) -> Self {
        let (rows, cols) = data.shape();
        let n = rows.max(1) as f64;
        let mut mean = vec![0.0; cols];
        for r in 0..rows {
            for (m, v) in mean.iter_mut().zip(data.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for r in 0..rows {
            for ((s, v), m) in var.iter_mut().zip(data.row(r)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|s| libm::sqrt(s / n)).collect();
        Self { mean, std }
    }

    fn scale(&self, c: usize) -> f64 {
        if self.std[c] < MIN_STD {
            1.0
        } else {
            self.std[c]
        }
    }

    pub fn apply(&self, data: &mut Matrix) -> Result<()> {
        self.check(data)?;
        for r in 0..data.rows() {
            for (c, v) in data.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / self.scale(c);
            }
        }
        Ok(())
    }

    pub fn invert(&self, data: &mut Matrix) -> Result<()> {
        self.check(data)?;
        for r in 0..data.rows() {
            for (c, v) in data.row_mut(r).iter_mut().enumerate() {
                *v = *v * self.scale(c) + self.mean[c];
            }
        }
        Ok(())
    }

    fn check(&self, data: &Matrix) -> Result<()> {
        if data.cols() != self.mean.len() || self.std.len() != self.mean.len() {
            return Err(Error::Shape {
                op: "normalization",
                left: data.shape(),
                right: (1, self.mean.len()),
            });
        }
        Ok(())
    }
}

/// The full frequency x duty-cycle grid, standardized per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamDataset {
    /// Normalized waveforms, one per row, frequency-major.
    pub samples: Matrix,
    /// Index into `frequencies` for each row.
    pub freq_index: Vec<usize>,
    pub frequencies: Vec<u32>,
    pub duty_cycle: Vec<f64>,
    pub norm: Normalization,
}

impl BeamDataset {
    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.rows() == 0
    }

    pub fn frequency(&self, row: usize) -> u32 {
        self.frequencies[self.freq_index[row]]
    }

    /// Waveforms in their original amplitude scale.
    pub fn denormalized(&self) -> Matrix {
        let mut raw = self.samples.clone();
        self.norm.invert(&mut raw).expect("stored statistics match the samples");
        raw
    }

    /// Generative factors per row: `[frequency index, duty cycle]`.
    pub fn factor_table(&self) -> Vec<[f64; 2]> {
        self.freq_index
            .iter()
            .zip(&self.duty_cycle)
            .map(|(&f, &d)| [f as f64, d])
            .collect()
    }

    /// Coarse binary attributes for diagnostics: `frequency >= median
    /// category` and `duty cycle >= 0.5`.
    pub fn binary_attributes(&self) -> Vec<Vec<bool>> {
        let split = self.frequencies.len() / 2;
        self.freq_index
            .iter()
            .zip(&self.duty_cycle)
            .map(|(&f, &d)| vec![f >= split, d >= 0.5])
            .collect()
    }
}

/// Generates every (frequency, duty cycle) combination, frequency-major, then
/// standardizes each time step across the dataset. Row `r` draws its noise
/// from substream `r` of the seed's `Noise` stream.
pub fn generate_dataset(cfg: &BeamConfig) -> Result<BeamDataset> {
    cfg.validate()?;
    let duties = cfg.duty_cycles();
    let rows = cfg.sample_count();
    let mut data = Vec::with_capacity(rows * cfg.waveform_len);
    let mut freq_index = Vec::with_capacity(rows);
    let mut duty_cycle = Vec::with_capacity(rows);
    for (fi, &freq) in cfg.frequencies.iter().enumerate() {
        for &dc in &duties {
            let row = freq_index.len() as u32;
            let mut noise = rng::stream(cfg.seed, Purpose::Noise, row);
            data.extend(synthesize_waveform(freq, dc, cfg, Some(&mut noise))?);
            freq_index.push(fi);
            duty_cycle.push(dc);
        }
    }
    let mut samples = Matrix::from_vec(rows, cfg.waveform_len, data)?;
    let norm = Normalization::fit(&samples);
    norm.apply(&mut samples)?;
    Ok(BeamDataset {
        samples,
        freq_index,
        frequencies: cfg.frequencies.clone(),
        duty_cycle,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> BeamConfig {
        BeamConfig {
            noise_sigma: 0.0,
            ..BeamConfig::default()
        }
    }

    /// Lengths of maximal runs of strictly positive samples.
    fn on_runs(w: &[f64]) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut cur = 0;
        for &v in w {
            if v > 0.0 {
                cur += 1;
            } else if cur > 0 {
                runs.push(cur);
                cur = 0;
            }
        }
        if cur > 0 {
            runs.push(cur);
        }
        runs
    }

    #[test]
    fn saturated_duty_cycle_is_the_envelope() {
        let cfg = noiseless();
        let w = synthesize_waveform(10, 0.999_999, &cfg, None).unwrap();
        for (j, v) in w.iter().enumerate() {
            assert_eq!(*v, envelope(j as f64 / 1000.0, 0.05));
        }
    }

    #[test]
    fn ten_pulses_fifty_samples_wide() {
        let w = synthesize_waveform(10, 0.5, &noiseless(), None).unwrap();
        let runs = on_runs(&w);
        assert_eq!(runs.len(), 10);
        // The very first sample sits at t = 0 where the envelope is exactly 0.
        assert!(runs.iter().all(|&r| (49..=51).contains(&r)), "{runs:?}");
    }

    #[test]
    fn on_fraction_tracks_duty_cycle() {
        let cfg = noiseless();
        for &freq in &cfg.frequencies {
            for dc in [0.2, 0.205, 0.37, 0.5, 0.61, 0.795] {
                let w = synthesize_waveform(freq, dc, &cfg, None).unwrap();
                let (mut on, mut total) = (0usize, 0usize);
                for (j, v) in w.iter().enumerate() {
                    let env = envelope(j as f64 / 1000.0, cfg.ramp_tau);
                    if env > 0.0 {
                        total += 1;
                        on += usize::from(v / env > 0.5);
                    }
                }
                let frac = on as f64 / total as f64;
                // At most one sample of rounding per pulse, plus the dropped t = 0 sample.
                let bound = (f64::from(freq) + 1.0) / 1000.0;
                assert!((frac - dc).abs() <= bound, "freq {freq} dc {dc}: {frac}");
            }
        }
    }

    #[test]
    fn per_pulse_width_entangles_the_factors() {
        let cfg = noiseless();
        let slow = on_runs(&synthesize_waveform(10, 0.4, &cfg, None).unwrap());
        let fast = on_runs(&synthesize_waveform(20, 0.8, &cfg, None).unwrap());
        // Skip the first pulse, clipped by the zero envelope at t = 0.
        assert_eq!(slow[1], 40);
        assert_eq!(fast[1], 40);
    }

    #[test]
    fn invalid_arguments() {
        let cfg = noiseless();
        assert!(synthesize_waveform(10, 0.0, &cfg, None).is_err());
        assert!(synthesize_waveform(10, 1.0, &cfg, None).is_err());
        assert!(synthesize_waveform(0, 0.5, &cfg, None).is_err());
    }

    #[test]
    fn default_dataset_shape_and_labels() {
        let ds = generate_dataset(&BeamConfig::default()).unwrap();
        assert_eq!(ds.samples.shape(), (360, 1000));
        for r in 0..360 {
            assert_eq!(ds.freq_index[r], r / 120);
            let expected = 0.2 + 0.6 * (r % 120) as f64 / 120.0;
            assert!((ds.duty_cycle[r] - expected).abs() < 1e-15);
        }
        let mut pairs: Vec<(usize, u64)> =
            ds.freq_index.iter().zip(&ds.duty_cycle).map(|(&f, d)| (f, d.to_bits())).collect();
        pairs.sort_unstable();
        pairs.dedup();
        assert_eq!(pairs.len(), 360);
    }

    #[test]
    fn dataset_is_seeded() {
        let cfg = BeamConfig {
            duty_cycle_count: 8,
            waveform_len: 64,
            ..BeamConfig::default()
        };
        let a = generate_dataset(&cfg).unwrap();
        assert_eq!(a, generate_dataset(&cfg).unwrap());
        let b = generate_dataset(&BeamConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.samples, b.samples);
    }

    #[test]
    fn normalized_columns_are_standard() {
        let ds = generate_dataset(&BeamConfig::default()).unwrap();
        let fresh = Normalization::fit(&ds.samples);
        for c in 0..1000 {
            assert!(fresh.mean[c].abs() < 1e-9);
            if ds.norm.std[c] > MIN_STD {
                assert!((fresh.std[c] - 1.0).abs() < 1e-9);
            }
        }
        let raw = ds.denormalized();
        let mut again = raw.clone();
        ds.norm.apply(&mut again).unwrap();
        assert!(again.max_abs_diff(&ds.samples) < 1e-9);
    }

    #[test]
    fn constant_feature_is_only_centered() {
        let mut m = Matrix::from_rows(&[[3.0, 1.0], [3.0, 2.0], [3.0, 6.0]]).unwrap();
        let norm = Normalization::fit(&m);
        let orig = m.clone();
        norm.apply(&mut m).unwrap();
        assert_eq!(m.col(0), vec![0.0, 0.0, 0.0]);
        norm.invert(&mut m).unwrap();
        assert!(m.max_abs_diff(&orig) < 1e-12);
    }
}
