//! Reconstruction, predictor, covariance and combined losses, each paired with
//! its gradient.

use alloc::vec::Vec;

use crate::{Error, Matrix, Result};

/// Copy of `z` with latent column `i` set to zero.
pub fn mask_latent(z: &Matrix, i: usize) -> Result<Matrix> {
    if i >= z.cols() {
        return Err(Error::IndexOutOfRange { index: i, len: z.cols() });
    }
    let mut out = z.clone();
    for r in 0..out.rows() {
        out[(r, i)] = 0.0;
    }
    Ok(out)
}

/// `1/(2n) * mean_batch ||x' - x||²` for `n` features.
pub fn reconstruction_loss(x: &Matrix, x_rec: &Matrix) -> Result<f64> {
    x.check_same(x_rec, "reconstruction_loss")?;
    let (k, n) = x.shape();
    let sse: f64 = x
        .as_slice()
        .iter()
        .zip(x_rec.as_slice())
        .map(|(a, b)| (b - a) * (b - a))
        .sum();
    Ok(sse / (2.0 * n as f64 * k as f64))
}

/// Gradient of [`reconstruction_loss`] with respect to `x_rec`.
pub fn reconstruction_grad(x: &Matrix, x_rec: &Matrix) -> Result<Matrix> {
    x.check_same(x_rec, "reconstruction_grad")?;
    let (k, n) = x.shape();
    let scale = 1.0 / (n as f64 * k as f64);
    let mut g = x_rec.clone();
    for (gv, xv) in g.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *gv = (*gv - xv) * scale;
    }
    Ok(g)
}

/// `1/2 * mean((pred - target)²)`.
pub fn predictor_loss(target: &[f64], pred: &[f64]) -> Result<f64> {
    check_len(target, pred, "predictor_loss")?;
    let k = target.len() as f64;
    Ok(target.iter().zip(pred).map(|(t, p)| (p - t) * (p - t)).sum::<f64>() / (2.0 * k))
}

/// Gradient of [`predictor_loss`] with respect to `pred`.
pub fn predictor_grad(target: &[f64], pred: &[f64]) -> Result<Vec<f64>> {
    check_len(target, pred, "predictor_grad")?;
    let k = target.len() as f64;
    Ok(target.iter().zip(pred).map(|(t, p)| (p - t) / k).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population covariance `1/K * Σ (a - ā)(b - b̄)` with empirical batch means.
pub fn batch_covariance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, b, "batch_covariance")?;
    if a.len() < 2 {
        return Err(Error::DegenerateBatch(a.len()));
    }
    let (ma, mb) = (mean(a), mean(b));
    Ok(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64)
}

/// Gradient of `Cov(other, b)` with respect to each `b_q`: `(other_q - mean) / K`.
///
/// The batch means depend on `b` too, but their contribution cancels because
/// the centered `other` sums to zero.
pub fn covariance_grad(other: &[f64]) -> Result<Vec<f64>> {
    if other.len() < 2 {
        return Err(Error::DegenerateBatch(other.len()));
    }
    let m = mean(other);
    let k = other.len() as f64;
    Ok(other.iter().map(|v| (v - m) / k).collect())
}

/// `Σ_i Cov(z'_i, z_i)` over latent columns.
pub fn adversarial_loss(z: &Matrix, z_pred: &Matrix) -> Result<f64> {
    z.check_same(z_pred, "adversarial_loss")?;
    (0..z.cols()).map(|i| batch_covariance(&z_pred.col(i), &z.col(i))).sum()
}

/// Gradient of [`adversarial_loss`] with respect to `z_pred`, with `z` held
/// constant.
pub fn adversarial_grad(z: &Matrix) -> Result<Matrix> {
    if z.rows() < 2 {
        return Err(Error::DegenerateBatch(z.rows()));
    }
    let mut g = Matrix::zeros(z.rows(), z.cols());
    for i in 0..z.cols() {
        g.set_col(i, &covariance_grad(&z.col(i))?);
    }
    Ok(g)
}

/// `(1 - λ) L_R + λ L_A` for `λ ∈ [0, 1)`.
pub fn combined_ae_loss(recon: f64, adversarial: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((1.0 - lambda) * recon + lambda * adversarial)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(alloc::format!("lambda must lie in [0, 1), got {lambda}")))
    }
}

fn check_len(a: &[f64], b: &[f64], op: &'static str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            op,
            left: (a.len(), 1),
            right: (b.len(), 1),
        });
    }
    Ok(())
}
