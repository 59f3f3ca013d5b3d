use alloc::vec::Vec;

use crate::{Error, Matrix, Result};

/// Below this total sum of squares a latent counts as dead and scores 0.
pub const DEAD_LATENT_SS: f64 = 1e-12;

/// Coefficient of determination `1 - SS_res / SS_tot` of each column of
/// `z_pred` as a prediction of the same column of `z`.
pub fn r_squared_per_latent(z: &Matrix, z_pred: &Matrix) -> Result<Vec<f64>> {
    z.check_same(z_pred, "r_squared_per_latent")?;
    if z.rows() < 2 {
        return Err(Error::DegenerateBatch(z.rows()));
    }
    let k = z.rows() as f64;
    Ok((0..z.cols())
        .map(|c| {
            let truth = z.col(c);
            let pred = z_pred.col(c);
            let mean = truth.iter().sum::<f64>() / k;
            let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
            if ss_tot < DEAD_LATENT_SS {
                return 0.0;
            }
            let ss_res: f64 = truth.iter().zip(&pred).map(|(t, p)| (t - p) * (t - p)).sum();
            1.0 - ss_res / ss_tot
        })
        .collect())
}

/// Mean of [`r_squared_per_latent`].
pub fn mean_r_squared(z: &Matrix, z_pred: &Matrix) -> Result<f64> {
    let r2 = r_squared_per_latent(z, z_pred)?;
    Ok(r2.iter().sum::<f64>() / r2.len().max(1) as f64)
}
