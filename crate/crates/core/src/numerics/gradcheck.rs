//! Central finite-difference gradient checking.

use alloc::vec::Vec;

use crate::{Error, Matrix, Mlp, Result};

/// Gradients smaller than this are compared in absolute rather than relative
/// terms; below it central differences are dominated by rounding.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest relative error over all checked parameters.
    pub max_rel_error: f64,
    /// Parameter index where it occurred.
    pub worst_index: usize,
    pub checked: usize,
}

/// `|a - f| / max(|a|, |f|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Compares `analytic` to `(L(θ + h e_i) - L(θ - h e_i)) / 2h` for every
/// coordinate of `theta`.
pub fn check_against_central_differences(
    theta: &[f64],
    analytic: &[f64],
    h: f64,
    mut loss_at: impl FnMut(&[f64]) -> f64,
) -> Result<GradCheck> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("step h must be positive, got {h}")));
    }
    if theta.len() != analytic.len() {
        return Err(Error::Shape {
            op: "gradient_check",
            left: (theta.len(), 1),
            right: (analytic.len(), 1),
        });
    }
    let mut probe: Vec<f64> = theta.to_vec();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst_index: 0,
        checked: theta.len(),
    };
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let plus = loss_at(&probe);
        probe[i] = theta[i] - h;
        let minus = loss_at(&probe);
        probe[i] = theta[i];
        let numeric = (plus - minus) / (2.0 * h);
        let err = relative_error(analytic[i], numeric);
        if err > report.max_rel_error || err.is_nan() {
            report.max_rel_error = err;
            report.worst_index = i;
        }
    }
    Ok(report)
}

/// Checks the backward pass of `net` for a loss of its output.
///
/// `loss` maps a network output to `(L, dL/d output)`. The network's
/// parameters are restored before returning; accumulated gradients are left
/// cleared.
pub fn gradient_check<F>(net: &mut Mlp, loss: F, input: &Matrix, h: f64) -> Result<GradCheck>
where
    F: Fn(&Matrix) -> (f64, Matrix),
{
    net.zero_grad();
    let out = net.forward(input)?;
    let (_, grad_out) = loss(&out);
    net.backward(&grad_out)?;
    let analytic = net.flat_grads();
    net.zero_grad();
    let theta = net.flat_params();
    let mut probe_net = net.clone();
    let report = check_against_central_differences(&theta, &analytic, h, |p| {
        probe_net.set_flat_params(p).expect("same parameter count");
        let out = probe_net.predict(input).expect("shapes already validated");
        loss(&out).0
    })?;
    Ok(report)
}
