use crate::{Matrix, Result};

/// SELU negative-branch scale (Klambauer et al., 2017).
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;
/// SELU output scale.
pub const SELU_SCALE: f64 = 1.050_700_987_355_480_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Sigmoid,
    Selu,
    Relu,
}

impl Activation {
    /// Stable one-byte tag used by the checkpoint format.
    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Sigmoid => 1,
            Activation::Selu => 2,
            Activation::Relu => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Activation::Identity,
            1 => Activation::Sigmoid,
            2 => Activation::Selu,
            3 => Activation::Relu,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Sigmoid => "sigmoid",
            Activation::Selu => "selu",
            Activation::Relu => "relu",
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Sigmoid => sigmoid(x),
            Activation::Selu => {
                if x > 0.0 {
                    SELU_SCALE * x
                } else {
                    SELU_SCALE * SELU_ALPHA * libm::expm1(x)
                }
            }
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative with respect to the pre-activation.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Selu => {
                if x > 0.0 {
                    SELU_SCALE
                } else {
                    SELU_SCALE * SELU_ALPHA * libm::exp(x)
                }
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn forward(self, pre: &Matrix) -> Matrix {
        pre.map(|x| self.apply(x))
    }

    /// Elementwise `derivative(pre) * upstream`.
    pub fn backward(self, pre: &Matrix, upstream: &Matrix) -> Result<Matrix> {
        pre.check_same(upstream, "activation_backward")?;
        let mut out = upstream.clone();
        if self != Activation::Identity {
            for (g, &x) in out.as_mut_slice().iter_mut().zip(pre.as_slice()) {
                *g *= self.derivative(x);
            }
        }
        Ok(out)
    }
}

/// Logistic function, evaluated without overflow for large `|x|`.
///
/// In `f64` the result rounds to exactly 1.0 above `x ≈ 36.7` and to 0.0
/// below `x ≈ -745`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}
