use alloc::vec;
use alloc::vec::Vec;

use super::matrix::gemm;
use crate::{Activation, Error, Matrix, Result};

#[derive(Debug, Clone)]
struct Cache {
    input: Matrix,
    pre: Matrix,
}

/// Fully connected layer `activation(x W^T + b)` with its own gradient
/// accumulators and Adam moments.
///
/// Weights are `(out, in)`; a batch is one sample per row.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
    grad_w: Matrix,
    grad_b: Vec<f64>,
    pub(crate) m_w: Matrix,
    pub(crate) m_b: Vec<f64>,
    pub(crate) v_w: Matrix,
    pub(crate) v_b: Vec<f64>,
    cache: Option<Cache>,
}

impl DenseLayer {
    /// Zero-initialized layer.
    pub fn new(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            weights: Matrix::zeros(output, input),
            bias: vec![0.0; output],
            activation,
            grad_w: Matrix::zeros(output, input),
            grad_b: vec![0.0; output],
            m_w: Matrix::zeros(output, input),
            m_b: vec![0.0; output],
            v_w: Matrix::zeros(output, input),
            v_b: vec![0.0; output],
            cache: None,
        }
    }

    /// Rebuilds a layer from stored parameters and optimizer moments.
    ///
    /// `moments` is `(m_w, m_b, v_w, v_b)`; `None` means fresh zeros.
    pub fn from_parts(
        weights: Matrix,
        bias: Vec<f64>,
        activation: Activation,
        moments: Option<(Matrix, Vec<f64>, Matrix, Vec<f64>)>,
    ) -> Result<Self> {
        let (out, inp) = weights.shape();
        if bias.len() != out {
            return Err(Error::Shape {
                op: "layer bias",
                left: (out, inp),
                right: (bias.len(), 1),
            });
        }
        let mut layer = Self::new(inp, out, activation);
        layer.weights = weights;
        layer.bias = bias;
        if let Some((m_w, m_b, v_w, v_b)) = moments {
            if m_w.shape() != (out, inp)
                || v_w.shape() != (out, inp)
                || m_b.len() != out
                || v_b.len() != out
            {
                return Err(Error::Shape {
                    op: "layer moments",
                    left: (out, inp),
                    right: m_w.shape(),
                });
            }
            layer.m_w = m_w;
            layer.m_b = m_b;
            layer.v_w = v_w;
            layer.v_b = v_b;
        }
        Ok(layer)
    }

    pub fn input_size(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_size(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn grad_weights(&self) -> &Matrix {
        &self.grad_w
    }

    pub fn grad_bias(&self) -> &[f64] {
        &self.grad_b
    }

    /// Adam moments as `(m_w, m_b, v_w, v_b)`.
    pub fn moments(&self) -> (&Matrix, &[f64], &Matrix, &[f64]) {
        (&self.m_w, &self.m_b, &self.v_w, &self.v_b)
    }

    pub fn param_count(&self) -> usize {
        self.weights.as_slice().len() + self.bias.len()
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.input_size() {
            return Err(Error::Shape {
                op: "dense forward",
                left: input.shape(),
                right: (self.input_size(), self.output_size()),
            });
        }
        Ok(())
    }

    fn affine(&self, input: &Matrix) -> Matrix {
        let mut pre = Matrix::zeros(input.rows(), self.output_size());
        for r in 0..input.rows() {
            pre.row_mut(r).copy_from_slice(&self.bias);
        }
        gemm(1.0, input, false, &self.weights, true, 1.0, &mut pre);
        pre
    }

    /// Forward pass that caches what the backward pass needs.
    pub fn forward(&mut self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let pre = self.affine(input);
        let out = self.activation.forward(&pre);
        self.cache = Some(Cache {
            input: input.clone(),
            pre,
        });
        Ok(out)
    }

    /// Forward pass without touching the cache.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        Ok(self.activation.forward(&self.affine(input)))
    }

    /// Backpropagates `upstream` (dL/d output), adding dL/dW and dL/db to the
    /// accumulators. Returns dL/d input when `want_input` is set.
    pub(crate) fn backward(&mut self, upstream: &Matrix, want_input: bool) -> Result<Option<Matrix>> {
        let cache = self.cache.take().ok_or(Error::MissingCache)?;
        let dpre = match self.activation.backward(&cache.pre, upstream) {
            Ok(d) => d,
            Err(e) => {
                self.cache = Some(cache);
                return Err(e);
            }
        };
        gemm(1.0, &dpre, true, &cache.input, false, 1.0, &mut self.grad_w);
        for r in 0..dpre.rows() {
            for (gb, d) in self.grad_b.iter_mut().zip(dpre.row(r)) {
                *gb += d;
            }
        }
        self.cache = Some(cache);
        Ok(want_input.then(|| self.input_grad_from(&dpre)))
    }

    /// dL/d input with parameters treated as constants; accumulators untouched.
    pub(crate) fn backward_frozen(&self, upstream: &Matrix) -> Result<Matrix> {
        let cache = self.cache.as_ref().ok_or(Error::MissingCache)?;
        let dpre = self.activation.backward(&cache.pre, upstream)?;
        Ok(self.input_grad_from(&dpre))
    }

    fn input_grad_from(&self, dpre: &Matrix) -> Matrix {
        let mut dx = Matrix::zeros(dpre.rows(), self.input_size());
        gemm(1.0, dpre, false, &self.weights, false, 0.0, &mut dx);
        dx
    }

    pub(crate) fn zero_grad(&mut self) {
        self.grad_w.as_mut_slice().fill(0.0);
        self.grad_b.fill(0.0);
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }

    pub(crate) fn params_and_grads_mut(
        &mut self,
    ) -> [(&mut [f64], &[f64], &mut [f64], &mut [f64]); 2] {
        [
            (
                self.weights.as_mut_slice(),
                self.grad_w.as_slice(),
                self.m_w.as_mut_slice(),
                self.v_w.as_mut_slice(),
            ),
            (&mut self.bias, &self.grad_b, &mut self.m_b, &mut self.v_b),
        ]
    }
}
