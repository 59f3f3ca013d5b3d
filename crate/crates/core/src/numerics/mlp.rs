use alloc::vec::Vec;

use rand::Rng as _;

use super::adam::AdamConfig;
use crate::rng::{self, Purpose, Rng};
use crate::{Activation, DenseLayer, Error, Matrix, Result};

/// Feed-forward stack of dense layers trained with Adam.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
    step_count: u64,
    has_grad: bool,
}

impl Mlp {
    /// Zero-initialized network. `sizes` has one more entry than
    /// `activations`: `sizes[i] -> sizes[i + 1]` uses `activations[i]`.
    pub fn new(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if sizes.len() < 2 || activations.len() + 1 != sizes.len() {
            return Err(Error::InvalidConfig(alloc::format!(
                "{} layer sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidConfig("layer sizes must be positive".into()));
        }
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &act)| DenseLayer::new(w[0], w[1], act))
            .collect();
        Ok(Self {
            layers,
            step_count: 0,
            has_grad: false,
        })
    }

    /// Assembles a network from existing layers (e.g. a loaded checkpoint).
    pub fn from_layers(layers: Vec<DenseLayer>, step_count: u64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output_size() != pair[1].input_size() {
                return Err(Error::Shape {
                    op: "layer chain",
                    left: (pair[0].output_size(), pair[0].input_size()),
                    right: (pair[1].output_size(), pair[1].input_size()),
                });
            }
        }
        Ok(Self {
            layers,
            step_count,
            has_grad: false,
        })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].input_size()
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].output_size()
    }

    /// Adam timestep: number of optimizer steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Layer sizes, input first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.layers.len() + 1);
        s.push(self.input_size());
        s.extend(self.layers.iter().map(DenseLayer::output_size));
        s
    }

    pub fn forward(&mut self, input: &Matrix) -> Result<Matrix> {
        let mut x = self.layers[0].forward(input)?;
        for layer in &mut self.layers[1..] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Inference pass; leaves the backward caches alone.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        let mut x = self.layers[0].predict(input)?;
        for layer in &self.layers[1..] {
            x = layer.predict(&x)?;
        }
        Ok(x)
    }

    /// Backpropagates dL/d output through the cached forward pass, adding the
    /// parameter gradients to the accumulators, and returns dL/d input.
    pub fn backward(&mut self, output_grad: &Matrix) -> Result<Matrix> {
        self.backward_impl(output_grad, true).map(|g| g.expect("input gradient requested"))
    }

    /// Like [`Mlp::backward`] but skips the (unused) input gradient of the
    /// first layer.
    pub fn backward_params(&mut self, output_grad: &Matrix) -> Result<()> {
        self.backward_impl(output_grad, false).map(|_| ())
    }

    fn backward_impl(&mut self, output_grad: &Matrix, want_input: bool) -> Result<Option<Matrix>> {
        self.check_output_grad(output_grad)?;
        let n = self.layers.len();
        let mut grad = output_grad.clone();
        for i in (0..n).rev() {
            let need = i > 0 || want_input;
            match self.layers[i].backward(&grad, need)? {
                Some(g) => grad = g,
                None => {
                    self.has_grad = true;
                    return Ok(None);
                }
            }
        }
        self.has_grad = true;
        Ok(Some(grad))
    }

    /// dL/d input with every parameter held fixed. Gradient accumulators are
    /// not touched.
    pub fn input_gradient(&self, output_grad: &Matrix) -> Result<Matrix> {
        self.check_output_grad(output_grad)?;
        let mut grad = output_grad.clone();
        for layer in self.layers.iter().rev() {
            grad = layer.backward_frozen(&grad)?;
        }
        Ok(grad)
    }

    fn check_output_grad(&self, g: &Matrix) -> Result<()> {
        if g.cols() != self.output_size() {
            return Err(Error::Shape {
                op: "mlp backward",
                left: g.shape(),
                right: (g.rows(), self.output_size()),
            });
        }
        Ok(())
    }

    pub fn has_gradients(&self) -> bool {
        self.has_grad
    }

    pub fn zero_grad(&mut self) {
        self.layers.iter_mut().for_each(DenseLayer::zero_grad);
        self.has_grad = false;
    }

    pub fn clear_caches(&mut self) {
        self.layers.iter_mut().for_each(DenseLayer::clear_cache);
    }

    /// One bias-corrected Adam update from the accumulated gradients, then
    /// clears them.
    pub fn adam_step(&mut self, cfg: &AdamConfig) -> Result<()> {
        if !self.has_grad {
            return Err(Error::NoGradients);
        }
        self.step_count += 1;
        let t = self.step_count;
        for layer in &mut self.layers {
            for (params, grads, m, v) in layer.params_and_grads_mut() {
                cfg.update(t, params, grads, m, v);
            }
        }
        self.zero_grad();
        Ok(())
    }

    /// Seeded initialization from the `Init` stream of `seed`.
    pub fn kaiming_init(&mut self, seed: u64) {
        self.init_with(&mut rng::stream(seed, Purpose::Init, 0));
    }

    /// ReLU layers get Kaiming normal weights N(0, 2 / fan_in) and zero bias.
    /// Every other layer gets weights and bias ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
    /// the usual default for a plain linear layer.
    /// Gradients, moments and the step counter are reset to zero.
    pub fn init_with(&mut self, rng: &mut Rng) {
        for layer in &mut self.layers {
            let fan_in = layer.input_size() as f64;
            let mut fresh = DenseLayer::new(layer.input_size(), layer.output_size(), layer.activation());
            if layer.activation() == Activation::Relu {
                let std = libm::sqrt(2.0 / fan_in);
                for w in fresh.weights_mut().as_mut_slice() {
                    *w = rng::normal(rng, std);
                }
            } else {
                let bound = 1.0 / libm::sqrt(fan_in);
                for w in fresh.weights_mut().as_mut_slice() {
                    *w = bound * (2.0 * rng.gen::<f64>() - 1.0);
                }
                for b in fresh.bias_mut() {
                    *b = bound * (2.0 * rng.gen::<f64>() - 1.0);
                }
            }
            *layer = fresh;
        }
        self.step_count = 0;
        self.has_grad = false;
    }

    /// All parameters, layer by layer, weights then bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights().as_slice());
            out.extend_from_slice(l.bias());
        }
        out
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::Shape {
                op: "set_flat_params",
                left: (self.param_count(), 1),
                right: (values.len(), 1),
            });
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights().as_slice().len();
            l.weights_mut().as_mut_slice().copy_from_slice(&values[off..off + nw]);
            off += nw;
            let nb = l.bias().len();
            l.bias_mut().copy_from_slice(&values[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    /// Accumulated gradients in the same order as [`Mlp::flat_params`].
    pub fn flat_grads(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.grad_weights().as_slice());
            out.extend_from_slice(l.grad_bias());
        }
        out
    }

    /// Bitwise parameter equality (weights, biases, moments, step count).
    pub fn bit_eq(&self, other: &Mlp) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        self.step_count == other.step_count
            && self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                let (am_w, am_b, av_w, av_b) = a.moments();
                let (bm_w, bm_b, bv_w, bv_b) = b.moments();
                a.activation() == b.activation()
                    && same(a.weights().as_slice(), b.weights().as_slice())
                    && same(a.bias(), b.bias())
                    && same(am_w.as_slice(), bm_w.as_slice())
                    && same(am_b, bm_b)
                    && same(av_w.as_slice(), bv_w.as_slice())
                    && same(av_b, bv_b)
            })
    }

    /// Uniform random parameters in `[-scale, scale)`; handy for tests that
    /// want non-trivial biases as well as weights.
    pub fn randomize(&mut self, rng: &mut Rng, scale: f64) {
        for l in &mut self.layers {
            for w in l.weights_mut().as_mut_slice() {
                *w = rng.gen_range(-scale..scale);
            }
            for b in l.bias_mut() {
                *b = rng.gen_range(-scale..scale);
            }
        }
    }
}
