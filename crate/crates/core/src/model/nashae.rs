use alloc::vec;
use alloc::vec::Vec;

use super::losses::{self, check_lambda, mask_latent};
use crate::rng::{self, Purpose};
use crate::{Activation, AdamConfig, Error, Matrix, Mlp, Result};

/// Architecture and optimization settings of a [`NashAe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Observation width `n`.
    pub input_dim: usize,
    /// Encoder hidden widths; the decoder mirrors them.
    pub hidden: Vec<usize>,
    /// Latent width `m`, also the number of predictors.
    pub latent_dim: usize,
    pub predictor_hidden: Vec<usize>,
    pub hidden_activation: Activation,
    /// Weight of the covariance term, in `[0, 1)`.
    pub lambda: f64,
    /// Predictor updates per autoencoder update.
    pub predictor_steps: usize,
    pub ae_adam: AdamConfig,
    pub predictor_adam: AdamConfig,
}

impl ModelConfig {
    /// The 1000-200-80-40-m SELU autoencoder with 40-40 SELU predictors used
    /// for the beam waveforms.
    pub fn beam(latent_dim: usize, lambda: f64) -> Self {
        Self {
            input_dim: 1000,
            hidden: vec![200, 80, 40],
            latent_dim,
            predictor_hidden: vec![40, 40],
            hidden_activation: Activation::Selu,
            lambda,
            predictor_steps: 5,
            ae_adam: AdamConfig::with_lr(1e-3),
            predictor_adam: AdamConfig::with_lr(1e-2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.input_dim == 0 || self.latent_dim == 0 {
            return Err(Error::InvalidConfig("input and latent widths must be positive".into()));
        }
        if self.hidden.contains(&0) || self.predictor_hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden widths must be positive".into()));
        }
        self.ae_adam.validate()?;
        self.predictor_adam.validate()
    }

    fn encoder_shape(&self) -> (Vec<usize>, Vec<Activation>) {
        let mut sizes = vec![self.input_dim];
        sizes.extend(&self.hidden);
        sizes.push(self.latent_dim);
        let mut acts = vec![self.hidden_activation; self.hidden.len()];
        acts.push(Activation::Sigmoid);
        (sizes, acts)
    }

    fn decoder_shape(&self) -> (Vec<usize>, Vec<Activation>) {
        let mut sizes = vec![self.latent_dim];
        sizes.extend(self.hidden.iter().rev());
        sizes.push(self.input_dim);
        let mut acts = vec![self.hidden_activation; self.hidden.len()];
        acts.push(Activation::Identity);
        (sizes, acts)
    }

    fn predictor_shape(&self) -> (Vec<usize>, Vec<Activation>) {
        let mut sizes = vec![self.latent_dim];
        sizes.extend(&self.predictor_hidden);
        sizes.push(1);
        let mut acts = vec![self.hidden_activation; self.predictor_hidden.len()];
        acts.push(Activation::Identity);
        (sizes, acts)
    }
}

/// Losses observed during one autoencoder update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub recon: f64,
    pub adversarial: f64,
    pub combined: f64,
    /// Final-iteration loss of each predictor on the batch.
    pub predictor_losses: Vec<f64>,
}

impl StepRecord {
    pub fn mean_predictor_loss(&self) -> f64 {
        if self.predictor_losses.is_empty() {
            return 0.0;
        }
        self.predictor_losses.iter().sum::<f64>() / self.predictor_losses.len() as f64
    }
}

/// Sigmoid-bounded autoencoder trained against an ensemble of latent
/// predictors.
///
/// Predictor `i` sees the latent vector with coordinate `i` zeroed and
/// regresses coordinate `i`. The autoencoder minimizes
/// `(1 - λ)·L_R + λ·Σ_i Cov(z'_i, z_i)`, where the covariance gradient reaches
/// the encoder only through the (frozen) predictors.
#[derive(Debug, Clone)]
pub struct NashAe {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub predictors: Vec<Mlp>,
    config: ModelConfig,
}

impl NashAe {
    /// Builds and initializes a model. Encoder, decoder and each predictor draw
    /// from their own `Init` substream of `seed`, so `m` does not affect the
    /// autoencoder's starting weights.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let (s, a) = config.encoder_shape();
        let mut encoder = Mlp::new(&s, &a)?;
        encoder.init_with(&mut rng::stream(seed, Purpose::Init, 0));
        let (s, a) = config.decoder_shape();
        let mut decoder = Mlp::new(&s, &a)?;
        decoder.init_with(&mut rng::stream(seed, Purpose::Init, 1));
        let (s, a) = config.predictor_shape();
        let predictors = (0..config.latent_dim)
            .map(|i| {
                let mut p = Mlp::new(&s, &a)?;
                p.init_with(&mut rng::stream(seed, Purpose::Init, 2 + i as u32));
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            encoder,
            decoder,
            predictors,
            config,
        })
    }

    /// Reassembles a model from stored networks, checking that widths agree.
    pub fn from_parts(config: ModelConfig, encoder: Mlp, decoder: Mlp, predictors: Vec<Mlp>) -> Result<Self> {
        config.validate()?;
        let m = config.latent_dim;
        let bad = encoder.input_size() != config.input_dim
            || encoder.output_size() != m
            || decoder.input_size() != m
            || decoder.output_size() != config.input_dim
            || predictors.len() != m
            || predictors.iter().any(|p| p.input_size() != m || p.output_size() != 1);
        if bad {
            return Err(Error::InvalidConfig(alloc::format!(
                "network widths do not match n={} m={}",
                config.input_dim,
                m
            )));
        }
        Ok(Self {
            encoder,
            decoder,
            predictors,
            config,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    pub fn lambda(&self) -> f64 {
        self.config.lambda
    }

    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        self.encoder.predict(x)
    }

    pub fn decode(&self, z: &Matrix) -> Result<Matrix> {
        self.decoder.predict(z)
    }

    /// Concatenated predictions `z'` for a latent batch.
    pub fn predict_latents(&self, z: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(z.rows(), z.cols());
        for (i, p) in self.predictors.iter().enumerate() {
            out.set_col(i, p.predict(&mask_latent(z, i)?)?.as_slice());
        }
        Ok(out)
    }

    /// Runs `k` Adam steps of each predictor on a fixed latent batch and
    /// returns the post-training predictions together with each predictor's
    /// loss at its last update.
    ///
    /// `z` is plain data here; nothing flows back to the encoder.
    pub fn train_predictors(&mut self, z: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        let losses = self.fit_predictors(z)?;
        Ok((self.predict_latents(z)?, losses))
    }

    fn fit_predictors(&mut self, z: &Matrix) -> Result<Vec<f64>> {
        if z.cols() != self.latent_dim() {
            return Err(Error::Shape {
                op: "train_predictors",
                left: z.shape(),
                right: (z.rows(), self.latent_dim()),
            });
        }
        let k = self.config.predictor_steps;
        let cfg = self.config.predictor_adam;
        let mut losses = vec![f64::NAN; self.predictors.len()];
        for (i, pred) in self.predictors.iter_mut().enumerate() {
            let input = mask_latent(z, i)?;
            let target = z.col(i);
            for _ in 0..k {
                let out = pred.forward(&input)?;
                losses[i] = losses::predictor_loss(&target, out.as_slice())?;
                let g = losses::predictor_grad(&target, out.as_slice())?;
                pred.backward_params(&Matrix::column(&g))?;
                pred.adam_step(&cfg)?;
            }
            if k == 0 {
                let out = pred.predict(&input)?;
                losses[i] = losses::predictor_loss(&target, out.as_slice())?;
            }
            pred.clear_caches();
        }
        Ok(losses)
    }

    /// One pass of the alternating game on a minibatch:
    ///
    /// 1. `z = φ(x)`;
    /// 2. each predictor takes `k` Adam steps on `z` (treated as data);
    /// 3. `z'` is recomputed by the updated, now frozen, predictors;
    /// 4. encoder and decoder take one Adam step on `(1-λ)L_R + λL_A`.
    pub fn ae_train_step(&mut self, x: &Matrix) -> Result<StepRecord> {
        self.step_with_latents(x).map(|(record, _)| record)
    }

    /// [`NashAe::ae_train_step`] that also hands back the batch latents
    /// computed before the update.
    pub(crate) fn step_with_latents(&mut self, x: &Matrix) -> Result<(StepRecord, Matrix)> {
        if x.rows() < 2 {
            return Err(Error::DegenerateBatch(x.rows()));
        }
        let z = self.encoder.forward(x)?;
        let predictor_losses = self.fit_predictors(&z)?;
        let (recon, adversarial) = self.accumulate_ae_gradients(x, &z)?;
        let combined = losses::combined_ae_loss(recon, adversarial, self.lambda())?;
        if !(combined.is_finite() && predictor_losses.iter().all(|l| l.is_finite())) {
            self.encoder.zero_grad();
            self.decoder.zero_grad();
            return Err(Error::NonFinite("training loss"));
        }
        let cfg = self.config.ae_adam;
        self.encoder.adam_step(&cfg)?;
        self.decoder.adam_step(&cfg)?;
        let record = StepRecord {
            recon,
            adversarial,
            combined,
            predictor_losses,
        };
        Ok((record, z))
    }

    /// Adds the gradient of the combined objective to the encoder and decoder
    /// accumulators. `z` must be the output of the encoder's most recent
    /// caching forward pass on `x`. Returns `(L_R, L_A)`.
    ///
    /// The covariance term differentiates through the predictors only: its
    /// second argument `z_i` is treated as a constant.
    pub fn accumulate_ae_gradients(&mut self, x: &Matrix, z: &Matrix) -> Result<(f64, f64)> {
        let lambda = self.lambda();
        let x_rec = self.decoder.forward(z)?;
        let recon = losses::reconstruction_loss(x, &x_rec)?;
        let mut g_rec = losses::reconstruction_grad(x, &x_rec)?;
        g_rec.scale(1.0 - lambda);
        let mut g_z = self.decoder.backward(&g_rec)?;

        let mut z_pred = Matrix::zeros(z.rows(), z.cols());
        let masked: Vec<Matrix> = (0..z.cols()).map(|i| mask_latent(z, i)).collect::<Result<_>>()?;
        for (i, (pred, input)) in self.predictors.iter_mut().zip(&masked).enumerate() {
            z_pred.set_col(i, pred.forward(input)?.as_slice());
        }
        let adversarial = losses::adversarial_loss(z, &z_pred)?;

        if lambda > 0.0 {
            let mut g_pred = losses::adversarial_grad(z)?;
            g_pred.scale(lambda);
            for (i, pred) in self.predictors.iter().enumerate() {
                let g_in = pred.input_gradient(&Matrix::column(&g_pred.col(i)))?;
                for r in 0..g_in.rows() {
                    for (c, v) in g_in.row(r).iter().enumerate() {
                        // Column i was masked to a constant zero.
                        if c != i {
                            g_z[(r, c)] += v;
                        }
                    }
                }
            }
        }
        for p in &mut self.predictors {
            p.clear_caches();
        }
        self.encoder.backward_params(&g_z)?;
        Ok((recon, adversarial))
    }

    /// The scalar whose gradient [`NashAe::accumulate_ae_gradients`]
    /// computes: `(1-λ) L_R(x, ψ(φ(x))) + λ Σ_i Cov(ρ_i(mask_i φ(x)), anchor_i)`
    /// with predictors and `anchor` fixed. Evaluated at `anchor = φ(x)` it
    /// agrees with the combined loss.
    pub fn surrogate_objective(&self, x: &Matrix, anchor: &Matrix) -> Result<f64> {
        let z = self.encode(x)?;
        let recon = losses::reconstruction_loss(x, &self.decode(&z)?)?;
        let z_pred = self.predict_latents(&z)?;
        let adversarial = losses::adversarial_loss(anchor, &z_pred)?;
        losses::combined_ae_loss(recon, adversarial, self.lambda())
    }

    /// Encoder then decoder parameters, flattened.
    pub fn ae_flat_params(&self) -> Vec<f64> {
        let mut p = self.encoder.flat_params();
        p.extend(self.decoder.flat_params());
        p
    }

    pub fn set_ae_flat_params(&mut self, values: &[f64]) -> Result<()> {
        let ne = self.encoder.param_count();
        if values.len() != ne + self.decoder.param_count() {
            return Err(Error::Shape {
                op: "set_ae_flat_params",
                left: (ne + self.decoder.param_count(), 1),
                right: (values.len(), 1),
            });
        }
        self.encoder.set_flat_params(&values[..ne])?;
        self.decoder.set_flat_params(&values[ne..])
    }

    pub fn ae_flat_grads(&self) -> Vec<f64> {
        let mut g = self.encoder.flat_grads();
        g.extend(self.decoder.flat_grads());
        g
    }
}
