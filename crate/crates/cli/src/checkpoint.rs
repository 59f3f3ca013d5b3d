//! Binary model checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! b"NASHAECK"  u32 version
//! u32 header_len  header_len bytes of JSON (model settings)
//! u32 network_count   (encoder, decoder, then one predictor per latent)
//! per network: u64 adam_steps, u32 layer_count
//!   per layer: u32 inputs, u32 outputs, u8 activation,
//!              weights (outputs x inputs, row-major), bias,
//!              first moments (weights, bias), second moments (weights, bias)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nashae_core::model::{ModelConfig, NashAe};
use nashae_core::{Activation, AdamConfig, DenseLayer, Matrix, Mlp};
use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::config::parse_activation;
use crate::error::{CliError, IoContext, Result};

const MAGIC: &[u8; 8] = b"NASHAECK";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct AdamHeader {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl From<AdamConfig> for AdamHeader {
    fn from(a: AdamConfig) -> Self {
        Self {
            learning_rate: a.learning_rate,
            beta1: a.beta1,
            beta2: a.beta2,
            epsilon: a.epsilon,
        }
    }
}

impl From<AdamHeader> for AdamConfig {
    fn from(a: AdamHeader) -> Self {
        Self {
            learning_rate: a.learning_rate,
            beta1: a.beta1,
            beta2: a.beta2,
            epsilon: a.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    input_dim: usize,
    hidden: Vec<usize>,
    latent_dim: usize,
    predictor_hidden: Vec<usize>,
    hidden_activation: String,
    lambda: f64,
    predictor_steps: usize,
    ae_adam: AdamHeader,
    predictor_adam: AdamHeader,
}

impl Header {
    fn of(c: &ModelConfig) -> Self {
        Self {
            input_dim: c.input_dim,
            hidden: c.hidden.clone(),
            latent_dim: c.latent_dim,
            predictor_hidden: c.predictor_hidden.clone(),
            hidden_activation: c.hidden_activation.name().into(),
            lambda: c.lambda,
            predictor_steps: c.predictor_steps,
            ae_adam: c.ae_adam.into(),
            predictor_adam: c.predictor_adam.into(),
        }
    }

    fn config(self) -> Option<ModelConfig> {
        Some(ModelConfig {
            input_dim: self.input_dim,
            hidden: self.hidden,
            latent_dim: self.latent_dim,
            predictor_hidden: self.predictor_hidden,
            hidden_activation: parse_activation(&self.hidden_activation)?,
            lambda: self.lambda,
            predictor_steps: self.predictor_steps,
            ae_adam: self.ae_adam.into(),
            predictor_adam: self.predictor_adam.into(),
        })
    }
}

pub fn encode(model: &NashAe, out: impl Write) -> std::io::Result<()> {
    let mut w = Writer::new(out);
    w.bytes(MAGIC);
    w.u32(VERSION);
    let header = serde_json::to_vec(&Header::of(model.config())).expect("plain data serializes");
    w.u32(header.len() as u32);
    w.bytes(&header);
    let nets: Vec<&Mlp> = [&model.encoder, &model.decoder].into_iter().chain(&model.predictors).collect();
    w.u32(nets.len() as u32);
    for net in nets {
        w.u64(net.step_count());
        w.u32(net.layers().len() as u32);
        for layer in net.layers() {
            w.u32(layer.input_size() as u32);
            w.u32(layer.output_size() as u32);
            w.u8(layer.activation().tag());
            w.f64s(layer.weights().as_slice());
            w.f64s(layer.bias());
            let (m_w, m_b, v_w, v_b) = layer.moments();
            w.f64s(m_w.as_slice());
            w.f64s(m_b);
            w.f64s(v_w.as_slice());
            w.f64s(v_b);
        }
    }
    w.finish()
}

pub fn decode(input: impl Read) -> std::result::Result<NashAe, String> {
    let mut r = Reader::new(input);
    let io = |e: std::io::Error| e.to_string();
    let mut magic = [0u8; 8];
    r.bytes(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err("not a checkpoint".into());
    }
    let version = r.u32().map_err(io)?;
    if version != VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let len = r.u32().map_err(io)? as usize;
    if len > 1 << 20 {
        return Err("header too large".into());
    }
    let mut header = vec![0u8; len];
    r.bytes(&mut header).map_err(io)?;
    let header: Header = serde_json::from_slice(&header).map_err(|e| e.to_string())?;
    let config = header.config().ok_or("unknown activation in header")?;
    let count = r.u32().map_err(io)? as usize;
    if count != 2 + config.latent_dim {
        return Err(format!("expected {} networks, found {count}", 2 + config.latent_dim));
    }
    let mut nets = Vec::with_capacity(count);
    for _ in 0..count {
        let steps = r.u64().map_err(io)?;
        let n_layers = r.u32().map_err(io)? as usize;
        if n_layers > 1024 {
            return Err("layer count out of range".into());
        }
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let inp = r.u32().map_err(io)? as usize;
            let out = r.u32().map_err(io)? as usize;
            let act = Activation::from_tag(r.u8().map_err(io)?).ok_or("unknown activation tag")?;
            let weights = read_matrix(&mut r, out, inp)?;
            let bias = r.f64s(out).map_err(io)?;
            let m_w = read_matrix(&mut r, out, inp)?;
            let m_b = r.f64s(out).map_err(io)?;
            let v_w = read_matrix(&mut r, out, inp)?;
            let v_b = r.f64s(out).map_err(io)?;
            layers.push(
                DenseLayer::from_parts(weights, bias, act, Some((m_w, m_b, v_w, v_b))).map_err(|e| e.to_string())?,
            );
        }
        nets.push(Mlp::from_layers(layers, steps).map_err(|e| e.to_string())?);
    }
    if !r.at_end().map_err(io)? {
        return Err("trailing bytes".into());
    }
    let predictors = nets.split_off(2);
    let decoder = nets.pop().expect("two networks");
    let encoder = nets.pop().expect("one network");
    NashAe::from_parts(config, encoder, decoder, predictors).map_err(|e| e.to_string())
}

fn read_matrix(r: &mut Reader<impl Read>, rows: usize, cols: usize) -> std::result::Result<Matrix, String> {
    let values = r.f64s(rows * cols).map_err(|e| e.to_string())?;
    Matrix::from_vec(rows, cols, values).map_err(|e| e.to_string())
}

pub fn save(path: &Path, model: &NashAe) -> Result<()> {
    let file = File::create(path).at(path)?;
    encode(model, BufWriter::new(file)).at(path)
}

/// Loads a checkpoint file, or `model.ckpt` inside a directory.
pub fn load(path: &Path) -> Result<NashAe> {
    let file_path = if path.is_dir() { path.join(crate::run::CHECKPOINT_FILE) } else { path.to_path_buf() };
    let file = File::open(&file_path).at(&file_path)?;
    decode(BufReader::new(file)).map_err(|e| CliError::data(format!("{}: {e}", file_path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nashae_core::model::fit;
    use nashae_core::model::TrainConfig;

    fn tiny() -> NashAe {
        let cfg = ModelConfig {
            input_dim: 6,
            hidden: vec![5],
            predictor_hidden: vec![4],
            ..ModelConfig::beam(2, 0.3)
        };
        NashAe::new(cfg, 7).unwrap()
    }

    #[test]
    fn round_trip_keeps_weights_moments_and_steps() {
        let mut model = tiny();
        let data = Matrix::from_vec(8, 6, (0..48).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let cfg = TrainConfig {
            batch_size: 4,
            epochs: 3,
            ..TrainConfig::default()
        };
        fit(&mut model, &data, &cfg).unwrap();
        let mut bytes = Vec::new();
        encode(&model, &mut bytes).unwrap();
        let back = decode(bytes.as_slice()).unwrap();
        assert_eq!(back.config(), model.config());
        assert!(back.encoder.bit_eq(&model.encoder));
        assert!(back.decoder.bit_eq(&model.decoder));
        for (a, b) in back.predictors.iter().zip(&model.predictors) {
            assert!(a.bit_eq(b));
        }
        let mut again = Vec::new();
        encode(&back, &mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let mut bytes = Vec::new();
        encode(&tiny(), &mut bytes).unwrap();
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(extra.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode(bad.as_slice()).unwrap_err(), "not a checkpoint");
    }
}
