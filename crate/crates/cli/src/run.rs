//! Experiment orchestration: training trials, evaluation and sweeps.

use std::cell::RefCell;
use std::fs;
use std::path::Path;

use nashae_core::beam::generate_dataset;
use nashae_core::metrics::{count_learned_latents, latent_ranges, BvaeConfig, LEARNED_RANGE};
use nashae_core::model::{fit_with, NashAe, TrainTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::config::ExperimentSpec;
use crate::data::{self, DataFormat, GeneratorInfo, LabeledData, NormalizationInfo, Sidecar};
use crate::error::{CliError, IoContext, Result};
use crate::report::{evaluate, parse_metrics};
use crate::tables::{write_trace, LatentDump};

pub const CHECKPOINT_FILE: &str = "model.ckpt";

/// The dataset named by `spec`: a file, or freshly generated waveforms.
pub fn load_data(spec: &ExperimentSpec) -> Result<LabeledData> {
    match &spec.data_path {
        Some(p) => data::read(p),
        None => Ok(LabeledData::from_beam(&generate_dataset(&spec.beam())?)),
    }
}

/// Writes the dataset and its sidecar; returns the sidecar.
pub fn generate_data(cfg: &nashae_core::beam::BeamConfig, out: &Path, format: DataFormat) -> Result<Sidecar> {
    let ds = generate_dataset(cfg).map_err(|e| CliError::config("beam", e.to_string()))?;
    let data = LabeledData::from_beam(&ds);
    data::write(out, &data, format)?;
    let sidecar = Sidecar {
        schema_version: 1,
        format,
        rows: data.rows(),
        features: data.samples.cols(),
        factor_names: data.factor_names.clone(),
        generator: Some(GeneratorInfo::from(cfg)),
        normalization: Some(NormalizationInfo {
            mean: ds.norm.mean.clone(),
            std: ds.norm.std.clone(),
        }),
    };
    data::write_sidecar(out, &sidecar)?;
    Ok(sidecar)
}

/// Latents, predictor outputs and ground truth for every row of `data`.
pub fn latent_dump(model: &NashAe, data: &LabeledData) -> Result<LatentDump> {
    check_width(model, data)?;
    let z = model.encode(&data.samples)?;
    let z_pred = model.predict_latents(&z)?;
    Ok(LatentDump {
        z,
        z_pred: Some(z_pred),
        factor_names: data.factor_names.clone(),
        factors: data.factors.clone(),
        attr_names: data.factor_names.clone(),
        attrs: data.binary_attributes(),
    })
}

fn check_width(model: &NashAe, data: &LabeledData) -> Result<()> {
    let n = model.config().input_dim;
    if data.samples.cols() != n {
        return Err(CliError::data(format!(
            "width mismatch: model expects {n} features, data has {}",
            data.samples.cols()
        )));
    }
    Ok(())
}

/// A trained model and what it learned.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub model: NashAe,
    pub trace: TrainTrace,
    pub dump: LatentDump,
    /// Latents whose range over the full dataset reaches 0.2.
    pub learned: usize,
    pub ranges: Vec<f64>,
}

impl TrialOutcome {
    pub fn mean_r2(&self) -> Result<f64> {
        let zp = self.dump.z_pred.as_ref().expect("trial dumps carry predictions");
        Ok(nashae_core::metrics::mean_r_squared(&self.dump.z, zp)?)
    }
}

/// Trains one model; `checkpoint_dir` receives periodic checkpoints when the
/// experiment asks for them.
pub fn train_trial(
    spec: &ExperimentSpec,
    data: &LabeledData,
    seed: u64,
    checkpoint_dir: Option<&Path>,
) -> Result<TrialOutcome> {
    let mut model = NashAe::new(spec.model(data.samples.cols()), seed)?;
    let failure: RefCell<Option<CliError>> = RefCell::new(None);
    let every = spec.checkpoint_every;
    let trace = fit_with(&mut model, &data.samples, &spec.train(seed), |epoch, m, _| {
        if let (Some(dir), true) = (checkpoint_dir, every > 0 && (epoch + 1) % every.max(1) == 0) {
            let path = dir.join(format!("model-e{}.ckpt", epoch + 1));
            if let Err(e) = checkpoint::save(&path, m) {
                failure.borrow_mut().get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let dump = latent_dump(&model, data)?;
    let (lo, hi) = latent_ranges(&dump.z);
    Ok(TrialOutcome {
        seed,
        learned: count_learned_latents(&lo, &hi, LEARNED_RANGE),
        ranges: lo.iter().zip(&hi).map(|(l, h)| h - l).collect(),
        model,
        trace,
        dump,
    })
}

/// `train`: one subdirectory `seed-<s>` per seed with the checkpoint, trace,
/// latent dump and metric report, plus `config.json` and `summary.csv`.
pub fn train_command(spec: &ExperimentSpec, out: &Path) -> Result<Vec<TrialOutcome>> {
    let data = load_data(spec)?;
    let metrics = parse_metrics(&spec.metrics)?;
    fs::create_dir_all(out).at(out)?;
    let cfg_path = out.join("config.json");
    fs::write(&cfg_path, spec.to_json() + "\n").at(&cfg_path)?;
    let mut outcomes = Vec::with_capacity(spec.seeds.len());
    for &seed in &spec.seeds {
        let dir = out.join(format!("seed-{seed}"));
        fs::create_dir_all(&dir).at(&dir)?;
        let trial = train_trial(spec, &data, seed, Some(&dir))?;
        checkpoint::save(&dir.join(CHECKPOINT_FILE), &trial.model)?;
        write_trace(&dir.join("trace.csv"), &trial.trace)?;
        trial.dump.write(&dir.join("latents.csv"))?;
        let bvae = BvaeConfig {
            seed,
            ..BvaeConfig::default()
        };
        evaluate(&trial.dump, &metrics, &bvae)?.write(&dir.join("metrics.json"))?;
        log::info!("seed {seed}: {} learned latents, ranges {:?}", trial.learned, trial.ranges);
        outcomes.push(trial);
    }
    let mut w = csv::Writer::from_path(out.join("summary.csv")).map_err(|e| data::csv_err(out, e))?;
    w.write_record(["seed", "learned_latents", "final_recon", "final_adversarial"])
        .map_err(|e| data::csv_err(out, e))?;
    for t in &outcomes {
        let last = t.trace.last().map(|s| &s.record);
        w.write_record([
            t.seed.to_string(),
            t.learned.to_string(),
            last.map_or(String::new(), |r| r.recon.to_string()),
            last.map_or(String::new(), |r| r.adversarial.to_string()),
        ])
        .map_err(|e| data::csv_err(out, e))?;
    }
    w.flush().at(out)?;
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub latent_dim: usize,
    pub seed: u64,
    pub learned: usize,
    pub abs_diff: usize,
    pub mean_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub lambda: f64,
    pub latent_dim: usize,
    pub trials: usize,
    /// Mean of `|learned - truth|` over the cell's trials.
    pub mean_abs_diff: f64,
    pub mean_learned: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub truth: usize,
    pub rows: Vec<SweepRow>,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn from_rows(truth: usize, rows: Vec<SweepRow>) -> Self {
        let mut cells: Vec<SweepCell> = Vec::new();
        for r in &rows {
            let seen = cells
                .iter()
                .any(|c| c.lambda.to_bits() == r.lambda.to_bits() && c.latent_dim == r.latent_dim);
            if seen {
                continue;
            }
            let members: Vec<&SweepRow> = rows
                .iter()
                .filter(|x| x.lambda.to_bits() == r.lambda.to_bits() && x.latent_dim == r.latent_dim)
                .collect();
            let n = members.len() as f64;
            cells.push(SweepCell {
                lambda: r.lambda,
                latent_dim: r.latent_dim,
                trials: members.len(),
                mean_abs_diff: members.iter().map(|x| x.abs_diff as f64).sum::<f64>() / n,
                mean_learned: members.iter().map(|x| x.learned as f64).sum::<f64>() / n,
            });
        }
        Self { truth, rows, cells }
    }

    pub fn cell(&self, lambda: f64, latent_dim: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.lambda == lambda && c.latent_dim == latent_dim)
    }

    /// `trials.csv` and `summary.csv` under `out`.
    pub fn write(&self, out: &Path) -> Result<()> {
        fs::create_dir_all(out).at(out)?;
        let p = out.join("trials.csv");
        let mut w = csv::Writer::from_path(&p).map_err(|e| data::csv_err(&p, e))?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| data::csv_err(&p, e))?;
        }
        w.flush().at(&p)?;
        let p = out.join("summary.csv");
        let mut w = csv::Writer::from_path(&p).map_err(|e| data::csv_err(&p, e))?;
        for c in &self.cells {
            w.serialize(c).map_err(|e| data::csv_err(&p, e))?;
        }
        w.flush().at(&p)
    }

    pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
        let mut r = csv::Reader::from_path(path).map_err(|e| data::csv_err(path, e))?;
        r.deserialize().map(|row| row.map_err(|e| data::csv_err(path, e))).collect()
    }
}

/// Grid of `(lambda, latent_dim)` cells with trials seeded `0..trials`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub lambdas: Vec<f64>,
    pub latent_sizes: Vec<usize>,
    pub trials: u64,
    /// Worker threads; trials themselves are single-threaded.
    pub threads: usize,
}

/// Runs every trial of the plan. Results come back in plan order whatever
/// the thread count.
pub fn sweep_trials(base: &ExperimentSpec, data: &LabeledData, plan: &SweepPlan) -> Result<Vec<(f64, TrialOutcome)>> {
    if plan.trials == 0 {
        return Err(CliError::config("trials", "must be at least 1"));
    }
    let mut jobs = Vec::new();
    for &lambda in &plan.lambdas {
        for &m in &plan.latent_sizes {
            let spec = ExperimentSpec {
                lambda,
                latent_dim: m,
                ..base.clone()
            };
            spec.validate()?;
            for seed in 0..plan.trials {
                jobs.push((spec.clone(), seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads.max(1))
        .build()
        .map_err(|e| CliError::config("threads", e.to_string()))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|(spec, seed)| {
                let t = train_trial(spec, data, *seed, None)?;
                log::info!("lambda {} m {} seed {}: {} learned", spec.lambda, spec.latent_dim, seed, t.learned);
                Ok((spec.lambda, t))
            })
            .collect()
    })
}

pub fn summarize(truth: usize, trials: &[(f64, TrialOutcome)]) -> Result<SweepResult> {
    let rows = trials
        .iter()
        .map(|(lambda, t)| {
            Ok(SweepRow {
                lambda: *lambda,
                latent_dim: t.model.latent_dim(),
                seed: t.seed,
                learned: t.learned,
                abs_diff: t.learned.abs_diff(truth),
                mean_r2: t.mean_r2()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_rows(truth, rows))
}

pub fn sweep_command(base: &ExperimentSpec, plan: &SweepPlan, out: &Path) -> Result<SweepResult> {
    let data = load_data(base)?;
    let trials = sweep_trials(base, &data, plan)?;
    let result = summarize(data.factor_names.len(), &trials)?;
    result.write(out)?;
    Ok(result)
}
