use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nashae_core::beam::BeamConfig;
use nashae_core::metrics::{synthetic_tad_table, BvaeConfig, SyntheticTad};

use crate::checkpoint;
use crate::config::ExperimentSpec;
use crate::data::{self, DataFormat};
use crate::error::{CliError, Result};
use crate::report::{evaluate, parse_metrics};
use crate::run::{self, SweepPlan};
use crate::tables::LatentDump;

#[derive(Debug, Parser)]
#[command(name = "nashae", version, about = "Adversarial covariance-minimizing autoencoder experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the beam waveform dataset and a JSON sidecar.
    GenerateData(GenerateArgs),
    /// Train one model per seed listed in a JSON experiment config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained model or a latent dump.
    Eval(EvalArgs),
    /// Count learned latents over a grid of lambda and latent sizes.
    Sweep(SweepArgs),
    /// Write a two-latent, one-attribute latent dump with known structure.
    SynthLatents(SynthArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DataFormat::Bin)]
    pub format: DataFormat,
    #[arg(long, value_delimiter = ',', default_values_t = [10u32, 15, 20])]
    pub frequencies: Vec<u32>,
    #[arg(long, default_value_t = 120)]
    pub duty_cycles: usize,
    #[arg(long, default_value_t = 0.2)]
    pub duty_lo: f64,
    #[arg(long, default_value_t = 0.8)]
    pub duty_hi: f64,
    #[arg(long, default_value_t = 1000)]
    pub waveform_len: usize,
    #[arg(long, default_value_t = 0.05)]
    pub ramp_tau: f64,
    #[arg(long, default_value_t = 0.01)]
    pub noise_sigma: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint file or training output directory.
    #[arg(long, requires = "data", conflicts_with = "latents")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Latent dump CSV to score instead of a model.
    #[arg(long)]
    pub latents: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "tad,bvae,r2,count")]
    pub metrics: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the pair-difference classifier.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub latent_sizes: Vec<usize>,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Base experiment config; lambda and latent_dim are overridden.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub positive_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateData(a) => {
            let cfg = BeamConfig {
                frequencies: a.frequencies,
                duty_cycle_count: a.duty_cycles,
                duty_cycle_range: (a.duty_lo, a.duty_hi),
                waveform_len: a.waveform_len,
                ramp_tau: a.ramp_tau,
                noise_sigma: a.noise_sigma,
                seed: a.seed,
            };
            let side = run::generate_data(&cfg, &a.out, a.format)?;
            log::info!("wrote {} rows x {} features to {}", side.rows, side.features, a.out.display());
        }
        Command::Train { config, out } => {
            let spec = ExperimentSpec::load(&config)?;
            run::train_command(&spec, &out)?;
        }
        Command::Eval(a) => {
            let metrics = parse_metrics(&a.metrics)?;
            let dump = match (&a.model, &a.data, &a.latents) {
                (Some(model), Some(data), None) => {
                    let model = checkpoint::load(model)?;
                    run::latent_dump(&model, &data::read(data)?)?
                }
                (None, None, Some(latents)) => LatentDump::read(latents)?,
                _ => return Err(CliError::config("eval", "give either --model with --data, or --latents")),
            };
            let bvae = BvaeConfig {
                seed: a.seed,
                ..BvaeConfig::default()
            };
            evaluate(&dump, &metrics, &bvae)?.write(&a.out)?;
        }
        Command::Sweep(a) => {
            let mut base = match &a.config {
                Some(p) => ExperimentSpec::load(p)?,
                None => ExperimentSpec::default(),
            };
            if let Some(e) = a.epochs {
                base.epochs = e;
            }
            let plan = SweepPlan {
                lambdas: a.lambdas,
                latent_sizes: a.latent_sizes,
                trials: a.trials,
                threads: a.threads,
            };
            let result = run::sweep_command(&base, &plan, &a.out)?;
            for c in &result.cells {
                println!(
                    "lambda={} m={} trials={} mean_abs_diff={} mean_learned={}",
                    c.lambda, c.latent_dim, c.trials, c.mean_abs_diff, c.mean_learned
                );
            }
        }
        Command::SynthLatents(a) => {
            let p = SyntheticTad {
                mu: a.mu,
                r: a.r,
                samples: a.samples,
                positive_rate: a.positive_rate,
                seed: a.seed,
            };
            let table = synthetic_tad_table(&p).map_err(|e| CliError::config("r", e.to_string()))?;
            let dump = LatentDump {
                z: table.latents,
                z_pred: None,
                factor_names: Vec::new(),
                factors: vec![Vec::new(); p.samples],
                attr_names: vec!["c".into()],
                attrs: table.binary_attrs.unwrap_or_default(),
            };
            dump.write(&a.out)?;
        }
    }
    Ok(())
}
