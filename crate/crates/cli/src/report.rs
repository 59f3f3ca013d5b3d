//! Metric evaluation over a latent dump and its JSON report.

use std::path::Path;
use std::str::FromStr;

use nashae_core::metrics::{
    beta_vae_score, count_learned_latents, discretize, latent_ranges, r_squared_per_latent, tad, BvaeConfig,
    LatentTable, LEARNED_RANGE,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, IoContext, Result};
use crate::tables::LatentDump;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Tad,
    Bvae,
    R2,
    Count,
}

impl FromStr for Metric {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tad" => Ok(Self::Tad),
            "bvae" => Ok(Self::Bvae),
            "r2" => Ok(Self::R2),
            "count" => Ok(Self::Count),
            other => Err(CliError::config("metrics", format!("unknown metric `{other}`"))),
        }
    }
}

pub fn parse_metrics<S: AsRef<str>>(names: &[S]) -> Result<Vec<Metric>> {
    names.iter().map(|n| n.as_ref().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeEntry {
    pub attribute: String,
    pub best_latent: usize,
    pub a1: f64,
    pub runner_up: Option<usize>,
    pub a2: f64,
    pub diff: f64,
}

/// Metrics for one trained model. Metrics that were not requested stay
/// `null` (or empty).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tad: Option<f64>,
    pub captured: Option<usize>,
    pub per_attribute: Vec<AttributeEntry>,
    pub disqualified: Vec<String>,
    pub bvae_score: Option<f64>,
    pub r2: Vec<f64>,
    pub mean_r2: Option<f64>,
    pub learned_latents: Option<usize>,
    pub latent_ranges: Vec<f64>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).at(path)
    }
}

pub fn evaluate(dump: &LatentDump, metrics: &[Metric], bvae: &BvaeConfig) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    for metric in metrics {
        match metric {
            Metric::Tad => {
                if dump.attr_names.is_empty() {
                    return Err(CliError::data("tad needs binary attribute (a_) columns"));
                }
                let table = LatentTable::new(dump.z.clone()).with_attributes(dump.attrs.clone())?;
                let r = tad(&table)?;
                report.tad = Some(r.tad);
                report.captured = Some(r.captured_count);
                report.disqualified = r.disqualified.iter().map(|&a| dump.attr_names[a].clone()).collect();
                report.per_attribute = r
                    .per_attribute
                    .iter()
                    .map(|s| AttributeEntry {
                        attribute: dump.attr_names[s.attribute].clone(),
                        best_latent: s.best_latent,
                        a1: s.a1,
                        runner_up: s.runner_up,
                        a2: s.a2,
                        diff: s.diff(),
                    })
                    .collect();
            }
            Metric::Bvae => {
                if dump.factor_names.len() < 2 {
                    return Err(CliError::data("bvae needs at least two factor (f_) columns"));
                }
                let cols: Vec<Vec<usize>> = (0..dump.factor_names.len())
                    .map(|f| discretize(&dump.factors.iter().map(|r| r[f]).collect::<Vec<_>>()))
                    .collect();
                let labels: Vec<Vec<usize>> =
                    (0..dump.rows()).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
                report.bvae_score = Some(beta_vae_score(&dump.z, &labels, bvae)?);
            }
            Metric::R2 => {
                let zp = dump
                    .z_pred
                    .as_ref()
                    .ok_or_else(|| CliError::data("r2 needs predictor output (zp_) columns"))?;
                let r2 = r_squared_per_latent(&dump.z, zp)?;
                report.mean_r2 = Some(r2.iter().sum::<f64>() / r2.len() as f64);
                report.r2 = r2;
            }
            Metric::Count => {
                let (lo, hi) = latent_ranges(&dump.z);
                report.learned_latents = Some(count_learned_latents(&lo, &hi, LEARNED_RANGE));
                report.latent_ranges = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
            }
        }
    }
    Ok(report)
}
