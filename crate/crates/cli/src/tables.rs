//! CSV tables: training traces and latent dumps.

use std::path::Path;

use nashae_core::model::TrainTrace;
use nashae_core::Matrix;

use crate::data::csv_err;
use crate::error::{CliError, IoContext, Result};

/// `step,epoch,recon,adversarial,combined,mean_predictor_loss`, one row per
/// autoencoder update.
pub fn write_trace(path: &Path, trace: &TrainTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["step", "epoch", "recon", "adversarial", "combined", "mean_predictor_loss"])
        .map_err(|e| csv_err(path, e))?;
    for s in &trace.steps {
        let r = &s.record;
        w.write_record([
            s.step.to_string(),
            s.epoch.to_string(),
            r.recon.to_string(),
            r.adversarial.to_string(),
            r.combined.to_string(),
            r.mean_predictor_loss.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().at(path)
}

/// Latents of every sample with the ground truth needed to score them.
///
/// Columns: `z_<i>` latents, `zp_<i>` predictor outputs (optional),
/// `f_<name>` factor values, `a_<name>` binary attributes as 0/1.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDump {
    pub z: Matrix,
    pub z_pred: Option<Matrix>,
    pub factor_names: Vec<String>,
    pub factors: Vec<Vec<f64>>,
    pub attr_names: Vec<String>,
    pub attrs: Vec<Vec<bool>>,
}

impl LatentDump {
    pub fn rows(&self) -> usize {
        self.z.rows()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let m = self.z.cols();
        let mut header: Vec<String> = (0..m).map(|i| format!("z_{i}")).collect();
        if self.z_pred.is_some() {
            header.extend((0..m).map(|i| format!("zp_{i}")));
        }
        header.extend(self.factor_names.iter().map(|n| format!("f_{n}")));
        header.extend(self.attr_names.iter().map(|n| format!("a_{n}")));
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for r in 0..self.rows() {
            let mut rec: Vec<String> = self.z.row(r).iter().map(f64::to_string).collect();
            if let Some(p) = &self.z_pred {
                rec.extend(p.row(r).iter().map(f64::to_string));
            }
            rec.extend(self.factors.get(r).into_iter().flatten().map(f64::to_string));
            rec.extend(self.attrs.get(r).into_iter().flatten().map(|&b| u8::from(b).to_string()));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().at(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
        let (mut zc, mut pc, mut fc, mut ac) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let (mut factor_names, mut attr_names) = (Vec::new(), Vec::new());
        for (i, h) in header.iter().enumerate() {
            if h.starts_with("zp_") {
                pc.push(i);
            } else if h.starts_with("z_") {
                zc.push(i);
            } else if let Some(n) = h.strip_prefix("f_") {
                fc.push(i);
                factor_names.push(n.to_string());
            } else if let Some(n) = h.strip_prefix("a_") {
                ac.push(i);
                attr_names.push(n.to_string());
            } else {
                return Err(CliError::data(format!("{}: unexpected column `{h}`", path.display())));
            }
        }
        if zc.is_empty() {
            return Err(CliError::data(format!("{}: no z_ columns", path.display())));
        }
        if !pc.is_empty() && pc.len() != zc.len() {
            return Err(CliError::data(format!("{}: zp_ and z_ column counts differ", path.display())));
        }
        let (mut z, mut zp, mut factors, mut attrs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                    CliError::data(format!("{}: row {} column {}: not a number", path.display(), line + 1, i))
                })
            };
            for &i in &zc {
                z.push(num(i)?);
            }
            for &i in &pc {
                zp.push(num(i)?);
            }
            factors.push(fc.iter().map(|&i| num(i)).collect::<Result<Vec<_>>>()?);
            attrs.push(
                ac.iter()
                    .map(|&i| match rec.get(i).map(str::trim) {
                        Some("1") | Some("true") => Ok(true),
                        Some("0") | Some("false") => Ok(false),
                        _ => Err(CliError::data(format!(
                            "{}: row {} column {}: expected 0 or 1",
                            path.display(),
                            line + 1,
                            i
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let rows = factors.len();
        Ok(Self {
            z: Matrix::from_vec(rows, zc.len(), z)?,
            z_pred: if pc.is_empty() { None } else { Some(Matrix::from_vec(rows, pc.len(), zp)?) },
            factor_names,
            factors,
            attr_names,
            attrs,
        })
    }
}
