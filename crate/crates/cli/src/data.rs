//! Datasets on disk: waveform rows plus generative factor columns.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use nashae_core::beam::{BeamConfig, BeamDataset};
use nashae_core::metrics::discretize;
use nashae_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::error::{CliError, IoContext, Result};

const MAGIC: &[u8; 8] = b"NASHDATA";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Bin,
}

/// Feature rows with per-row generative factor values.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub samples: Matrix,
    pub factor_names: Vec<String>,
    /// One row of factor values per sample.
    pub factors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub frequencies: Vec<u32>,
    pub duty_cycle_count: usize,
    pub duty_cycle_range: [f64; 2],
    pub waveform_len: usize,
    pub ramp_tau: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl From<&BeamConfig> for GeneratorInfo {
    fn from(c: &BeamConfig) -> Self {
        Self {
            frequencies: c.frequencies.clone(),
            duty_cycle_count: c.duty_cycle_count,
            duty_cycle_range: [c.duty_cycle_range.0, c.duty_cycle_range.1],
            waveform_len: c.waveform_len,
            ramp_tau: c.ramp_tau,
            noise_sigma: c.noise_sigma,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationInfo {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// `<data file>.json`: provenance of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub format: DataFormat,
    pub rows: usize,
    pub features: usize,
    pub factor_names: Vec<String>,
    pub generator: Option<GeneratorInfo>,
    pub normalization: Option<NormalizationInfo>,
}

impl LabeledData {
    /// Beam waveforms with `frequency` (pulses per window) and `duty_cycle`.
    pub fn from_beam(ds: &BeamDataset) -> Self {
        Self {
            samples: ds.samples.clone(),
            factor_names: vec!["frequency".into(), "duty_cycle".into()],
            factors: (0..ds.len())
                .map(|r| vec![f64::from(ds.frequency(r)), ds.duty_cycle[r]])
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.samples.rows()
    }

    pub fn factor_column(&self, f: usize) -> Vec<f64> {
        self.factors.iter().map(|r| r[f]).collect()
    }

    /// Dense category index of every factor value, per row.
    pub fn factor_indices(&self) -> Vec<Vec<usize>> {
        let cols: Vec<Vec<usize>> = (0..self.factor_names.len())
            .map(|f| discretize(&self.factor_column(f)))
            .collect();
        (0..self.rows()).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }

    /// One binary attribute per factor: the value is at or above the middle
    /// distinct value (for the beam data, `frequency >= 15` and
    /// `duty_cycle >= 0.5`).
    pub fn binary_attributes(&self) -> Vec<Vec<bool>> {
        let idx = self.factor_indices();
        let splits: Vec<usize> = (0..self.factor_names.len())
            .map(|f| (idx.iter().map(|r| r[f]).max().unwrap_or(0) + 1) / 2)
            .collect();
        idx.iter()
            .map(|r| r.iter().zip(&splits).map(|(&v, &s)| v >= s).collect())
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.factors.len() != self.rows() || self.factors.iter().any(|r| r.len() != self.factor_names.len()) {
            return Err(CliError::data("factor table does not match the sample rows"));
        }
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write(path: &Path, data: &LabeledData, format: DataFormat) -> Result<()> {
    data.check()?;
    match format {
        DataFormat::Csv => write_csv(path, data),
        DataFormat::Bin => write_bin(path, data),
    }
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(sidecar).expect("plain data serializes") + "\n";
    std::fs::write(&side, text).at(&side)
}

/// Reads either format, detected from the leading bytes.
pub fn read(path: &Path) -> Result<LabeledData> {
    let mut head = [0u8; 8];
    let n = File::open(path).at(path)?.read(&mut head).at(path)?;
    let data = if n == 8 && &head == MAGIC {
        read_bin(path)?
    } else {
        read_csv(path)?
    };
    data.check()?;
    Ok(data)
}

fn write_csv(path: &Path, data: &LabeledData) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = data.factor_names.iter().map(|n| format!("f_{n}")).collect();
    header.extend((0..data.samples.cols()).map(|c| format!("x_{c}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in 0..data.rows() {
        let rec: Vec<String> = data.factors[r]
            .iter()
            .chain(data.samples.row(r))
            .map(|v| v.to_string())
            .collect();
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().at(path)
}

fn read_csv(path: &Path) -> Result<LabeledData> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let mut factor_cols = Vec::new();
    let mut feature_cols = Vec::new();
    let mut factor_names = Vec::new();
    for (i, h) in header.iter().enumerate() {
        if let Some(name) = h.strip_prefix("f_") {
            factor_cols.push(i);
            factor_names.push(name.to_string());
        } else if h.starts_with("x_") {
            feature_cols.push(i);
        } else {
            return Err(CliError::data(format!("{}: unexpected column `{h}`", path.display())));
        }
    }
    let mut samples = Vec::new();
    let mut factors = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| {
                CliError::data(format!("{}: row {} column {}: not a number", path.display(), line + 1, i))
            })
        };
        factors.push(factor_cols.iter().map(|&i| parse(i)).collect::<Result<Vec<_>>>()?);
        for &i in &feature_cols {
            samples.push(parse(i)?);
        }
    }
    if factors.is_empty() {
        return Err(CliError::data(format!("{}: no rows", path.display())));
    }
    Ok(LabeledData {
        samples: Matrix::from_vec(factors.len(), feature_cols.len(), samples)?,
        factor_names,
        factors,
    })
}

fn write_bin(path: &Path, data: &LabeledData) -> Result<()> {
    let file = File::create(path).at(path)?;
    let mut w = Writer::new(BufWriter::new(file));
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u64(data.rows() as u64);
    w.u64(data.samples.cols() as u64);
    w.u32(data.factor_names.len() as u32);
    for n in &data.factor_names {
        w.string(n);
    }
    w.f64s(data.samples.as_slice());
    for row in &data.factors {
        w.f64s(row);
    }
    w.finish().at(path)
}

fn read_bin(path: &Path) -> Result<LabeledData> {
    let file = File::open(path).at(path)?;
    let mut r = Reader::new(BufReader::new(file));
    let bad = |what: &str| CliError::data(format!("{}: {what}", path.display()));
    let mut magic = [0u8; 8];
    r.bytes(&mut magic).at(path)?;
    if r.u32().at(path)? != VERSION {
        return Err(bad("unsupported dataset version"));
    }
    let rows = r.u64().at(path)? as usize;
    let cols = r.u64().at(path)? as usize;
    let nf = r.u32().at(path)? as usize;
    let factor_names = (0..nf).map(|_| r.string()).collect::<std::io::Result<Vec<_>>>().at(path)?;
    let samples = r.f64s(rows.checked_mul(cols).ok_or_else(|| bad("size overflow"))?).at(path)?;
    let factors = (0..rows).map(|_| r.f64s(nf)).collect::<std::io::Result<Vec<_>>>().at(path)?;
    if !r.at_end().at(path)? {
        return Err(bad("trailing bytes"));
    }
    Ok(LabeledData {
        samples: Matrix::from_vec(rows, cols, samples)?,
        factor_names,
        factors,
    })
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::data(format!("{}: {other:?}", path.display())),
    }
}
