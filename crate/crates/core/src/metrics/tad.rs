use alloc::vec::Vec;

use super::auroc::auroc;
use super::entropy::{entropy_disqualify, DEFAULT_REDUCTION_THRESHOLD};
use crate::{Error, Matrix, Result};

/// A best-latent AUROC at or above this marks the attribute as captured.
pub const CAPTURE_THRESHOLD: f64 = 0.75;

/// Latent codes for `L` samples with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTable {
    /// `L x m`.
    pub latents: Matrix,
    /// `L` rows of `A` binary attributes.
    pub binary_attrs: Option<Vec<Vec<bool>>>,
    /// `L` rows of generative factor values.
    pub factors: Option<Vec<Vec<f64>>>,
}

impl LatentTable {
    pub fn new(latents: Matrix) -> Self {
        Self {
            latents,
            binary_attrs: None,
            factors: None,
        }
    }

    pub fn with_attributes(mut self, attrs: Vec<Vec<bool>>) -> Result<Self> {
        self.check_rows(attrs.len())?;
        let width = attrs.first().map_or(0, Vec::len);
        if attrs.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("attribute rows differ in length".into()));
        }
        self.binary_attrs = Some(attrs);
        Ok(self)
    }

    pub fn with_factors(mut self, factors: Vec<Vec<f64>>) -> Result<Self> {
        self.check_rows(factors.len())?;
        self.factors = Some(factors);
        Ok(self)
    }

    fn check_rows(&self, n: usize) -> Result<()> {
        if n != self.latents.rows() {
            return Err(Error::Shape {
                op: "latent table",
                left: self.latents.shape(),
                right: (n, 0),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeScore {
    pub attribute: usize,
    pub best_latent: usize,
    /// Highest AUROC over latents.
    pub a1: f64,
    /// Runner-up latent, `None` when there is only one latent.
    pub runner_up: Option<usize>,
    /// Second-highest AUROC (0.5 with a single latent).
    pub a2: f64,
}

impl AttributeScore {
    pub fn diff(&self) -> f64 {
        self.a1 - self.a2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TadReport {
    /// Qualified attributes only, ascending.
    pub per_attribute: Vec<AttributeScore>,
    pub disqualified: Vec<usize>,
    pub tad: f64,
    /// Qualified attributes whose best AUROC reaches [`CAPTURE_THRESHOLD`].
    pub captured_count: usize,
}

/// Total AUROC difference with the default entropy cut-off.
pub fn tad(table: &LatentTable) -> Result<TadReport> {
    tad_with_threshold(table, DEFAULT_REDUCTION_THRESHOLD)
}

/// For every attribute that survives [`entropy_disqualify`], scores each
/// latent as a detector, takes the best (`a1`) and second-best (`a2`) AUROC
/// and sums `a1 - a2`.
pub fn tad_with_threshold(table: &LatentTable, reduction_threshold: f64) -> Result<TadReport> {
    let attrs = table
        .binary_attrs
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("TAD needs binary attributes".into()))?;
    let q = entropy_disqualify(attrs, reduction_threshold);
    if q.qualified.is_empty() {
        return Err(Error::NoQualifiedAttributes);
    }
    let columns: Vec<Vec<f64>> = (0..table.latents.cols()).map(|c| table.latents.col(c)).collect();
    let mut per_attribute = Vec::with_capacity(q.qualified.len());
    for &a in &q.qualified {
        let labels: Vec<bool> = attrs.iter().map(|r| r[a]).collect();
        let mut scores = columns
            .iter()
            .enumerate()
            .map(|(i, col)| auroc(col, &labels).map(|s| (i, s)))
            .collect::<Result<Vec<_>>>()?;
        // Stable: ties keep the lower latent index first.
        scores.sort_by(|x, y| y.1.total_cmp(&x.1));
        let (best_latent, a1) = scores[0];
        let (runner_up, a2) = match scores.get(1) {
            Some(&(i, s)) => (Some(i), s),
            None => (None, 0.5),
        };
        per_attribute.push(AttributeScore {
            attribute: a,
            best_latent,
            a1,
            runner_up,
            a2,
        });
    }
    Ok(TadReport {
        tad: per_attribute.iter().map(AttributeScore::diff).sum(),
        captured_count: per_attribute.iter().filter(|s| s.a1 >= CAPTURE_THRESHOLD).count(),
        per_attribute,
        disqualified: q.disqualified,
    })
}
