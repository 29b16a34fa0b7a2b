use serde::{Deserialize, Serialize};

use super::{aggregate_quality, significant_segments, MaskingStats, QualityLadder};
use crate::{Error, Result, MAX_QP};

pub const QUALITY_SAMPLES: usize = 32;
pub const MASKING_DIM: usize = 4;
pub const FEATURE_DIM: usize = QUALITY_SAMPLES + MASKING_DIM;

/// Quality-degradation samples followed by masking statistics for one
/// (clip, anchor) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub anchor_qp: u8,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(anchor_qp: u8, values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::invalid(format!(
                "feature vector has {} entries, expected {FEATURE_DIM}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature vector has non-finite entries"));
        }
        Ok(FeatureVector { anchor_qp, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quality(&self) -> &[f64] {
        &self.values[..QUALITY_SAMPLES]
    }
}

/// Per-dimension affine standardization fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations; constant columns
    /// get unit scale.
    pub fn fit(rows: &[&[f64]]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::invalid("cannot standardize zero rows"))?;
        let dim = first.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("rows differ in dimension"));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut scale = vec![0.0; dim];
        for r in rows {
            for ((s, x), m) in scale.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (x - m).powi(2);
            }
        }
        for s in scale.iter_mut() {
            let sd = (*s / n).sqrt();
            *s = if sd > 1e-12 { sd } else { 1.0 };
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn identity(dim: usize) -> Self {
        Standardizer {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "dimension {} does not match standardizer {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }
}

/// The 32 QPs sampled above `anchor_qp`: `anchor + max(1, round((51 - anchor) * i / 32))`
/// for `i = 1..=32`. The last sample is always 51.
pub fn feature_qps(anchor_qp: u8) -> [u8; QUALITY_SAMPLES] {
    let span = f64::from(MAX_QP - anchor_qp.min(MAX_QP - 1));
    let mut qps = [0u8; QUALITY_SAMPLES];
    for (i, q) in qps.iter_mut().enumerate() {
        let step = (span * (i + 1) as f64 / QUALITY_SAMPLES as f64).round().max(1.0);
        *q = anchor_qp + step as u8;
    }
    qps
}

/// Aggregated significant-segment quality at [`feature_qps`] followed by the
/// four masking statistics, optionally standardized.
pub fn build_feature_vector(
    ladder: &QualityLadder,
    masking: &MaskingStats,
    anchor_qp: u8,
    significant_fraction: f64,
    scaling: Option<&Standardizer>,
) -> Result<FeatureVector> {
    if anchor_qp >= MAX_QP {
        return Err(Error::invalid(format!("anchor qp {anchor_qp} not in 0..=50")));
    }
    ladder.check_covers(anchor_qp)?;
    let selected = significant_segments(ladder, anchor_qp, significant_fraction)?;
    let mut values = Vec::with_capacity(FEATURE_DIM);
    for q in feature_qps(anchor_qp) {
        values.push(aggregate_quality(ladder, &selected, q)?);
    }
    values.extend(masking.values());
    if let Some(s) = scaling {
        values = s.apply(&values)?;
    }
    FeatureVector::new(anchor_qp, values)
}
