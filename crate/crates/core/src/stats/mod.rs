//! JND sample statistics and SUR curves.

mod normality;
mod qfunc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MAX_QP};

pub use normality::{chi2_2dof_quantile, jarque_bera, normality_pass_rate, NormalityResult, PassRate, MIN_JB_SAMPLES};
pub use qfunc::{erfc, inverse_q, q_function};

/// Lower bound on a fitted standard deviation, in QP.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// SUR level at which the operational JND location is read off a curve.
pub const JND_SUR_TARGET: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Resolution {
    #[serde(rename = "1080p")]
    R1080p,
    #[serde(rename = "720p")]
    R720p,
    #[serde(rename = "540p")]
    R540p,
    #[serde(rename = "360p")]
    R360p,
}

impl Resolution {
    pub const ALL: [Resolution; 4] = [
        Resolution::R1080p,
        Resolution::R720p,
        Resolution::R540p,
        Resolution::R360p,
    ];

    pub fn dimensions(self) -> (usize, usize) {
        match self {
            Resolution::R1080p => (1920, 1080),
            Resolution::R720p => (1280, 720),
            Resolution::R540p => (960, 540),
            Resolution::R360p => (640, 360),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Resolution::R1080p => "1080p",
            Resolution::R720p => "720p",
            Resolution::R540p => "540p",
            Resolution::R360p => "360p",
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Resolution::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown resolution `{s}`")))
    }
}

/// Per-subject JND locations for one (clip, resolution, JND order).
#[derive(Debug, Clone, PartialEq)]
pub struct JndSampleSet {
    pub clip_id: String,
    pub resolution: Resolution,
    pub jnd_order: u8,
    pub anchor_qp: u8,
    samples: Vec<f64>,
}

impl JndSampleSet {
    /// Validates the order, anchor and that every sample lies in `(anchor_qp, 51]`.
    pub fn new(
        clip_id: impl Into<String>,
        resolution: Resolution,
        jnd_order: u8,
        anchor_qp: u8,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=3).contains(&jnd_order) {
            return Err(Error::invalid(format!("jnd order {jnd_order} not in 1..=3")));
        }
        if anchor_qp >= MAX_QP {
            return Err(Error::invalid(format!("anchor qp {anchor_qp} not in 0..=50")));
        }
        if let Some(bad) = samples
            .iter()
            .find(|&&y| !(y.is_finite() && y > f64::from(anchor_qp) && y <= f64::from(MAX_QP)))
        {
            return Err(Error::invalid(format!(
                "sample {bad} outside ({anchor_qp}, {MAX_QP}]"
            )));
        }
        Ok(JndSampleSet {
            clip_id: clip_id.into(),
            resolution,
            jnd_order,
            anchor_qp,
            samples,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Panel size M.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn qp_range(&self) -> (u8, u8) {
        (self.anchor_qp + 1, MAX_QP)
    }
}

/// Normal model of a JND sample set; the SUR curve is `Q((qp - mu) / sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurModel {
    pub mu: f64,
    pub sigma: f64,
    pub anchor_qp: u8,
}

/// Real-valued and operational (integer) JND location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JndPoint {
    pub qp: f64,
    pub qp_int: u8,
}

impl SurModel {
    /// Builds a model, applying the `SIGMA_FLOOR` guard.
    pub fn new(mu: f64, sigma: f64, anchor_qp: u8) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::invalid(format!("bad model parameters mu={mu} sigma={sigma}")));
        }
        if anchor_qp >= MAX_QP {
            return Err(Error::invalid(format!("anchor qp {anchor_qp} not in 0..=50")));
        }
        Ok(SurModel {
            mu,
            sigma: sigma.max(SIGMA_FLOOR),
            anchor_qp,
        })
    }

    pub fn qp_range(&self) -> (u8, u8) {
        (self.anchor_qp + 1, MAX_QP)
    }

    /// Same normal parameters, read against a different anchor.
    pub fn with_anchor(self, anchor_qp: u8) -> Self {
        SurModel { anchor_qp, ..self }
    }

    pub fn sur(&self, qp: f64) -> f64 {
        sur(self, qp)
    }

    pub fn curve(&self) -> SurCurve {
        SurCurve::from_model(self, &qp_grid(self.anchor_qp))
    }
}

/// Integer QPs `anchor+1 ..= 51`.
pub fn qp_grid(anchor_qp: u8) -> Vec<u8> {
    (anchor_qp.saturating_add(1)..=MAX_QP).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurCurve {
    qp_grid: Vec<u8>,
    values: Vec<f64>,
}

impl SurCurve {
    pub fn new(qp_grid: Vec<u8>, values: Vec<f64>) -> Result<Self> {
        if qp_grid.len() != values.len() {
            return Err(Error::invalid("curve grid and values differ in length"));
        }
        if qp_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("curve grid not strictly increasing"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("curve value outside [0, 1]"));
        }
        Ok(SurCurve { qp_grid, values })
    }

    pub fn from_model(model: &SurModel, grid: &[u8]) -> Self {
        SurCurve {
            qp_grid: grid.to_vec(),
            values: grid.iter().map(|&q| sur(model, f64::from(q))).collect(),
        }
    }

    /// Empirical step curve of a sample set over its own QP range.
    pub fn empirical(set: &JndSampleSet) -> Result<Self> {
        let grid = qp_grid(set.anchor_qp);
        let values = grid
            .iter()
            .map(|&q| empirical_sur(set, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(SurCurve {
            qp_grid: grid,
            values,
        })
    }

    pub fn qp_grid(&self) -> &[u8] {
        &self.qp_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, f64)> + '_ {
        self.qp_grid.iter().copied().zip(self.values.iter().copied())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample mean and Bessel-corrected standard deviation (floored).
pub fn fit_normal(set: &JndSampleSet) -> Result<SurModel> {
    let ys = set.samples();
    if ys.len() < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least 2 samples to fit, got {}",
            set.clip_id,
            ys.len()
        )));
    }
    let mu = mean(ys);
    let var = ys.iter().map(|y| (y - mu).powi(2)).sum::<f64>() / (ys.len() - 1) as f64;
    SurModel::new(mu, var.sqrt(), set.anchor_qp)
}

/// Fraction of the panel that does not notice `qp` against the anchor.
pub fn empirical_sur(set: &JndSampleSet, qp: u8) -> Result<f64> {
    let (lo, hi) = set.qp_range();
    if qp < lo || qp > hi {
        return Err(Error::invalid(format!("qp {qp} outside [{lo}, {hi}]")));
    }
    if set.is_empty() {
        return Err(Error::invalid("empty sample set"));
    }
    let noticed = set.samples().iter().filter(|&&y| y <= f64::from(qp)).count();
    Ok(1.0 - noticed as f64 / set.len() as f64)
}

pub fn sur(model: &SurModel, qp: f64) -> f64 {
    q_function((qp - model.mu) / model.sigma)
}

/// QP at which the model's SUR equals `target`, plus the integer location
/// (nearest integer clamped to the model's QP range).
pub fn jnd_point(model: &SurModel, target: f64) -> Result<JndPoint> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target {target} not in (0, 1)")));
    }
    let qp = model.mu + model.sigma * inverse_q(target);
    let (lo, hi) = model.qp_range();
    let qp_int = qp.round().clamp(f64::from(lo), f64::from(hi)) as u8;
    Ok(JndPoint { qp, qp_int })
}

/// Mean absolute difference between two curves on a shared QP grid.
pub fn delta_sur(pred: &SurCurve, truth: &SurCurve) -> Result<f64> {
    if pred.qp_grid != truth.qp_grid {
        return Err(Error::invalid("delta_sur: curves are on different qp grids"));
    }
    if pred.qp_grid.is_empty() {
        return Err(Error::invalid("delta_sur: empty grid"));
    }
    // Neumaier-compensated sum
    let (mut total, mut carry) = (0.0f64, 0.0f64);
    for d in pred.values.iter().zip(&truth.values).map(|(p, t)| (p - t).abs()) {
        let next = total + d;
        carry += if total.abs() >= d { (total - next) + d } else { (d - next) + total };
        total = next;
    }
    Ok((total + carry) / pred.qp_grid.len() as f64)
}
