use std::path::Path;

use super::table::{fmt_f64, CsvOut};
use crate::stats::{fit_normal, jarque_bera, jnd_point, JndPoint, JndSampleSet, NormalityResult, PassRate, SurModel, JND_SUR_TARGET, MIN_JB_SAMPLES};
use crate::Result;

/// Fitted model, 75% point and normality test of one sample set. The test is
/// absent when the set is too small for it.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub clip_id: String,
    pub resolution: crate::stats::Resolution,
    pub jnd_order: u8,
    pub samples: usize,
    pub model: SurModel,
    pub jnd: JndPoint,
    pub normality: Option<NormalityResult>,
}

pub fn fit_rows(sets: &[JndSampleSet], alpha: f64) -> Result<Vec<FitRow>> {
    sets.iter()
        .map(|set| {
            let model = fit_normal(set)?;
            let normality = if set.len() >= MIN_JB_SAMPLES {
                Some(jarque_bera(set, alpha)?)
            } else {
                None
            };
            Ok(FitRow {
                clip_id: set.clip_id.clone(),
                resolution: set.resolution,
                jnd_order: set.jnd_order,
                samples: set.len(),
                jnd: jnd_point(&model, JND_SUR_TARGET)?,
                model,
                normality,
            })
        })
        .collect()
}

pub fn write_fit_models(path: &Path, rows: &[FitRow]) -> Result<()> {
    let mut out = CsvOut::new(&[
        "clip_id",
        "resolution",
        "jnd_order",
        "anchor_qp",
        "samples",
        "mu",
        "sigma",
        "jnd_qp",
        "jnd_qp_int",
        "jb_statistic",
        "jb_critical",
        "jb_passed",
    ]);
    for r in rows {
        let (stat, crit, passed) = match &r.normality {
            Some(n) => (fmt_f64(n.statistic), fmt_f64(n.critical_value), n.passed.to_string()),
            None => (String::new(), String::new(), "skipped".to_owned()),
        };
        out.row([
            r.clip_id.clone(),
            r.resolution.to_string(),
            r.jnd_order.to_string(),
            r.model.anchor_qp.to_string(),
            r.samples.to_string(),
            fmt_f64(r.model.mu),
            fmt_f64(r.model.sigma),
            fmt_f64(r.jnd.qp),
            r.jnd.qp_int.to_string(),
            stat,
            crit,
            passed,
        ]);
    }
    out.write_to(path)
}

pub fn write_pass_rates(path: &Path, rates: &[PassRate]) -> Result<()> {
    let mut out = CsvOut::new(&["resolution", "jnd_order", "passed", "tested", "skipped", "pass_rate"]);
    for r in rates {
        out.row([
            r.resolution.to_string(),
            r.jnd_order.to_string(),
            r.passed.to_string(),
            r.tested.to_string(),
            r.skipped.to_string(),
            fmt_f64(r.fraction()),
        ]);
    }
    out.write_to(path)
}
