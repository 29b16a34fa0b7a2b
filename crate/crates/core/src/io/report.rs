use std::path::Path;

use super::table::{fmt_f64, CsvIn, CsvOut};
use crate::eval::{ClipRecord, EvalReport};
use crate::Result;

/// Files written by [`write_report`].
pub const REPORT_FILES: [&str; 7] = [
    "records.csv",
    "summary.csv",
    "folds.csv",
    "curves.csv",
    "scatter.csv",
    "dsur_hist.csv",
    "notes.csv",
];

const HIST_BIN: f64 = 0.01;
const HIST_BINS: usize = 20;

/// One point of a SUR curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub clip_id: String,
    pub jnd_order: u8,
    pub qp: u8,
    pub sur: f64,
}

const CURVE_HEADER: [&str; 4] = ["clip_id", "jnd_order", "qp", "sur_value"];

pub fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut out = CsvOut::new(&CURVE_HEADER);
    for r in rows {
        out.row([r.clip_id.clone(), r.jnd_order.to_string(), r.qp.to_string(), fmt_f64(r.sur)]);
    }
    out.write_to(path)
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    let t = CsvIn::read(path)?;
    t.expect_header(&CURVE_HEADER)?;
    t.rows
        .iter()
        .map(|row| {
            Ok(CurveRow {
                clip_id: t.field(row, 0)?,
                jnd_order: t.field(row, 1)?,
                qp: t.field(row, 2)?,
                sur: t.field(row, 3)?,
            })
        })
        .collect()
}

fn cell(r: &ClipRecord) -> [String; 3] {
    [r.resolution.to_string(), r.jnd_order.to_string(), r.setting_label().to_owned()]
}

fn records_table(records: &[ClipRecord]) -> CsvOut {
    let mut out = CsvOut::new(&[
        "resolution",
        "jnd_order",
        "setting",
        "clip_id",
        "fold",
        "anchor_qp",
        "truth_mu",
        "truth_sigma",
        "truth_jnd",
        "pred_mu",
        "pred_sigma",
        "pred_jnd",
        "pred_jnd_real",
        "delta_sur",
        "delta_qp",
        "empirical_delta_sur",
    ]);
    for r in records {
        let mut row = cell(r).to_vec();
        row.extend([
            r.clip_id.clone(),
            r.fold.to_string(),
            r.anchor_qp.to_string(),
            fmt_f64(r.truth_mu),
            fmt_f64(r.truth_sigma),
            r.truth_jnd.to_string(),
            fmt_f64(r.pred_mu),
            fmt_f64(r.pred_sigma),
            r.pred_jnd.to_string(),
            fmt_f64(r.pred_jnd_real),
            fmt_f64(r.delta_sur),
            fmt_f64(r.delta_qp),
            fmt_f64(r.empirical_delta_sur),
        ]);
        out.row(row);
    }
    out
}

/// Writes every table of an evaluation report into `dir`.
pub fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    records_table(&report.records).write_to(&dir.join("records.csv"))?;

    let mut out = CsvOut::new(&[
        "resolution",
        "jnd_order",
        "setting",
        "clips",
        "qp_range",
        "mean_delta_sur",
        "mean_delta_qp",
        "mean_empirical_delta_sur",
    ]);
    for s in &report.summaries {
        out.row([
            s.resolution.to_string(),
            s.jnd_order.to_string(),
            s.setting_label().to_owned(),
            s.clips.to_string(),
            s.qp_range.clone(),
            fmt_f64(s.mean_delta_sur),
            fmt_f64(s.mean_delta_qp),
            fmt_f64(s.mean_empirical_delta_sur),
        ]);
    }
    out.write_to(&dir.join("summary.csv"))?;

    let mut out = CsvOut::new(&["resolution", "clip_id", "fold"]);
    for (res, folds) in &report.folds {
        for (id, f) in folds.clip_ids.iter().zip(&folds.fold_of) {
            out.row([res.to_string(), id.clone(), f.to_string()]);
        }
    }
    out.write_to(&dir.join("folds.csv"))?;

    let mut out = CsvOut::new(&["resolution", "jnd_order", "setting", "clip_id", "qp", "truth_sur", "pred_sur"]);
    for r in &report.records {
        let (truth, pred) = (r.truth_model(), r.predicted_model());
        for qp in truth.curve().qp_grid() {
            let mut row = cell(r).to_vec();
            row.extend([
                r.clip_id.clone(),
                qp.to_string(),
                fmt_f64(truth.sur(f64::from(*qp))),
                fmt_f64(pred.sur(f64::from(*qp))),
            ]);
            out.row(row);
        }
    }
    out.write_to(&dir.join("curves.csv"))?;

    let mut out = CsvOut::new(&["resolution", "jnd_order", "setting", "clip_id", "truth_jnd", "pred_jnd", "pred_jnd_real"]);
    for r in &report.records {
        let mut row = cell(r).to_vec();
        row.extend([
            r.clip_id.clone(),
            r.truth_jnd.to_string(),
            r.pred_jnd.to_string(),
            fmt_f64(r.pred_jnd_real),
        ]);
        out.row(row);
    }
    out.write_to(&dir.join("scatter.csv"))?;

    let mut out = CsvOut::new(&["resolution", "jnd_order", "setting", "bin_lo", "bin_hi", "count"]);
    for s in &report.summaries {
        let mut counts = [0usize; HIST_BINS + 1];
        for r in report
            .records
            .iter()
            .filter(|r| r.resolution == s.resolution && r.jnd_order == s.jnd_order && r.setting == s.setting)
        {
            counts[((r.delta_sur / HIST_BIN).floor() as usize).min(HIST_BINS)] += 1;
        }
        for (b, n) in counts.iter().enumerate() {
            let lo = b as f64 * HIST_BIN;
            let hi = if b == HIST_BINS { "inf".to_owned() } else { fmt_f64((b + 1) as f64 * HIST_BIN) };
            out.row([
                s.resolution.to_string(),
                s.jnd_order.to_string(),
                s.setting_label().to_owned(),
                fmt_f64(lo),
                hi,
                n.to_string(),
            ]);
        }
    }
    out.write_to(&dir.join("dsur_hist.csv"))?;

    let mut out = CsvOut::new(&["kind", "message"]);
    for m in &report.skipped {
        out.row(["skipped", m.as_str()]);
    }
    for m in &report.anchor_warnings {
        out.row(["anchor_warning", m.as_str()]);
    }
    out.write_to(&dir.join("notes.csv"))
}


/// Predicted model and 75% point of one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub clip_id: String,
    pub resolution: crate::stats::Resolution,
    pub model: crate::stats::SurModel,
    pub jnd: crate::stats::JndPoint,
}

pub fn write_predictions(path: &Path, rows: &[PredictionRow]) -> Result<()> {
    let mut out = CsvOut::new(&["clip_id", "resolution", "anchor_qp", "mu", "sigma", "jnd_qp", "jnd_qp_int"]);
    for r in rows {
        out.row([
            r.clip_id.clone(),
            r.resolution.to_string(),
            r.model.anchor_qp.to_string(),
            fmt_f64(r.model.mu),
            fmt_f64(r.model.sigma),
            fmt_f64(r.jnd.qp),
            r.jnd.qp_int.to_string(),
        ]);
    }
    out.write_to(path)
}
