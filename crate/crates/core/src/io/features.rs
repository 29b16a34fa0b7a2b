use std::path::Path;

use super::table::{fmt_f64, CsvIn, CsvOut};
use crate::features::{FeatureVector, FEATURE_DIM};
use crate::stats::Resolution;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub clip_id: String,
    pub resolution: Resolution,
    pub features: FeatureVector,
}

fn header() -> Vec<String> {
    let mut h: Vec<String> = ["clip_id", "resolution", "anchor_qp"].map(String::from).to_vec();
    h.extend((0..FEATURE_DIM).map(|i| format!("f{i}")));
    h
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let t = CsvIn::read(path)?;
    let h = header();
    t.expect_header(&h.iter().map(String::as_str).collect::<Vec<_>>())?;
    t.rows
        .iter()
        .map(|row| {
            let values = (0..FEATURE_DIM).map(|i| t.field::<f64>(row, 3 + i)).collect::<Result<Vec<_>>>()?;
            let features = FeatureVector::new(t.field(row, 2)?, values).map_err(|e| t.error(row, e.to_string()))?;
            Ok(FeatureRow {
                clip_id: t.field(row, 0)?,
                resolution: t.field(row, 1)?,
                features,
            })
        })
        .collect()
}

pub fn write_features(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let h = header();
    let mut out = CsvOut::new(&h.iter().map(String::as_str).collect::<Vec<_>>());
    for r in rows {
        let mut rec = vec![r.clip_id.clone(), r.resolution.to_string(), r.features.anchor_qp.to_string()];
        rec.extend(r.features.values().iter().map(|v| fmt_f64(*v)));
        out.row(rec);
    }
    out.write_to(path)
}
