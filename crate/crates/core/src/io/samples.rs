use std::collections::HashMap;
use std::path::Path;

use super::table::{fmt_f64, CsvIn, CsvOut};
use crate::stats::{JndSampleSet, Resolution};
use crate::{Result, MAX_QP};

const HEADER: [&str; 6] = ["clip_id", "resolution", "jnd_order", "anchor_qp", "subject_id", "jnd_qp"];

/// One row per subject; sets are grouped by (clip, resolution, order) in
/// order of first appearance.
pub fn read_samples(path: &Path) -> Result<Vec<JndSampleSet>> {
    let t = CsvIn::read(path)?;
    t.expect_header(&HEADER)?;
    let mut index: HashMap<(String, Resolution, u8), usize> = HashMap::new();
    let mut groups: Vec<(String, Resolution, u8, u8, Vec<f64>)> = vec![];
    for row in &t.rows {
        let clip: String = t.field(row, 0)?;
        let res: Resolution = t.field(row, 1)?;
        let order: u8 = t.field(row, 2)?;
        let anchor: u8 = t.field(row, 3)?;
        let _subject: u64 = t.field(row, 4)?;
        let y: f64 = t.field(row, 5)?;
        if !(1..=3).contains(&order) {
            return Err(t.error(row, format!("jnd_order {order} not in 1..=3")));
        }
        if anchor >= MAX_QP {
            return Err(t.error(row, format!("anchor_qp {anchor} must be below {MAX_QP}")));
        }
        if !(y > f64::from(anchor) && y <= f64::from(MAX_QP)) {
            return Err(t.error(row, format!("jnd_qp {y} outside ({anchor}, {MAX_QP}]")));
        }
        let key = (clip.clone(), res, order);
        let gi = *index.entry(key).or_insert_with(|| {
            groups.push((clip, res, order, anchor, vec![]));
            groups.len() - 1
        });
        if groups[gi].3 != anchor {
            return Err(t.error(row, format!("anchor_qp {anchor} differs from {} earlier in the set", groups[gi].3)));
        }
        groups[gi].4.push(y);
    }
    groups
        .into_iter()
        .map(|(clip, res, order, anchor, ys)| JndSampleSet::new(clip, res, order, anchor, ys))
        .collect()
}

pub fn write_samples(path: &Path, sets: &[JndSampleSet]) -> Result<()> {
    let mut out = CsvOut::new(&HEADER);
    for set in sets {
        for (m, y) in set.samples().iter().enumerate() {
            out.row([
                set.clip_id.clone(),
                set.resolution.to_string(),
                set.jnd_order.to_string(),
                set.anchor_qp.to_string(),
                m.to_string(),
                fmt_f64(*y),
            ]);
        }
    }
    out.write_to(path)
}
