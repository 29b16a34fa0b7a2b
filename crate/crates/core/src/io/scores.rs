use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::table::{fmt_f64, CsvIn, CsvOut};
use crate::features::QualityLadder;
use crate::Result;

const HEADER: [&str; 4] = ["clip_id", "qp", "segment_id", "score"];

/// Metric label given to ladders read from a score file.
pub const INGESTED_METRIC: &str = "ingested";

/// Segment quality scores, possibly for several clips; one ladder per clip
/// in order of first appearance. Every listed QP must carry every segment.
pub fn read_scores(path: &Path) -> Result<Vec<QualityLadder>> {
    let t = CsvIn::read(path)?;
    t.expect_header(&HEADER)?;
    type Cells = BTreeMap<u8, BTreeMap<usize, f64>>;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut clips: Vec<(String, Cells)> = vec![];
    for row in &t.rows {
        let clip: String = t.field(row, 0)?;
        let qp: u8 = t.field(row, 1)?;
        let seg: usize = t.field(row, 2)?;
        let score: f64 = t.field(row, 3)?;
        if !(1..=crate::MAX_QP).contains(&qp) {
            return Err(t.error(row, format!("qp {qp} not in 1..=51")));
        }
        if !score.is_finite() {
            return Err(t.error(row, "non-finite score"));
        }
        let ci = *index.entry(clip.clone()).or_insert_with(|| {
            clips.push((clip, BTreeMap::new()));
            clips.len() - 1
        });
        if clips[ci].1.entry(qp).or_default().insert(seg, score).is_some() {
            return Err(t.error(row, format!("duplicate score for qp {qp} segment {seg}")));
        }
    }
    let mut out = vec![];
    for (clip, cells) in clips {
        let segments = cells.values().flat_map(|m| m.keys()).max().map_or(0, |m| m + 1);
        let mut ladder = QualityLadder::new(&clip, INGESTED_METRIC, segments)?;
        for (qp, m) in cells {
            if m.len() != segments {
                return Err(crate::Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    msg: format!("clip `{clip}` qp {qp}: {} of {segments} segments", m.len()),
                });
            }
            ladder.insert(qp, m.into_values().collect())?;
        }
        out.push(ladder);
    }
    Ok(out)
}

pub fn write_scores(path: &Path, ladders: &[&QualityLadder]) -> Result<()> {
    let mut out = CsvOut::new(&HEADER);
    for ladder in ladders {
        for qp in ladder.qps() {
            for (s, v) in ladder.scores_at(qp)?.iter().enumerate() {
                out.row([ladder.clip_id.clone(), qp.to_string(), s.to_string(), fmt_f64(*v)]);
            }
        }
    }
    out.write_to(path)
}
