use std::collections::BTreeMap;

use crate::{Error, Result, MAX_QP};

/// Default fraction of segments kept as significant.
pub const DEFAULT_SIGNIFICANT_FRACTION: f64 = 0.25;
/// Number of QP steps above the anchor used to rank segment slopes.
pub const SLOPE_WINDOW: u8 = 10;

/// Per-(QP, segment) quality scores of one clip's coded ladder. Higher is
/// better; the metric is whatever produced the scores.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityLadder {
    pub clip_id: String,
    pub metric: String,
    segments: usize,
    scores: BTreeMap<u8, Vec<f64>>,
}

impl QualityLadder {
    pub fn new(clip_id: impl Into<String>, metric: impl Into<String>, segments: usize) -> Result<Self> {
        if segments == 0 {
            return Err(Error::invalid("a ladder needs at least one segment"));
        }
        Ok(QualityLadder {
            clip_id: clip_id.into(),
            metric: metric.into(),
            segments,
            scores: BTreeMap::new(),
        })
    }

    /// Builds a ladder from a full `qp -> scores` table over QPs `1..=51`.
    pub fn from_fn(
        clip_id: impl Into<String>,
        metric: impl Into<String>,
        segments: usize,
        mut score: impl FnMut(u8, usize) -> f64,
    ) -> Result<Self> {
        let mut ladder = Self::new(clip_id, metric, segments)?;
        for qp in 1..=MAX_QP {
            ladder.insert(qp, (0..segments).map(|s| score(qp, s)).collect())?;
        }
        Ok(ladder)
    }

    pub fn insert(&mut self, qp: u8, scores: Vec<f64>) -> Result<()> {
        if !(1..=MAX_QP).contains(&qp) {
            return Err(Error::invalid(format!("qp {qp} not in 1..=51")));
        }
        if scores.len() != self.segments {
            return Err(Error::invalid(format!(
                "qp {qp}: {} scores for {} segments",
                scores.len(),
                self.segments
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("qp {qp}: non-finite score")));
        }
        self.scores.insert(qp, scores);
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.segments
    }

    pub fn qps(&self) -> impl Iterator<Item = u8> + '_ {
        self.scores.keys().copied()
    }

    pub fn scores_at(&self, qp: u8) -> Result<&[f64]> {
        self.scores
            .get(&qp)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::invalid(format!("{}: ladder has no qp {qp}", self.clip_id)))
    }

    pub fn score(&self, qp: u8, segment: usize) -> Result<f64> {
        self.scores_at(qp)?
            .get(segment)
            .copied()
            .ok_or_else(|| Error::invalid(format!("segment {segment} out of range")))
    }

    /// Ensures every QP in `(anchor, 51]` is present.
    pub fn check_covers(&self, anchor_qp: u8) -> Result<()> {
        match (anchor_qp + 1..=MAX_QP).find(|q| !self.scores.contains_key(q)) {
            Some(q) => Err(Error::invalid(format!("{}: ladder gap at qp {q}", self.clip_id))),
            None => Ok(()),
        }
    }
}

/// Mean score of the selected segments at `qp`.
pub fn aggregate_quality(ladder: &QualityLadder, selected: &[usize], qp: u8) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::invalid("aggregate_quality: empty segment selection"));
    }
    let scores = ladder.scores_at(qp)?;
    let mut total = 0.0;
    for &s in selected {
        total += scores
            .get(s)
            .ok_or_else(|| Error::invalid(format!("segment {s} out of range")))?;
    }
    Ok(total / selected.len() as f64)
}

/// The `ceil(fraction * N)` segments whose quality falls fastest just above
/// the anchor, returned in id order.
///
/// The slope of a segment is the mean `|score(q+1) - score(q)|` for `q` in
/// `[anchor+1, min(anchor+10, 50)]`; ties go to the lower id. When the anchor
/// is 50 the window degenerates to the single step 50 -> 51.
pub fn significant_segments(ladder: &QualityLadder, anchor_qp: u8, fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("fraction {fraction} not in (0, 1]")));
    }
    let last = MAX_QP - 1;
    let start = (anchor_qp + 1).min(last);
    let end = anchor_qp.saturating_add(SLOPE_WINDOW).min(last);
    let n = ladder.segment_count();
    let mut slopes = vec![0.0; n];
    for q in start..=end {
        let (a, b) = (ladder.scores_at(q)?, ladder.scores_at(q + 1)?);
        for (slope, (x, y)) in slopes.iter_mut().zip(a.iter().zip(b)) {
            *slope += (y - x).abs();
        }
    }
    let steps = f64::from(end - start + 1);
    slopes.iter_mut().for_each(|s| *s /= steps);

    let keep = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| slopes[j].total_cmp(&slopes[i]).then(i.cmp(&j)));
    let mut chosen = order[..keep].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}
