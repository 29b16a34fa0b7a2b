use std::collections::BTreeMap;

use crate::features::{MaskingStats, QualityLadder};
use crate::stats::{fit_normal, jnd_point, JndSampleSet, Resolution, SurModel, JND_SUR_TARGET};
use crate::{Error, Result};

/// Everything the harness needs about one clip at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipData {
    pub clip_id: String,
    pub resolution: Resolution,
    pub ladder: QualityLadder,
    pub masking: MaskingStats,
    /// Measured JND panels keyed by JND order.
    pub jnd_sets: BTreeMap<u8, JndSampleSet>,
}

impl ClipData {
    pub fn truth(&self, order: u8) -> Result<SurModel> {
        let set = self
            .jnd_sets
            .get(&order)
            .ok_or_else(|| Error::Pipeline(format!("{}: no order-{order} JND samples", self.clip_id)))?;
        fit_normal(set)
    }

    /// Highest order `k` such that panels for orders `1..=k` all exist.
    pub fn contiguous_orders(&self) -> u8 {
        (1..=3).take_while(|o| self.jnd_sets.contains_key(o)).last().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub clips: Vec<ClipData>,
}

impl Corpus {
    pub fn resolutions(&self) -> Vec<Resolution> {
        let mut r: Vec<Resolution> = self.clips.iter().map(|c| c.resolution).collect();
        r.sort();
        r.dedup();
        r
    }

    pub fn clips_at(&self, resolution: Resolution) -> Vec<&ClipData> {
        self.clips.iter().filter(|c| c.resolution == resolution).collect()
    }

    /// Clips whose order-k anchor differs from the integer 75% point of
    /// their fitted order-(k-1) panel.
    pub fn anchor_mismatches(&self) -> Vec<String> {
        let mut out = vec![];
        for clip in &self.clips {
            for (&order, set) in &clip.jnd_sets {
                if order < 2 {
                    continue;
                }
                let expected = clip
                    .jnd_sets
                    .get(&(order - 1))
                    .and_then(|prev| fit_normal(prev).ok())
                    .and_then(|m| jnd_point(&m, JND_SUR_TARGET).ok())
                    .map(|p| p.qp_int);
                if expected != Some(set.anchor_qp) {
                    out.push(format!(
                        "{}@{} order {order}: anchor {} vs previous jnd {:?}",
                        clip.clip_id, clip.resolution, set.anchor_qp, expected
                    ));
                }
            }
        }
        out
    }

    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.clips {
            if !seen.insert((c.resolution, c.clip_id.as_str())) {
                return Err(Error::invalid(format!("duplicate clip `{}` at {}", c.clip_id, c.resolution)));
            }
        }
        Ok(())
    }
}
