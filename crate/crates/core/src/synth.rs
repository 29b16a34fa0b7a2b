//! Synthetic corpora: segment quality ladders, masking statistics and
//! simulated JND campaigns whose SUR parameters follow from the content.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bisection::{simulate_campaign, CampaignSpec, ROUNDS};
use crate::eval::{ClipData, Corpus};
use crate::features::{aggregate_quality, significant_segments, MaskingStats, QualityLadder, SegmentGrid};
use crate::rng::{derive_seed, rng_for};
use crate::stats::{fit_normal, jnd_point, Resolution, JND_SUR_TARGET};
use crate::{Error, Result, MAX_QP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub clips: usize,
    pub seed: u64,
    pub subjects: usize,
    /// η of the linear confidence schedule used by simulated subjects.
    pub noise: f64,
    pub resolutions: Vec<Resolution>,
    pub orders: u8,
    pub temporal_slots: usize,
    /// Half-width of the uniform noise added to each segment score.
    pub score_noise: f64,
    pub significant_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            clips: 220,
            seed: 0,
            subjects: 30,
            noise: 0.2,
            resolutions: Resolution::ALL.to_vec(),
            orders: 3,
            temporal_slots: 5,
            score_noise: 0.3,
            significant_fraction: crate::features::DEFAULT_SIGNIFICANT_FRACTION,
        }
    }
}

/// Latent content shared by all resolutions of one clip.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Content {
    centre: f64,
    width: f64,
    masking: f64,
}

impl Content {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Content {
            centre: rng.random_range(26.0..44.0),
            width: rng.random_range(3.0..7.0),
            masking: rng.random_range(0.0..1.0),
        }
    }
}

fn resolution_shift(r: Resolution) -> f64 {
    match r {
        Resolution::R1080p => 0.0,
        Resolution::R720p => 1.0,
        Resolution::R540p => 2.0,
        Resolution::R360p => 3.0,
    }
}

pub fn clip_name(index: usize) -> String {
    format!("clip{index:03}")
}

/// Quality drop, in score points, that makes the average viewer notice.
fn threshold(m: f64) -> f64 {
    6.0 + 8.0 * m
}

fn target_sigma(c: Content, order: u8) -> f64 {
    (1.0 + 0.35 * c.width + 1.2 * c.masking) * (1.0 - 0.15 * f64::from(order - 1))
}

fn synth_ladder(id: &str, resolution: Resolution, c: Content, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<QualityLadder> {
    let (w, h) = resolution.dimensions();
    let grid = SegmentGrid::partition(w, h, cfg.temporal_slots, 1)?;
    let n = grid.segment_count();
    let shift = resolution_shift(resolution);
    let params: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                c.centre - shift + rng.random_range(-3.0..3.0),
                c.width * rng.random_range(0.85..1.15),
            )
        })
        .collect();
    let noise = |rng: &mut ChaCha8Rng| {
        if cfg.score_noise > 0.0 {
            rng.random_range(-cfg.score_noise..=cfg.score_noise)
        } else {
            0.0
        }
    };
    QualityLadder::from_fn(id, "synthetic", n, |qp, s| {
        let (cs, ws) = params[s];
        100.0 / (1.0 + ((f64::from(qp) - cs) / ws).exp()) + noise(rng)
    })
}

fn synth_masking(c: Content, rng: &mut ChaCha8Rng) -> Result<MaskingStats> {
    let m = c.masking;
    MaskingStats::from_values([
        10.0 + 40.0 * m + rng.random_range(-2.0..2.0),
        3.0 + 12.0 * m + rng.random_range(-1.0..1.0),
        1.0 + 8.0 * m + rng.random_range(-0.5..0.5),
        0.5 + 4.0 * m + rng.random_range(-0.3..0.3),
    ])
}

/// Location where the significant-segment quality has fallen by the
/// content's threshold below its value at the anchor.
fn target_mu(ladder: &QualityLadder, anchor: u8, c: Content, fraction: f64) -> Result<f64> {
    let selected = significant_segments(ladder, anchor, fraction)?;
    let at = |qp: u8| aggregate_quality(ladder, &selected, qp.max(1));
    let base = at(anchor)?;
    let tau = threshold(c.masking);
    let mut prev = 0.0;
    let mut mu = f64::from(MAX_QP) - 0.5;
    for qp in anchor + 1..=MAX_QP {
        let drop = base - at(qp)?;
        if drop >= tau {
            let t = if drop > prev { (tau - prev) / (drop - prev) } else { 1.0 };
            mu = f64::from(qp - 1) + t;
            break;
        }
        prev = drop;
    }
    Ok(mu.clamp(f64::from(anchor) + 0.5, f64::from(MAX_QP) - 0.5))
}

fn synth_clip(index: usize, resolution: Resolution, content: Content, cfg: &SynthConfig) -> Result<ClipData> {
    let id = clip_name(index);
    let mut rng = rng_for(cfg.seed, &format!("synth/{id}/{resolution}"));
    let ladder = synth_ladder(&id, resolution, content, cfg, &mut rng)?;
    let masking = synth_masking(content, &mut rng)?;
    let mut jnd_sets = BTreeMap::new();
    let mut anchor = 0u8;
    for order in 1..=cfg.orders {
        let mu = target_mu(&ladder, anchor, content, cfg.significant_fraction)?;
        let spec = CampaignSpec {
            clip_id: id.clone(),
            resolution,
            jnd_order: order,
            mu,
            sigma: target_sigma(content, order),
            subjects: cfg.subjects,
            rounds: ROUNDS,
            anchor_qp: anchor,
            noise: cfg.noise,
            schedule: None,
            seed: derive_seed(cfg.seed, &format!("synth/{id}/{resolution}/{order}")),
        };
        let set = simulate_campaign(&spec)?;
        let fitted = fit_normal(&set)?;
        anchor = jnd_point(&fitted, JND_SUR_TARGET)?.qp_int.min(MAX_QP - 1);
        jnd_sets.insert(order, set);
    }
    Ok(ClipData {
        clip_id: id,
        resolution,
        ladder,
        masking,
        jnd_sets,
    })
}

/// Builds a corpus of `clips × resolutions` entries with `orders` chained
/// JND panels each; the order-k anchor is the fitted order-(k-1) JND.
pub fn synth_corpus(cfg: &SynthConfig) -> Result<Corpus> {
    if cfg.clips == 0 || cfg.resolutions.is_empty() {
        return Err(Error::invalid("synthetic corpus needs clips and resolutions"));
    }
    if !(1..=3).contains(&cfg.orders) {
        return Err(Error::invalid(format!("orders must be in 1..=3, got {}", cfg.orders)));
    }
    let contents: Vec<Content> = (0..cfg.clips)
        .map(|i| Content::draw(&mut rng_for(cfg.seed, &format!("synth/content/{i}"))))
        .collect();
    let jobs: Vec<(usize, Resolution)> = cfg
        .resolutions
        .iter()
        .flat_map(|&r| (0..cfg.clips).map(move |i| (i, r)))
        .collect();
    let clips = jobs
        .par_iter()
        .map(|&(i, r)| synth_clip(i, r, contents[i], cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { clips })
}
