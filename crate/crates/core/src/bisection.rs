//! Bisection JND measurement protocol.
//!
//! A subject compares the anchor clip with a probe clip and answers
//! "noticeable" (`true`) or not. The integer protocol searches
//! `[anchor+1, 51]` for the smallest noticeable QP; the idealized protocol
//! halves a real interval of width 51 each round, which gives the closed form
//! `Y = sum_l (1 - X_l) * 51 / 2^l`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::stream_rng;
use crate::stats::{JndSampleSet, Resolution};
use crate::{Error, Result, MAX_QP};

/// Number of comparison rounds; `ceil(log2(51))`.
pub const ROUNDS: usize = 6;
/// Initial JND interval ΔQP_0.
pub const INITIAL_INTERVAL: f64 = 51.0;

const MAX_REJECTIONS: usize = 100_000;

/// ΔQP_l = 51 / 2^l for round `l` in `1..=ROUNDS`.
pub fn interval_width(l: usize) -> Result<f64> {
    if !(1..=ROUNDS).contains(&l) {
        return Err(Error::invalid(format!("round {l} not in 1..={ROUNDS}")));
    }
    Ok(INITIAL_INTERVAL / f64::from(1u32 << l))
}

/// JND offset implied by a full response vector (`true` = noticeable).
pub fn closed_form_jnd(responses: &[bool]) -> Result<f64> {
    if responses.len() != ROUNDS {
        return Err(Error::invalid(format!(
            "expected {ROUNDS} responses, got {}",
            responses.len()
        )));
    }
    let mut y = 0.0;
    for (i, &noticed) in responses.iter().enumerate() {
        if !noticed {
            y += interval_width(i + 1)?;
        }
    }
    Ok(y)
}

/// Probability that a subject answers consistently with its latent JND at
/// round `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceSchedule {
    /// `p_l = 1 - 0.5 * (l-1)/(L-1) * noise`, noise in [0, 1].
    Linear { noise: f64 },
    Constant(f64),
    /// Explicit `p_1..p_L`.
    Table(Vec<f64>),
}

impl Default for ConfidenceSchedule {
    fn default() -> Self {
        ConfidenceSchedule::Linear { noise: 0.0 }
    }
}

impl ConfidenceSchedule {
    pub fn deterministic() -> Self {
        ConfidenceSchedule::Constant(1.0)
    }

    /// `p_l` for round `l` (1-based) of a protocol with `rounds` rounds.
    pub fn confidence(&self, l: usize, rounds: usize) -> f64 {
        match self {
            ConfidenceSchedule::Linear { noise } => {
                if rounds <= 1 {
                    1.0
                } else {
                    1.0 - 0.5 * (l - 1) as f64 / (rounds - 1) as f64 * noise
                }
            }
            ConfidenceSchedule::Constant(p) => *p,
            ConfidenceSchedule::Table(ps) => ps[(l - 1).min(ps.len() - 1)],
        }
    }

    pub fn validate(&self, rounds: usize) -> Result<()> {
        if let ConfidenceSchedule::Linear { noise } = self {
            if !(0.0..=1.0).contains(noise) {
                return Err(Error::invalid(format!("noise level {noise} not in [0, 1]")));
            }
        }
        if let ConfidenceSchedule::Table(ps) = self {
            if ps.is_empty() {
                return Err(Error::invalid("empty confidence table"));
            }
        }
        let ps: Vec<f64> = (1..=rounds).map(|l| self.confidence(l, rounds)).collect();
        if ps.iter().any(|p| !(0.5..=1.0).contains(p)) {
            return Err(Error::invalid("confidence outside [0.5, 1]"));
        }
        if ps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("confidence schedule must be non-increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectModel {
    pub latent_jnd: f64,
    pub schedule: ConfidenceSchedule,
    pub seed: u64,
}

impl SubjectModel {
    pub fn deterministic(latent_jnd: f64) -> Self {
        SubjectModel {
            latent_jnd,
            schedule: ConfidenceSchedule::deterministic(),
            seed: 0,
        }
    }

    fn answer(&self, truthful: bool, l: usize, rounds: usize, rng: &mut impl Rng) -> bool {
        let p = self.schedule.confidence(l, rounds);
        if p >= 1.0 || rng.random::<f64>() < p {
            truthful
        } else {
            !truthful
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionTrace {
    pub anchor_qp: u8,
    /// Probe QP shown at each round.
    pub probes: Vec<u8>,
    /// `true` = noticeable.
    pub responses: Vec<bool>,
    /// Nominal ΔQP_l of each round run.
    pub intervals: Vec<f64>,
    pub result_qp: u8,
}

/// Integer bisection over `[anchor+1, 51]` with the default six rounds.
pub fn run_bisection(subject: &SubjectModel, anchor_qp: u8) -> Result<BisectionTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(subject.seed);
    run_bisection_with(subject, anchor_qp, ROUNDS, &mut rng)
}

/// Integer bisection with an explicit round cap and RNG.
///
/// The subject's truthful answer at probe `j` is "noticeable" iff
/// `j >= round(latent)` (ties are noticeable). If the cap is hit before the
/// interval closes, the smallest QP still believed noticeable is returned.
pub fn run_bisection_with(
    subject: &SubjectModel,
    anchor_qp: u8,
    rounds: usize,
    rng: &mut impl Rng,
) -> Result<BisectionTrace> {
    if anchor_qp >= MAX_QP {
        return Err(Error::invalid(format!("anchor qp {anchor_qp} not in 0..=50")));
    }
    if !subject.latent_jnd.is_finite() || subject.latent_jnd <= f64::from(anchor_qp) {
        return Err(Error::invalid(format!(
            "latent jnd {} must exceed anchor {anchor_qp}",
            subject.latent_jnd
        )));
    }
    if rounds == 0 {
        return Err(Error::invalid("at least one round is required"));
    }
    subject.schedule.validate(rounds)?;

    let threshold = subject
        .latent_jnd
        .round()
        .clamp(f64::from(anchor_qp + 1), f64::from(MAX_QP)) as u8;
    let (mut lo, mut hi) = (anchor_qp + 1, MAX_QP);
    let mut trace = BisectionTrace {
        anchor_qp,
        probes: Vec::with_capacity(rounds),
        responses: Vec::with_capacity(rounds),
        intervals: Vec::with_capacity(rounds),
        result_qp: hi,
    };
    let mut l = 0;
    while lo < hi && l < rounds {
        l += 1;
        let mid = lo + (hi - lo) / 2;
        let noticed = subject.answer(mid >= threshold, l, rounds, rng);
        if noticed {
            hi = mid;
        } else {
            lo = mid + 1;
        }
        trace.probes.push(mid);
        trace.responses.push(noticed);
        trace.intervals.push(INITIAL_INTERVAL / 2f64.powi(l as i32));
    }
    trace.result_qp = hi;
    Ok(trace)
}

/// Responses of the idealized real-valued protocol over `[0, 51]`.
///
/// Round `l` probes `offset + ΔQP_l`; a truthful "noticeable" answer means
/// the probe is at or beyond the latent JND.
pub fn idealized_responses(subject: &SubjectModel, rng: &mut impl Rng) -> Vec<bool> {
    let mut offset = 0.0;
    (1..=ROUNDS)
        .map(|l| {
            let width = INITIAL_INTERVAL / 2f64.powi(l as i32);
            let probe = offset + width;
            let noticed = subject.answer(probe >= subject.latent_jnd, l, ROUNDS, rng);
            if !noticed {
                offset = probe;
            }
            noticed
        })
        .collect()
}

/// Parameters of a simulated subjective-test campaign for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    #[serde(default = "default_clip_id")]
    pub clip_id: String,
    #[serde(default = "default_resolution")]
    pub resolution: Resolution,
    #[serde(default = "default_order")]
    pub jnd_order: u8,
    pub mu: f64,
    pub sigma: f64,
    pub subjects: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub anchor_qp: u8,
    /// η of the linear confidence schedule; ignored when `schedule` is set.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub schedule: Option<ConfidenceSchedule>,
    pub seed: u64,
}

fn default_clip_id() -> String {
    "sim".to_owned()
}
fn default_resolution() -> Resolution {
    Resolution::R1080p
}
fn default_order() -> u8 {
    1
}
fn default_rounds() -> usize {
    ROUNDS
}

impl CampaignSpec {
    pub fn new(mu: f64, sigma: f64, subjects: usize, seed: u64) -> Self {
        CampaignSpec {
            clip_id: default_clip_id(),
            resolution: default_resolution(),
            jnd_order: 1,
            mu,
            sigma,
            subjects,
            rounds: ROUNDS,
            anchor_qp: 0,
            noise: 0.0,
            schedule: None,
            seed,
        }
    }

    pub fn schedule(&self) -> ConfidenceSchedule {
        self.schedule
            .clone()
            .unwrap_or(ConfidenceSchedule::Linear { noise: self.noise })
    }
}

/// Draws latent JNDs from `Normal(mu, sigma^2)` truncated to `(anchor, 51]`
/// and runs one bisection per subject. Subject `m` uses stream `m` of the
/// campaign seed, so the result does not depend on scheduling.
pub fn simulate_campaign(spec: &CampaignSpec) -> Result<JndSampleSet> {
    let anchor = f64::from(spec.anchor_qp);
    if spec.subjects == 0 {
        return Err(Error::invalid("campaign needs at least one subject"));
    }
    if !(spec.mu > anchor && spec.mu < f64::from(MAX_QP)) {
        return Err(Error::invalid(format!(
            "mu {} not in ({anchor}, {MAX_QP})",
            spec.mu
        )));
    }
    let latent_law = Normal::new(spec.mu, spec.sigma)
        .map_err(|e| Error::invalid(format!("sigma {}: {e}", spec.sigma)))?;
    let schedule = spec.schedule();
    schedule.validate(spec.rounds)?;

    let samples = (0..spec.subjects)
        .into_par_iter()
        .map(|m| {
            let mut rng = stream_rng(spec.seed, m as u64);
            let latent = (0..MAX_REJECTIONS)
                .map(|_| latent_law.sample(&mut rng))
                .find(|&y| y > anchor && y <= f64::from(MAX_QP))
                .ok_or_else(|| Error::invalid("latent truncation rejected every draw"))?;
            let subject = SubjectModel {
                latent_jnd: latent,
                schedule: schedule.clone(),
                seed: rng.random(),
            };
            let mut subject_rng = ChaCha8Rng::seed_from_u64(subject.seed);
            let trace = run_bisection_with(&subject, spec.anchor_qp, spec.rounds, &mut subject_rng)?;
            Ok(f64::from(trace.result_qp))
        })
        .collect::<Result<Vec<f64>>>()?;

    JndSampleSet::new(
        spec.clip_id.clone(),
        spec.resolution,
        spec.jnd_order,
        spec.anchor_qp,
        samples,
    )
}
