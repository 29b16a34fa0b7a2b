use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kfold_split, ClipData, Corpus, FoldAssignment};
use crate::features::{build_feature_vector, FeatureVector, DEFAULT_SIGNIFICANT_FRACTION};
use crate::rng::derive_seed;
use crate::stats::{delta_sur, jnd_point, Resolution, SurCurve, SurModel, JND_SUR_TARGET};
use crate::svr::{head_targets, predict_sur_curve, train_sur_predictor, tune_head_params, PredictorParams, SearchGrid, TrainedPredictor};
use crate::{Error, Result, MAX_QP};

/// Reference used to anchor the 2nd and 3rd JND predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// Measured previous JND.
    GroundTruthRef,
    /// Previous JND as predicted by the same fold's predictor.
    PredictedRef,
    /// Always the pristine reference, full QP range.
    SameRef,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::GroundTruthRef, Setting::PredictedRef, Setting::SameRef];

    pub fn as_str(self) -> &'static str {
        match self {
            Setting::GroundTruthRef => "ground_truth_ref",
            Setting::PredictedRef => "predicted_ref",
            Setting::SameRef => "same_ref",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown setting `{s}`")))
    }
}

/// Label used for order-1 cells, which have no setting.
pub const ORDER_ONE_LABEL: &str = "reference";

fn setting_label(s: Option<Setting>) -> &'static str {
    s.map_or(ORDER_ONE_LABEL, Setting::as_str)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorChoice {
    #[default]
    Svr,
    /// Returns the ground-truth model; for checking the metric plumbing.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    pub seed: u64,
    /// Resolutions to evaluate; empty means every resolution in the corpus.
    pub resolutions: Vec<Resolution>,
    pub orders: Vec<u8>,
    pub settings: Vec<Setting>,
    pub significant_fraction: f64,
    pub predictor: PredictorParams,
    pub predictor_choice: PredictorChoice,
    /// Inner-CV hyperparameter search on training folds; off when absent.
    pub search: Option<SearchGrid>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 5,
            seed: 0,
            resolutions: vec![],
            orders: vec![1, 2, 3],
            settings: Setting::ALL.to_vec(),
            significant_fraction: DEFAULT_SIGNIFICANT_FRACTION,
            predictor: PredictorParams::default(),
            predictor_choice: PredictorChoice::Svr,
            search: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.iter().any(|o| !(1..=3).contains(o)) {
            return Err(Error::invalid(format!("orders must be in 1..=3: {:?}", self.orders)));
        }
        if !(self.significant_fraction > 0.0 && self.significant_fraction <= 1.0) {
            return Err(Error::invalid("significant_fraction must be in (0, 1]"));
        }
        self.predictor.mu.validate()?;
        self.predictor.log_sigma.validate()
    }
}

/// Test-fold outcome for one clip in one (resolution, order, setting) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub resolution: Resolution,
    pub jnd_order: u8,
    pub setting: Option<Setting>,
    pub fold: usize,
    pub anchor_qp: u8,
    pub truth_mu: f64,
    pub truth_sigma: f64,
    pub truth_jnd: u8,
    pub pred_mu: f64,
    pub pred_sigma: f64,
    pub pred_jnd: u8,
    pub pred_jnd_real: f64,
    pub delta_sur: f64,
    pub delta_qp: f64,
    /// ΔSUR between the measured step curve and its fitted model.
    pub empirical_delta_sur: f64,
}

impl ClipRecord {
    pub fn setting_label(&self) -> &'static str {
        setting_label(self.setting)
    }

    pub fn predicted_model(&self) -> SurModel {
        SurModel {
            mu: self.pred_mu,
            sigma: self.pred_sigma,
            anchor_qp: self.anchor_qp,
        }
    }

    pub fn truth_model(&self) -> SurModel {
        SurModel {
            mu: self.truth_mu,
            sigma: self.truth_sigma,
            anchor_qp: self.anchor_qp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub resolution: Resolution,
    pub jnd_order: u8,
    pub setting: Option<Setting>,
    pub clips: usize,
    pub mean_delta_sur: f64,
    pub mean_delta_qp: f64,
    pub mean_empirical_delta_sur: f64,
    /// QP range over which ΔSUR was taken.
    pub qp_range: String,
}

impl CellSummary {
    pub fn setting_label(&self) -> &'static str {
        setting_label(self.setting)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub folds: Vec<(Resolution, FoldAssignment)>,
    pub records: Vec<ClipRecord>,
    pub summaries: Vec<CellSummary>,
    pub skipped: Vec<String>,
    pub anchor_warnings: Vec<String>,
}

impl EvalReport {
    pub fn summary(&self, resolution: Resolution, order: u8, setting: Option<Setting>) -> Option<&CellSummary> {
        self.summaries
            .iter()
            .find(|s| s.resolution == resolution && s.jnd_order == order && s.setting == setting)
    }
}

/// Result of one (order, setting) pass over all folds of one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRun {
    pub jnd_order: u8,
    pub setting: Option<Setting>,
    /// One record per clip, in clip order.
    pub records: Vec<ClipRecord>,
    /// `fold_predictions[f][i]`: integer JND predicted for clip `i` by the
    /// predictor trained on fold `f`'s training clips.
    pub fold_predictions: Vec<Vec<u8>>,
}

struct FoldOutcome {
    records: Vec<(usize, ClipRecord)>,
    predictions: Vec<u8>,
}

fn resolve_anchor(
    clip: &ClipData,
    index: usize,
    fold: usize,
    order: u8,
    setting: Option<Setting>,
    prev: Option<&OrderRun>,
) -> Result<u8> {
    if order == 1 {
        return Ok(0);
    }
    match setting {
        None => Err(Error::Pipeline(format!("order {order} needs a reference setting"))),
        Some(Setting::SameRef) => Ok(0),
        Some(Setting::GroundTruthRef) => clip
            .jnd_sets
            .get(&order)
            .map(|s| s.anchor_qp)
            .ok_or_else(|| Error::Pipeline(format!("{}: no order-{order} JND samples", clip.clip_id))),
        Some(Setting::PredictedRef) => {
            let prev = prev
                .filter(|p| p.jnd_order + 1 == order)
                .ok_or_else(|| {
                    Error::Pipeline(format!(
                        "predicted_ref order {order}: missing order-{} predictions",
                        order - 1
                    ))
                })?;
            let q = prev
                .fold_predictions
                .get(fold)
                .and_then(|p| p.get(index))
                .ok_or_else(|| {
                    Error::Pipeline(format!(
                        "predicted_ref order {order}: no order-{} prediction for {} in fold {fold}",
                        order - 1,
                        clip.clip_id
                    ))
                })?;
            Ok((*q).min(MAX_QP - 1))
        }
    }
}

fn features(clip: &ClipData, anchor: u8, config: &EvalConfig) -> Result<FeatureVector> {
    build_feature_vector(&clip.ladder, &clip.masking, anchor, config.significant_fraction, None)
}

fn train_fold(
    clips: &[&ClipData],
    train: &[usize],
    feats: &[FeatureVector],
    truths: &[SurModel],
    config: &EvalConfig,
    search_key: &str,
) -> Result<TrainedPredictor> {
    let feature_rows: Vec<(String, FeatureVector)> =
        train.iter().map(|&i| (clips[i].clip_id.clone(), feats[i].clone())).collect();
    let truth_rows: Vec<(String, SurModel)> = train.iter().map(|&i| (clips[i].clip_id.clone(), truths[i])).collect();
    let mut params = config.predictor;
    if let Some(grid) = &config.search {
        let rows: Vec<&[f64]> = train.iter().map(|&i| feats[i].values()).collect();
        let (mu, ls) = head_targets(&feature_rows, &truth_rows)?;
        params.mu = tune_head_params(&rows, &mu, &params.mu, grid, derive_seed(config.seed, &format!("{search_key}/mu")))?;
        params.log_sigma = tune_head_params(
            &rows,
            &ls,
            &params.log_sigma,
            grid,
            derive_seed(config.seed, &format!("{search_key}/log_sigma")),
        )?;
    }
    train_sur_predictor(&feature_rows, &truth_rows, &params)
}

/// Cross-validated predictions of one JND order under one setting.
///
/// Anchors are resolved per clip and per fold: training clips of fold `f`
/// under `PredictedRef` are anchored at fold `f`'s own previous-order
/// predictions, so no test clip influences training.
pub fn evaluate_order(
    clips: &[&ClipData],
    folds: &FoldAssignment,
    order: u8,
    setting: Option<Setting>,
    prev: Option<&OrderRun>,
    config: &EvalConfig,
) -> Result<OrderRun> {
    if folds.fold_of.len() != clips.len() {
        return Err(Error::Pipeline("fold assignment does not match clip list".into()));
    }
    let truths: Vec<SurModel> = clips.iter().map(|c| c.truth(order)).collect::<Result<_>>()?;
    let resolution = clips.first().map(|c| c.resolution).unwrap_or(Resolution::R1080p);

    let outcomes: Vec<FoldOutcome> = (0..folds.k)
        .into_par_iter()
        .map(|fold| -> Result<FoldOutcome> {
            let anchors: Vec<u8> = clips
                .iter()
                .enumerate()
                .map(|(i, c)| resolve_anchor(c, i, fold, order, setting, prev))
                .collect::<Result<_>>()?;
            let feats: Vec<FeatureVector> = clips
                .iter()
                .zip(&anchors)
                .map(|(c, &a)| features(c, a, config))
                .collect::<Result<_>>()?;
            let train = folds.train_indices(fold);
            let predictor = match config.predictor_choice {
                PredictorChoice::Svr => {
                    let key = format!("search/{resolution}/{order}/{}/{fold}", setting_label(setting));
                    Some(train_fold(clips, &train, &feats, &truths, config, &key)?)
                }
                PredictorChoice::Oracle => None,
            };

            let mut predictions = Vec::with_capacity(clips.len());
            let mut records = Vec::new();
            for (i, clip) in clips.iter().enumerate() {
                let anchor = anchors[i];
                let truth = truths[i].with_anchor(anchor);
                let pred_model = match &predictor {
                    Some(p) => predict_sur_curve(p, &feats[i], anchor)?.model,
                    None => truth,
                };
                let pred_jnd = jnd_point(&pred_model, JND_SUR_TARGET)?;
                predictions.push(pred_jnd.qp_int);
                if folds.fold_of[i] != fold {
                    continue;
                }
                let truth_jnd = jnd_point(&truth, JND_SUR_TARGET)?;
                let set = &clip.jnd_sets[&order];
                records.push((
                    i,
                    ClipRecord {
                        clip_id: clip.clip_id.clone(),
                        resolution: clip.resolution,
                        jnd_order: order,
                        setting,
                        fold,
                        anchor_qp: anchor,
                        truth_mu: truth.mu,
                        truth_sigma: truth.sigma,
                        truth_jnd: truth_jnd.qp_int,
                        pred_mu: pred_model.mu,
                        pred_sigma: pred_model.sigma,
                        pred_jnd: pred_jnd.qp_int,
                        pred_jnd_real: pred_jnd.qp,
                        delta_sur: delta_sur(&pred_model.curve(), &truth.curve())?,
                        delta_qp: f64::from(pred_jnd.qp_int.abs_diff(truth_jnd.qp_int)),
                        empirical_delta_sur: delta_sur(&SurCurve::empirical(set)?, &truths[i].curve())?,
                    },
                ));
            }
            Ok(FoldOutcome { records, predictions })
        })
        .collect::<Result<_>>()?;

    let mut indexed: Vec<(usize, ClipRecord)> = Vec::with_capacity(clips.len());
    let mut fold_predictions = Vec::with_capacity(folds.k);
    for o in outcomes {
        indexed.extend(o.records);
        fold_predictions.push(o.predictions);
    }
    indexed.sort_by_key(|(i, _)| *i);
    Ok(OrderRun {
        jnd_order: order,
        setting,
        records: indexed.into_iter().map(|(_, r)| r).collect(),
        fold_predictions,
    })
}

fn summarize(records: &[ClipRecord]) -> Option<CellSummary> {
    let first = records.first()?;
    let n = records.len() as f64;
    let qp_range = match first.setting {
        Some(Setting::SameRef) => "[1,51]".to_owned(),
        None => "[1,51]".to_owned(),
        _ => "[anchor+1,51]".to_owned(),
    };
    Some(CellSummary {
        resolution: first.resolution,
        jnd_order: first.jnd_order,
        setting: first.setting,
        clips: records.len(),
        mean_delta_sur: records.iter().map(|r| r.delta_sur).sum::<f64>() / n,
        mean_delta_qp: records.iter().map(|r| r.delta_qp).sum::<f64>() / n,
        mean_empirical_delta_sur: records.iter().map(|r| r.empirical_delta_sur).sum::<f64>() / n,
        qp_range,
    })
}

struct ResolutionOutcome {
    folds: Option<FoldAssignment>,
    cells: Vec<Vec<ClipRecord>>,
    skipped: Vec<String>,
}

fn evaluate_resolution(corpus: &Corpus, resolution: Resolution, config: &EvalConfig) -> Result<ResolutionOutcome> {
    let clips = corpus.clips_at(resolution);
    let mut out = ResolutionOutcome {
        folds: None,
        cells: vec![],
        skipped: vec![],
    };
    let available = clips.iter().map(|c| c.contiguous_orders()).min().unwrap_or(0);
    let wanted = config.orders.iter().copied().max().unwrap_or(0);
    if available == 0 || wanted == 0 {
        out.skipped.push(format!("{resolution}: no complete order-1 panels"));
        return Ok(out);
    }
    // each training split must hold MIN_TRAINING_CLIPS clips
    let min_clips = config.k.max(crate::svr::MIN_TRAINING_CLIPS * config.k / (config.k - 1).max(1) + 1);
    if clips.len() < min_clips {
        out.skipped.push(format!("{resolution}: only {} clips", clips.len()));
        return Ok(out);
    }
    let ids: Vec<String> = clips.iter().map(|c| c.clip_id.clone()).collect();
    let folds = kfold_split(&ids, config.k, derive_seed(config.seed, &format!("folds/{resolution}")))?;

    let first = evaluate_order(&clips, &folds, 1, None, None, config)?;
    if config.orders.contains(&1) {
        out.cells.push(first.records.clone());
    }
    for &setting in &config.settings {
        let mut prev = first.clone();
        for order in 2..=wanted {
            if order > available {
                if config.orders.contains(&order) {
                    out.skipped.push(format!("{resolution} order {order} {setting}: missing JND panels"));
                }
                break;
            }
            let run = evaluate_order(&clips, &folds, order, Some(setting), Some(&prev), config)?;
            if config.orders.contains(&order) {
                out.cells.push(run.records.clone());
            }
            prev = run;
        }
    }
    out.folds = Some(folds);
    Ok(out)
}

/// Every requested (resolution, order, setting) cell, evaluated
/// independently per resolution.
pub fn run_full_evaluation(corpus: &Corpus, config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    corpus.check_unique_ids()?;
    let resolutions: Vec<Resolution> = if config.resolutions.is_empty() {
        corpus.resolutions()
    } else {
        config.resolutions.clone()
    };
    let outcomes: Vec<(Resolution, ResolutionOutcome)> = resolutions
        .par_iter()
        .map(|&r| evaluate_resolution(corpus, r, config).map(|o| (r, o)))
        .collect::<Result<_>>()?;

    let mut report = EvalReport {
        config: config.clone(),
        folds: vec![],
        records: vec![],
        summaries: vec![],
        skipped: vec![],
        anchor_warnings: corpus.anchor_mismatches(),
    };
    for (resolution, o) in outcomes {
        if let Some(f) = o.folds {
            report.folds.push((resolution, f));
        }
        for cell in o.cells {
            if let Some(s) = summarize(&cell) {
                report.summaries.push(s);
            }
            report.records.extend(cell);
        }
        report.skipped.extend(o.skipped);
    }
    Ok(report)
}
