use serde::{Deserialize, Serialize};

use super::{svr_predict, svr_train, SvrModel, SvrParams};
use crate::eval::kfold_split;
use crate::features::{FeatureVector, Standardizer, FEATURE_DIM};
use crate::stats::{jnd_point, JndPoint, Resolution, SurCurve, SurModel, JND_SUR_TARGET, SIGMA_FLOOR};
use crate::{Error, Result};

pub const MIN_TRAINING_CLIPS: usize = 10;

/// Hyperparameters of the μ head and the log σ head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorParams {
    pub mu: SvrParams,
    pub log_sigma: SvrParams,
}

impl Default for PredictorParams {
    fn default() -> Self {
        let gamma = 1.0 / FEATURE_DIM as f64;
        PredictorParams {
            mu: SvrParams {
                c: 10.0,
                epsilon: 0.5,
                gamma,
                tol: 1e-3,
                max_passes: 10_000,
            },
            log_sigma: SvrParams {
                c: 10.0,
                epsilon: 0.05,
                gamma,
                tol: 1e-3,
                max_passes: 10_000,
            },
        }
    }
}

/// Candidate values for inner-CV hyperparameter search. Gammas are given
/// as multiples of `1 / dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchGrid {
    pub c: Vec<f64>,
    pub gamma_factors: Vec<f64>,
    pub inner_folds: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            c: vec![0.1, 1.0, 10.0, 100.0],
            gamma_factors: vec![0.5, 1.0, 2.0],
            inner_folds: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictorMeta {
    pub jnd_order: Option<u8>,
    pub resolution: Option<Resolution>,
    pub fold: Option<usize>,
    pub training_clips: usize,
}

/// Two SVR heads over standardized features: μ and ln σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPredictor {
    pub standardizer: Standardizer,
    pub mu_head: SvrModel,
    pub log_sigma_head: SvrModel,
    pub params: PredictorParams,
    pub meta: PredictorMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub model: SurModel,
    pub curve: SurCurve,
    pub jnd: JndPoint,
}

impl TrainedPredictor {
    /// Raw (μ, σ) for a feature vector; σ is floored.
    pub fn predict_params(&self, features: &FeatureVector) -> Result<(f64, f64)> {
        let x = self.standardizer.apply(features.values())?;
        let mu = f64::from(features.anchor_qp) + svr_predict(&self.mu_head, &x)?;
        let sigma = svr_predict(&self.log_sigma_head, &x)?.exp().max(SIGMA_FLOOR);
        Ok((mu, sigma))
    }
}

fn check_alignment(features: &[(String, FeatureVector)], truths: &[(String, SurModel)]) -> Result<()> {
    if features.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} ground-truth models",
            features.len(),
            truths.len()
        )));
    }
    if let Some(((a, _), (b, _))) = features.iter().zip(truths).find(|((a, _), (b, _))| a != b) {
        return Err(Error::invalid(format!("misaligned clips: `{a}` vs `{b}`")));
    }
    Ok(())
}

fn standardized(rows: &[&[f64]]) -> Result<(Standardizer, Vec<Vec<f64>>)> {
    let s = Standardizer::fit(rows)?;
    let x = rows.iter().map(|r| s.apply(r)).collect::<Result<Vec<_>>>()?;
    Ok((s, x))
}

/// Regression targets of the two heads: μ relative to the feature anchor,
/// and ln σ.
pub fn head_targets(features: &[(String, FeatureVector)], truths: &[(String, SurModel)]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_alignment(features, truths)?;
    Ok(features
        .iter()
        .zip(truths)
        .map(|((_, f), (_, m))| (m.mu - f64::from(f.anchor_qp), m.sigma.ln()))
        .unzip())
}

/// Fits the μ and ln σ heads on clip-aligned features and ground-truth
/// models.
pub fn train_sur_predictor(
    features: &[(String, FeatureVector)],
    truths: &[(String, SurModel)],
    params: &PredictorParams,
) -> Result<TrainedPredictor> {
    let (mu, log_sigma) = head_targets(features, truths)?;
    if features.len() < MIN_TRAINING_CLIPS {
        return Err(Error::invalid(format!(
            "need at least {MIN_TRAINING_CLIPS} training clips, got {}",
            features.len()
        )));
    }
    let rows: Vec<&[f64]> = features.iter().map(|(_, f)| f.values()).collect();
    let (standardizer, x) = standardized(&rows)?;
    Ok(TrainedPredictor {
        standardizer,
        mu_head: svr_train(&x, &mu, &params.mu)?,
        log_sigma_head: svr_train(&x, &log_sigma, &params.log_sigma)?,
        params: *params,
        meta: PredictorMeta {
            training_clips: features.len(),
            ..PredictorMeta::default()
        },
    })
}

/// Picks C and gamma for one head by inner k-fold CV (mean absolute error)
/// over the given rows only. Epsilon, tol and max_passes come from `base`.
pub fn tune_head_params(rows: &[&[f64]], targets: &[f64], base: &SvrParams, grid: &SearchGrid, seed: u64) -> Result<SvrParams> {
    if rows.len() != targets.len() || rows.is_empty() {
        return Err(Error::invalid("tune_head_params: rows and targets must align"));
    }
    if grid.c.is_empty() || grid.gamma_factors.is_empty() {
        return Err(Error::invalid("empty search grid"));
    }
    let dim = rows[0].len() as f64;
    let ids: Vec<String> = (0..rows.len()).map(|i| i.to_string()).collect();
    let folds = kfold_split(&ids, grid.inner_folds, seed)?;
    let mut best: Option<(f64, SvrParams)> = None;
    for &c in &grid.c {
        for &g in &grid.gamma_factors {
            let candidate = SvrParams {
                c,
                gamma: g / dim,
                ..*base
            };
            let mut abs_err = 0.0;
            for fold in 0..folds.k {
                let (train, test): (Vec<usize>, Vec<usize>) = (0..rows.len()).partition(|&i| folds.fold_of[i] != fold);
                let train_rows: Vec<&[f64]> = train.iter().map(|&i| rows[i]).collect();
                let (s, x) = standardized(&train_rows)?;
                let y: Vec<f64> = train.iter().map(|&i| targets[i]).collect();
                let model = svr_train(&x, &y, &candidate)?;
                for &i in &test {
                    abs_err += (svr_predict(&model, &s.apply(rows[i])?)? - targets[i]).abs();
                }
            }
            let mae = abs_err / rows.len() as f64;
            if best.as_ref().is_none_or(|(b, _)| mae < *b) {
                best = Some((mae, candidate));
            }
        }
    }
    Ok(best.expect("non-empty grid").1)
}

/// Predicted SUR model, its curve on `[anchor+1, 51]` and the 75% JND point.
pub fn predict_sur_curve(predictor: &TrainedPredictor, features: &FeatureVector, anchor_qp: u8) -> Result<Prediction> {
    let (mu, sigma) = predictor.predict_params(features)?;
    let model = SurModel::new(mu, sigma, anchor_qp)?;
    Ok(Prediction {
        curve: model.curve(),
        jnd: jnd_point(&model, JND_SUR_TARGET)?,
        model,
    })
}
