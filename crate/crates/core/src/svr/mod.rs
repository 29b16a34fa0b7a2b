//! Epsilon-insensitive support vector regression with an RBF kernel, and the
//! two-head SUR predictor built on it.

mod predictor;
mod smo;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use predictor::{
    head_targets, predict_sur_curve, train_sur_predictor, tune_head_params, Prediction, PredictorParams, SearchGrid, TrainedPredictor,
    MIN_TRAINING_CLIPS, PredictorMeta,
};
pub use smo::SolveReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub tol: f64,
    /// Iteration budget in units of the number of dual variables.
    pub max_passes: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 10.0,
            epsilon: 0.1,
            gamma: 1.0,
            tol: 1e-3,
            max_passes: 10_000,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.c, self.gamma, self.tol];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid(format!("C, gamma and tol must be positive: {self:?}")));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be >= 0: {}", self.epsilon)));
        }
        if self.max_passes == 0 {
            return Err(Error::invalid("max_passes must be positive"));
        }
        Ok(())
    }
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// A trained single-output regressor: `f(x) = sum_i beta_i k(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub dim: usize,
    pub gamma: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i - alpha_i*` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    /// Dual objective (maximization form) at the solution.
    pub objective: f64,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        svr_predict(self, x)
    }
}

/// Solves the epsilon-SVR dual by SMO.
pub fn svr_train(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    svr_train_with_report(x, y, params).map(|(m, _)| m)
}

pub fn svr_train_with_report(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<(SvrModel, SolveReport)> {
    params.validate()?;
    if x.is_empty() {
        return Err(Error::invalid("svr_train: no training rows"));
    }
    if x.len() != y.len() {
        return Err(Error::invalid(format!("svr_train: {} rows but {} targets", x.len(), y.len())));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("svr_train: inconsistent feature dimension"));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("svr_train: non-finite input"));
    }
    let n = x.len();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf_kernel(&x[i], &x[j], params.gamma);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let solution = smo::solve(&kernel, y, params);
    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for (i, &b) in solution.beta.iter().enumerate() {
        if b != 0.0 {
            support_vectors.push(x[i].clone());
            dual_coef.push(b);
        }
    }
    let model = SvrModel {
        dim,
        gamma: params.gamma,
        support_vectors,
        dual_coef,
        bias: solution.bias,
        objective: solution.report.objective_trace.last().copied().unwrap_or(0.0),
    };
    Ok((model, solution.report))
}

pub fn svr_predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim {
        return Err(Error::invalid(format!(
            "svr_predict: dimension {} does not match model {}",
            x.len(),
            model.dim
        )));
    }
    Ok(model
        .support_vectors
        .iter()
        .zip(&model.dual_coef)
        .map(|(sv, b)| b * rbf_kernel(sv, x, model.gamma))
        .sum::<f64>()
        + model.bias)
}
