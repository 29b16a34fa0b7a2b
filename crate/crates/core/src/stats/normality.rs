//! Jarque-Bera normality testing of JND panels.

use std::collections::BTreeMap;

use super::{JndSampleSet, Resolution};
use crate::{Error, Result};

/// Smallest panel for which skewness and kurtosis are estimated.
pub const MIN_JB_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityResult {
    pub statistic: f64,
    pub critical_value: f64,
    pub passed: bool,
    pub alpha: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Upper `1 - alpha` quantile of the chi-square distribution with 2 dof.
pub fn chi2_2dof_quantile(alpha: f64) -> f64 {
    -2.0 * alpha.ln()
}

/// `JB = M/6 * (S^2 + K^2/4)` with population (biased) moment estimates.
///
/// A zero-variance panel has undefined skewness; it is reported with an
/// infinite statistic and fails the test.
pub fn jarque_bera(set: &JndSampleSet, alpha: f64) -> Result<NormalityResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} not in (0, 1)")));
    }
    let ys = set.samples();
    let n = ys.len();
    if n < MIN_JB_SAMPLES {
        return Err(Error::invalid(format!(
            "{}: jarque-bera needs at least {MIN_JB_SAMPLES} samples, got {n}",
            set.clip_id
        )));
    }
    let nf = n as f64;
    let mean = ys.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for y in ys {
        let d = y - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;

    let critical_value = chi2_2dof_quantile(alpha);
    if m2 <= 0.0 {
        return Ok(NormalityResult {
            statistic: f64::INFINITY,
            critical_value,
            passed: false,
            alpha,
            skewness: f64::NAN,
            excess_kurtosis: f64::NAN,
        });
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let statistic = nf / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    Ok(NormalityResult {
        statistic,
        critical_value,
        passed: statistic < critical_value,
        alpha,
        skewness,
        excess_kurtosis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassRate {
    pub resolution: Resolution,
    pub jnd_order: u8,
    pub passed: usize,
    pub tested: usize,
    /// Sets too small to test; excluded from `tested`.
    pub skipped: usize,
}

impl PassRate {
    pub fn fraction(&self) -> f64 {
        self.passed as f64 / self.tested as f64
    }

    pub fn percent(&self) -> f64 {
        100.0 * self.fraction()
    }
}

/// Pass rates grouped by (resolution, JND order). Groups with nothing
/// testable are omitted.
pub fn normality_pass_rate(dataset: &[JndSampleSet], alpha: f64) -> Result<Vec<PassRate>> {
    if dataset.is_empty() {
        return Err(Error::invalid("normality_pass_rate: empty dataset"));
    }
    let mut groups: BTreeMap<(Resolution, u8), (usize, usize, usize)> = BTreeMap::new();
    for set in dataset {
        let entry = groups.entry((set.resolution, set.jnd_order)).or_default();
        if set.len() < MIN_JB_SAMPLES {
            entry.2 += 1;
            continue;
        }
        let r = jarque_bera(set, alpha)?;
        entry.1 += 1;
        if r.passed {
            entry.0 += 1;
        }
    }
    Ok(groups
        .into_iter()
        .filter(|(_, (_, tested, _))| *tested > 0)
        .map(|((resolution, jnd_order), (passed, tested, skipped))| PassRate {
            resolution,
            jnd_order,
            passed,
            tested,
            skipped,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Three-point law with mass 1/6, 2/3, 1/6: symmetric and kurtosis exactly 3.
    fn zero_moment_samples() -> Vec<f64> {
        let mut v = vec![27.0, 27.0, 33.0, 33.0];
        v.extend(std::iter::repeat_n(30.0, 8));
        v
    }

    fn set(r: Resolution, order: u8, ys: Vec<f64>) -> JndSampleSet {
        JndSampleSet::new("c", r, order, 0, ys).unwrap()
    }

    #[test]
    fn critical_value_at_five_percent() {
        assert_abs_diff_eq!(chi2_2dof_quantile(0.05), 5.991_464_547_107_98, epsilon = 1e-12);
    }

    #[test]
    fn zero_skew_zero_kurtosis_passes() {
        let r = jarque_bera(&set(Resolution::R720p, 1, zero_moment_samples()), 0.05).unwrap();
        assert!(r.statistic.abs() < 1e-12, "{r:?}");
        assert!(r.passed);
    }

    #[test]
    fn uniform_sample_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        // brute-force moment sums, written independently of jarque_bera
        let n = u.len() as f64;
        let m = u.iter().sum::<f64>() / n;
        let c = |k: i32| u.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n;
        let s = c(3) / c(2).powf(1.5);
        let k = c(4) / c(2).powi(2) - 3.0;
        let expect = n / 6.0 * (s * s + k * k / 4.0);
        assert!((expect - 60.0).abs() < 15.0, "oracle {expect}");

        let ys: Vec<f64> = u.iter().map(|x| 10.0 + 30.0 * x).collect();
        let r = jarque_bera(&set(Resolution::R720p, 1, ys), 0.05).unwrap();
        assert_abs_diff_eq!(r.statistic, expect, epsilon = 1e-8 * expect);
        assert!(!r.passed);
    }

    #[test]
    fn small_normal_panel_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let n = Normal::new(30.0, 3.0).unwrap();
        let ys: Vec<f64> = (0..30).map(|_| n.sample(&mut rng)).collect();
        let r = jarque_bera(&set(Resolution::R1080p, 1, ys), 0.05).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.statistic < 2.0, "{r:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = set(Resolution::R720p, 1, vec![20.0; 7]);
        assert!(jarque_bera(&s, 0.05).is_err());
        let s = set(Resolution::R720p, 1, zero_moment_samples());
        assert!(jarque_bera(&s, 0.0).is_err());
        assert!(jarque_bera(&s, 1.0).is_err());
    }

    #[test]
    fn constant_panel_fails() {
        let r = jarque_bera(&set(Resolution::R720p, 1, vec![20.0; 10]), 0.05).unwrap();
        assert!(!r.passed);
        assert!(r.statistic.is_infinite());
    }

    #[test]
    fn pass_rate_grouping() {
        let mut data: Vec<_> = (0..9)
            .map(|_| set(Resolution::R540p, 2, zero_moment_samples()))
            .collect();
        data.push(set(Resolution::R540p, 2, vec![20.0; 10]));
        data.push(set(Resolution::R360p, 1, zero_moment_samples()));
        data.push(set(Resolution::R1080p, 3, vec![20.0; 4]));
        let rates = normality_pass_rate(&data, 0.05).unwrap();
        assert_eq!(rates.len(), 2);
        let g = rates.iter().find(|r| r.resolution == Resolution::R540p).unwrap();
        assert_eq!((g.passed, g.tested), (9, 10));
        assert_abs_diff_eq!(g.percent(), 90.0);
        let g = rates.iter().find(|r| r.resolution == Resolution::R360p).unwrap();
        assert_eq!(g.percent(), 100.0);
        assert!(normality_pass_rate(&[], 0.05).is_err());
    }
}
