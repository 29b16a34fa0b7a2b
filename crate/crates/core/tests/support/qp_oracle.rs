//! Dense reference solver for the epsilon-SVR dual, independent of SMO.
//!
//! Accelerated projected gradient (FISTA with restarts) on the 2n-variable
//! box/hyperplane-constrained QP, followed by an active-set polish that
//! solves the KKT system of the identified free set exactly.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub struct OracleSolution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    /// Whether the exact active-set polish was accepted.
    pub polished: bool,
}

pub struct Fixture {
    pub name: &'static str,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
}

fn gram(x: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| rbf(&x[i], &x[j], gamma))
}

/// `y'b - eps |b|_1 - 1/2 b'Kb`
pub fn dual_objective(k: &DMatrix<f64>, y: &[f64], eps: f64, beta: &[f64]) -> f64 {
    let b = DVector::from_column_slice(beta);
    let yv = DVector::from_column_slice(y);
    yv.dot(&b) - eps * b.iter().map(|v| v.abs()).sum::<f64>() - 0.5 * (b.transpose() * k * &b)[(0, 0)]
}

/// Euclidean projection onto `{0 <= a <= c, z'a = 0}`.
fn project(v: &[f64], z: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> { v.iter().zip(z).map(|(vi, zi)| (vi - lambda * zi).clamp(0.0, c)).collect() };
    let residual = |lambda: f64| -> f64 { v.iter().zip(z).map(|(vi, zi)| (vi - lambda * zi).clamp(0.0, c) * zi).sum() };
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    // residual is non-increasing in lambda
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn bias_from_bounds(k: &DMatrix<f64>, y: &[f64], eps: f64, c: f64, beta: &[f64]) -> f64 {
    // every i gives an interval for b; pick its midpoint
    let n = y.len();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let kb: f64 = (0..n).map(|j| k[(i, j)] * beta[j]).sum();
        let r = y[i] - kb;
        if beta[i] >= c {
            hi = hi.min(r - eps);
        } else if beta[i] <= -c {
            lo = lo.max(r + eps);
        } else if beta[i] == 0.0 {
            lo = lo.max(r - eps);
            hi = hi.min(r + eps);
        }
    }
    0.5 * (lo + hi)
}

pub fn solve(x: &[Vec<f64>], y: &[f64], c: f64, eps: f64, gamma: f64) -> OracleSolution {
    let n = y.len();
    let k = gram(x, gamma);
    let len = 2 * n;
    let z: Vec<f64> = (0..len).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..len).map(|t| if t < n { eps - y[t] } else { eps + y[t - n] }).collect();
    let qa = |a: &[f64]| -> Vec<f64> {
        let beta: Vec<f64> = (0..n).map(|i| a[i] - a[i + n]).collect();
        let kb: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[(i, j)] * beta[j]).sum()).collect();
        (0..len).map(|t| if t < n { kb[t] } else { -kb[t - n] }).collect()
    };
    let f = |a: &[f64]| -> f64 {
        let q = qa(a);
        a.iter().zip(q.iter().zip(&p)).map(|(ai, (qi, pi))| 0.5 * ai * qi + pi * ai).sum()
    };
    let lipschitz = 2.0 * (0..n).map(|i| (0..n).map(|j| k[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;

    let mut a = vec![0.0; len];
    let mut w = a.clone();
    let mut t = 1.0f64;
    let mut f_prev = f(&a);
    for _ in 0..4_000 {
        let g: Vec<f64> = qa(&w).iter().zip(&p).map(|(q, pi)| q + pi).collect();
        let v: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
        let next = project(&v, &z, c);
        let f_next = f(&next);
        if f_next > f_prev {
            // restart momentum
            w = a.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = next.iter().zip(&a).map(|(nx, ax)| nx + (t - 1.0) / t_next * (nx - ax)).collect();
        a = next;
        t = t_next;
        f_prev = f_next;
    }
    let beta_fista: Vec<f64> = (0..n).map(|i| a[i] - a[i + n]).collect();
    let fista = OracleSolution {
        objective: dual_objective(&k, y, eps, &beta_fista),
        bias: bias_from_bounds(&k, y, eps, c, &beta_fista),
        beta: beta_fista.clone(),
        polished: false,
    };

    match polish(&k, y, c, eps, &beta_fista) {
        Some(s) if s.objective >= fista.objective - 1e-9 => s,
        _ => fista,
    }
}

/// Exact KKT solve on the free set identified from an approximate solution.
fn polish(k: &DMatrix<f64>, y: &[f64], c: f64, eps: f64, approx: &[f64]) -> Option<OracleSolution> {
    let n = y.len();
    let tol = 1e-5 * c.max(1.0);
    let mut beta: Vec<f64> = approx
        .iter()
        .map(|&b| {
            if b.abs() < tol {
                0.0
            } else if b > c - tol {
                c
            } else if b < -c + tol {
                -c
            } else {
                b
            }
        })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| beta[i] != 0.0 && beta[i].abs() < c).collect();
    let bias;
    if free.is_empty() {
        bias = bias_from_bounds(k, y, eps, c, &beta);
    } else {
        // [K_FF 1; 1' 0] [b_F; b] = [y_F - eps sgn - K_FB b_B; -sum b_B]
        let m = free.len();
        let mut a = DMatrix::zeros(m + 1, m + 1);
        let mut rhs = DVector::zeros(m + 1);
        let fixed_sum: f64 = (0..n).filter(|i| !free.contains(i)).map(|i| beta[i]).sum();
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                a[(r, s)] = k[(i, j)];
            }
            a[(r, m)] = 1.0;
            a[(m, r)] = 1.0;
            let kb: f64 = (0..n).filter(|j| !free.contains(j)).map(|j| k[(i, j)] * beta[j]).sum();
            rhs[r] = y[i] - eps * beta[i].signum() - kb;
        }
        rhs[m] = -fixed_sum;
        let sol = a.lu().solve(&rhs)?;
        for (r, &i) in free.iter().enumerate() {
            if sol[r].signum() != beta[i].signum() || sol[r].abs() > c {
                return None;
            }
            beta[i] = sol[r];
        }
        bias = sol[m];
    }
    if beta.iter().sum::<f64>().abs() > 1e-9 {
        return None;
    }
    Some(OracleSolution {
        objective: dual_objective(k, y, eps, &beta),
        bias,
        beta,
        polished: true,
    })
}

pub fn predict(x: &[Vec<f64>], sol: &OracleSolution, gamma: f64, q: &[f64]) -> f64 {
    x.iter().zip(&sol.beta).map(|(xi, b)| b * rbf(xi, q, gamma)).sum::<f64>() + sol.bias
}

pub fn dual_objective_of(x: &[Vec<f64>], y: &[f64], eps: f64, gamma: f64, beta: &[f64]) -> f64 {
    dual_objective(&gram(x, gamma), y, eps, beta)
}

/// Small problems (n <= 10) covering free, bounded and empty support sets.
pub fn fixtures() -> Vec<Fixture> {
    let grid8: Vec<Vec<f64>> = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
        vec![0.5, 0.2],
        vec![0.2, 0.8],
        vec![0.9, 0.4],
        vec![0.3, 0.5],
    ];
    let y8: Vec<f64> = grid8.iter().map(|p| 2.0 * p[0] - p[1] + 0.3 * (5.0 * p[0] * p[1]).sin()).collect();
    let line5: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.4]).collect();
    let y5 = vec![0.1, 0.9, 0.4, 1.6, 1.2];
    let cube10: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let t = i as f64;
            vec![(0.7 * t).sin(), (1.3 * t).cos(), (0.29 * t * t).sin()]
        })
        .collect();
    let y10: Vec<f64> = cube10.iter().map(|p| p[0] * 3.0 + p[1] * p[2] - 0.5).collect();
    vec![
        Fixture { name: "grid8-free", x: grid8.clone(), y: y8.clone(), c: 100.0, epsilon: 0.05, gamma: 1.0 },
        Fixture { name: "grid8-boxed", x: grid8.clone(), y: y8.clone(), c: 0.3, epsilon: 0.05, gamma: 2.0 },
        Fixture { name: "grid8-wide-tube", x: grid8, y: y8, c: 1.0, epsilon: 0.8, gamma: 0.5 },
        Fixture { name: "line5", x: line5.clone(), y: y5.clone(), c: 5.0, epsilon: 0.1, gamma: 3.0 },
        Fixture { name: "line5-no-support", x: line5, y: vec![0.5; 5], c: 5.0, epsilon: 0.1, gamma: 3.0 },
        Fixture { name: "cube10", x: cube10.clone(), y: y10.clone(), c: 10.0, epsilon: 0.2, gamma: 0.7 },
        Fixture { name: "cube10-tight", x: cube10, y: y10, c: 0.8, epsilon: 0.0, gamma: 1.5 },
    ]
}
