//! SMO for the epsilon-SVR dual.
//!
//! The dual is posed over `2n` variables `a = [alpha; alpha*]` with signs
//! `z = [+1; -1]`:
//!
//! ```text
//! min f(a) = 1/2 a'Qa + p'a   s.t.  z'a = 0,  0 <= a <= C
//! Q_st = z_s z_t K(s mod n, t mod n),  p = [eps - y; eps + y]
//! ```
//!
//! Pairs are chosen by the maximal-violating-pair rule with second-order
//! gain for the second index. The regression coefficients are
//! `beta_i = alpha_i - alpha*_i` and the bias is `-rho`.

use super::SvrParams;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective (maximization form, `-f(a)`) after every update,
    /// starting with the initial point.
    pub objective_trace: Vec<f64>,
}

pub(super) struct Solution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub report: SolveReport,
}

struct Problem<'a> {
    kernel: &'a [f64],
    n: usize,
}

impl Problem<'_> {
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn q(&self, s: usize, t: usize) -> f64 {
        self.sign(s) * self.sign(t) * self.kernel[(s % self.n) * self.n + t % self.n]
    }
}

fn objective(a: &[f64], grad: &[f64], p: &[f64]) -> f64 {
    // f = 1/2 a'(Qa + p) + 1/2 p'a, with Qa + p = grad
    let f: f64 = a.iter().zip(grad.iter().zip(p)).map(|(a, (g, p))| 0.5 * a * (g + p)).sum();
    -f
}

pub(super) fn solve(kernel: &[f64], y: &[f64], params: &SvrParams) -> Solution {
    let n = y.len();
    let len = 2 * n;
    let c = params.c;
    let prob = Problem { kernel, n };
    let z: Vec<f64> = (0..len).map(|t| prob.sign(t)).collect();
    let p: Vec<f64> = (0..len)
        .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
        .collect();
    let mut a = vec![0.0; len];
    let mut grad = p.clone();

    let max_iter = params.max_passes.saturating_mul(len).max(1);
    let mut trace = vec![objective(&a, &grad, &p)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        // i: maximal -z_t G_t over I_up; j: second-order choice over I_low.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..len {
            let up = if z[t] > 0.0 { a[t] < c } else { a[t] > 0.0 };
            if up && -z[t] * grad[t] >= gmax {
                gmax = -z[t] * grad[t];
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..len {
            let low = if z[t] > 0.0 { a[t] > 0.0 } else { a[t] < c };
            if !low {
                continue;
            }
            let zg = z[t] * grad[t];
            gmax2 = gmax2.max(zg);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + zg;
            if b > 0.0 {
                let mut quad = prob.q(i, i) + prob.q(t, t) - 2.0 * z[i] * z[t] * prob.q(i, t);
                if quad <= 0.0 {
                    quad = TAU;
                }
                let gain = -(b * b) / quad;
                if gain <= best {
                    best = gain;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < params.tol || i == usize::MAX || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (a[i], a[j]);
        let (qii, qjj, qij) = (prob.q(i, i), prob.q(j, j), prob.q(i, j));
        if z[i] != z[j] {
            let mut quad = qii + qjj + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let mut quad = qii + qjj - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += prob.q(t, i) * di + prob.q(t, j) * dj;
        }
        trace.push(objective(&a, &grad, &p));
    }

    let bias = -rho(&a, &grad, &z, c);
    let beta = (0..n).map(|t| a[t] - a[t + n]).collect();
    Solution {
        beta,
        bias,
        report: SolveReport {
            iterations,
            converged,
            objective_trace: trace,
        },
    }
}

/// Average of `z_t G_t` over free variables, or the midpoint of the
/// feasible interval when every variable sits at a bound.
fn rho(a: &[f64], grad: &[f64], z: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..a.len() {
        let yg = z[t] * grad[t];
        if a[t] >= c {
            if z[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[t] <= 0.0 {
            if z[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
