//! Kernel support-vector classifier trained by sequential minimal
//! optimization on the C-SVC dual
//!
//! ```text
//! min ½ αᵀQα − Σα   s.t.  0 ≤ α ≤ C,  Σ yα = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each iteration picks the maximal-violating index `i` and the partner `j`
//! that maximizes second-order objective decrease, updates the pair
//! analytically, and stops once the KKT violation gap falls below the
//! tolerance. Imposter rows map to `y = +1`, so `sigmoid(d(x))` scores
//! imposters high.

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::{sigmoid, TrainingLog};
use crate::error::{Error, Result};
use crate::exec::Execution;

const TAU: f64 = 1e-12;
/// Memory budget for cached kernel rows.
const CACHE_BYTES: usize = 256 << 20;
/// Rows at least this long are computed with `Execution`.
const PARALLEL_ROW_MIN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    #[default]
    Rbf,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvcConfig {
    pub kernel: Kernel,
    /// Radial-basis width; `None` means `1 / (dim * mean feature variance)`.
    pub gamma: Option<f64>,
    pub c: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvcConfig {
    fn default() -> Self {
        SvcConfig { kernel: Kernel::Rbf, gamma: None, c: 1.0, tolerance: 1e-3, max_iterations: 10_000 }
    }
}

impl SvcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c.is_nan()
            || self.c <= 0.0
            || self.tolerance.is_nan()
            || self.tolerance <= 0.0
            || self.max_iterations == 0
        {
            return Err(Error::Config("svc C, tolerance and max iterations must be positive".into()));
        }
        if self.gamma.is_some_and(|g| g.is_nan() || g <= 0.0) {
            return Err(Error::Config("svc gamma must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: Kernel,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            Kernel::Linear => a.iter().zip(b).map(|(p, q)| p * q).sum(),
            Kernel::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                (-self.gamma * d2).exp()
            }
        }
    }
}

/// `1 / (dim * v)` where `v` is the mean of the per-column population
/// variances; falls back to `1 / dim` for constant data.
pub fn default_gamma(x: &[Vec<f64>]) -> f64 {
    let dim = x[0].len();
    let n = x.len() as f64;
    let mut var_sum = 0.0;
    for j in 0..dim {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        var_sum += x.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
    }
    let v = var_sum / dim as f64;
    if v > 0.0 {
        1.0 / (dim as f64 * v)
    } else {
        1.0 / dim as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcModel {
    pub kernel: KernelSpec,
    pub c: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// Dual variable of each support vector, in (0, C].
    pub alphas: Vec<f64>,
    /// Class of each support vector, ±1.
    pub signs: Vec<f64>,
    pub bias: f64,
}

impl SvcModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(self.alphas.iter().zip(&self.signs))
            .map(|(sv, (a, y))| a * y * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}

/// Bounded cache of kernel matrix rows.
struct KernelRows<'a> {
    x: &'a [Vec<f64>],
    kernel: KernelSpec,
    exec: Execution,
    rows: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [Vec<f64>], kernel: KernelSpec, exec: Execution) -> Self {
        let capacity = (CACHE_BYTES / (8 * x.len().max(1))).clamp(2, x.len().max(2));
        KernelRows { x, kernel, exec, rows: HashMap::new(), order: VecDeque::new(), capacity }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = self.rows.get(&i) {
            return Rc::clone(r);
        }
        let (x, k) = (self.x, self.kernel);
        let xi = &x[i];
        let values = if x.len() >= PARALLEL_ROW_MIN {
            self.exec.map(x, |xj| k.eval(xi, xj))
        } else {
            x.iter().map(|xj| k.eval(xi, xj)).collect()
        };
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        let r = Rc::new(values);
        self.rows.insert(i, Rc::clone(&r));
        self.order.push_back(i);
        r
    }
}

/// Trains on standardized rows with 0/1 targets (1 maps to `y = +1`).
///
/// Hitting `max_iterations` is not an error: the current iterate is
/// returned and the training log records `converged = false`.
pub fn train(x: &[Vec<f64>], targets: &[f64], cfg: &SvcConfig, exec: Execution) -> Result<(SvcModel, TrainingLog)> {
    let n = x.len();
    let y: Vec<f64> = targets.iter().map(|&t| if t > 0.5 { 1.0 } else { -1.0 }).collect();
    let gamma = match cfg.kernel {
        Kernel::Rbf => cfg.gamma.unwrap_or_else(|| default_gamma(x)),
        Kernel::Linear => 0.0,
    };
    let kernel = KernelSpec { kind: cfg.kernel, gamma };
    let c = cfg.c;
    let diag: Vec<f64> = x.iter().map(|r| kernel.eval(r, r)).collect();
    let mut cache = KernelRows::new(x, kernel, exec);

    let mut alpha = vec![0.0; n];
    // gradient of the dual objective, Qα - 1
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        let ki = cache.row(i);
        // j: second-order choice in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let yg = y[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let b = gmax + yg;
            if b > 0.0 {
                let a = diag[i] + diag[t] - 2.0 * ki[t];
                let a = if a > 0.0 { a } else { TAU };
                let obj = -(b * b) / a;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel.filter(|_| gmax + gmax2 >= cfg.tolerance) else {
            converged = true;
            break;
        };
        let kj = cache.row(j);
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }
    if !converged {
        log::warn!("svc stopped at {iterations} iterations without reaching tolerance {}", cfg.tolerance);
    }

    let bias = -rho(&alpha, &grad, &y, c);
    let mut model = SvcModel { kernel, c, support_vectors: Vec::new(), alphas: Vec::new(), signs: Vec::new(), bias };
    for t in 0..n {
        if alpha[t] > 0.0 {
            model.support_vectors.push(x[t].clone());
            model.alphas.push(alpha[t]);
            model.signs.push(y[t]);
        }
    }
    Ok((model, TrainingLog { loss_history: Vec::new(), converged, iterations }))
}

/// Offset of the decision function: the mean of `y_t ∇_t` over free
/// vectors, or the midpoint of the feasible interval when none are free.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
