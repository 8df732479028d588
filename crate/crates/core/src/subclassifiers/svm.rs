//! Soft-margin support vector machine with an RBF kernel, trained by
//! sequential minimal optimization with second-order working set selection.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_dim, squared_distance, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub cost: f64,
    pub gamma: f64,
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cost > 0.0) || !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "svm cost {} and gamma {} must be positive",
                self.cost,
                self.gamma
            )));
        }
        Ok(())
    }
}

pub const KKT_TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub support_vectors: Matrix,
    /// `α_i y_i` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

/// Solution of the dual with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Maximal violating-pair gap `m(α) - M(α)` at exit.
    pub kkt_violation: f64,
    /// Dual objective after every iteration, when requested.
    pub objective_trace: Vec<f64>,
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    libm::exp(-gamma * squared_distance(a, b))
}

pub fn fit_svm_rbf(train: &TrainingSet, params: &SvmParams) -> Result<SvmModel> {
    let sol = solve_dual(train, params, false)?;
    let mut rows = Vec::new();
    let mut coefficients = Vec::new();
    for (i, a) in sol.alpha.iter().enumerate() {
        if *a > 0.0 {
            rows.push(train.features.row(i).to_vec());
            coefficients.push(a * sign(train.labels[i]));
        }
    }
    let support_vectors = if rows.is_empty() {
        Matrix::zeros(0, train.dim())
    } else {
        Matrix::from_rows(&rows)
    };
    Ok(SvmModel {
        gamma: params.gamma,
        support_vectors,
        coefficients,
        bias: sol.bias,
    })
}

fn sign(l: Label) -> f64 {
    if l.is_elite() {
        1.0
    } else {
        -1.0
    }
}

/// Minimises `½ αᵀQα - eᵀα` subject to `0 ≤ α ≤ cost`, `yᵀα = 0`, with
/// `Q_ij = y_i y_j K(x_i, x_j)`, until the maximal violating pair gap drops
/// below [`KKT_TOLERANCE`].
pub fn solve_dual(
    train: &TrainingSet,
    params: &SvmParams,
    record_objective: bool,
) -> Result<DualSolution> {
    params.validate()?;
    train.require_both_classes()?;
    let n = train.len();
    let c = params.cost;
    let y: Vec<f64> = train.labels.iter().map(|l| sign(*l)).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf(params.gamma, train.features.row(i), train.features.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut violation;
    loop {
        let up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
        let low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if up(t, &alpha) && (i_sel.is_none() || -y[t] * grad[t] > gmax) {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !low(t, &alpha) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        violation = if gmax.is_finite() && gmin.is_finite() {
            gmax - gmin
        } else {
            0.0
        };
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if violation < KKT_TOLERANCE {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                max_violation: violation,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        if record_objective {
            trace.push(dual_objective(&alpha, &grad));
        }
    }

    // Bias from free multipliers, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
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
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(DualSolution {
        alpha,
        bias: -rho,
        iterations,
        kkt_violation: violation,
        objective_trace: trace,
    })
}

/// `Σα - ½ αᵀQα`, computed from the gradient `Qα - e`.
fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    -0.5 * alpha
        .iter()
        .zip(grad)
        .map(|(a, g)| a * (g - 1.0))
        .sum::<f64>()
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.support_vectors.cols(), x)?;
        Ok(self
            .support_vectors
            .iter_rows()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * rbf(self.gamma, sv, x))
            .sum::<f64>()
            + self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_bool(self.decision(x)? > 0.0))
    }
}
