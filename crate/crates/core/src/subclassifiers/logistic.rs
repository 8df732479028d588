//! Unweighted logistic regression fitted by iteratively reweighted least
//! squares, thresholded at a tunable probability.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_dim, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::{norm, Cholesky, Matrix};
use crate::stats::Label;

/// `thresh` is one minus the probability required for an elite call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitParams {
    pub thresh: f64,
}

impl LogitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.thresh > 0.0 && self.thresh <= 0.5) {
            return Err(Error::InvalidParameter(alloc::format!(
                "logit thresh {} must lie in (0, 0.5]",
                self.thresh
            )));
        }
        Ok(())
    }

    pub fn probability_threshold(&self) -> f64 {
        1.0 - self.thresh
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsOptions {
    pub max_iter: usize,
    pub gradient_tol: f64,
    pub ridge: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        IrlsOptions {
            max_iter: 100,
            gradient_tol: 1e-6,
            ridge: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Intercept first, then one coefficient per predictor.
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-libm::fabs(z)))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

fn linear_predictor(beta: &[f64], x: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

fn target(l: Label) -> f64 {
    if l.is_elite() {
        1.0
    } else {
        0.0
    }
}

/// Bernoulli log-likelihood of `beta` (intercept first).
pub fn log_likelihood(train: &TrainingSet, beta: &[f64]) -> f64 {
    train
        .features
        .iter_rows()
        .zip(&train.labels)
        .map(|(x, l)| {
            let eta = linear_predictor(beta, x);
            if l.is_elite() {
                -softplus(-eta)
            } else {
                -softplus(eta)
            }
        })
        .sum()
}

/// Score vector `Xᵀ(y - p)` with a leading intercept column.
pub fn gradient(train: &TrainingSet, beta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for (x, l) in train.features.iter_rows().zip(&train.labels) {
        let r = target(*l) - sigmoid(linear_predictor(beta, x));
        g[0] += r;
        for (gj, xj) in g[1..].iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
    g
}

/// Fitted probabilities closer than this to 0 or 1 signal separation.
const SATURATION: f64 = 1e-10;

pub fn fit_logistic(train: &TrainingSet) -> Result<LogisticModel> {
    fit_logistic_with(train, &IrlsOptions::default())
}

/// Newton/IRLS steps with step halving on the log-likelihood. A singular
/// information matrix gets a ridge of `opts.ridge`, grown tenfold until it
/// factors. Under (quasi-)separation the likelihood has no maximum: the
/// coefficients drift outward until the iteration cap or a likelihood
/// stall, and the fit is reported as not converged whenever some fitted
/// probability is numerically 0 or 1, even if the gradient has vanished.
pub fn fit_logistic_with(train: &TrainingSet, opts: &IrlsOptions) -> Result<LogisticModel> {
    train.require_both_classes()?;
    let p = train.dim() + 1;
    let mut beta = vec![0.0; p];
    let mut ll = log_likelihood(train, &beta);
    let mut iterations = 0;
    let mut g = gradient(train, &beta);
    while iterations < opts.max_iter && norm(&g) > opts.gradient_tol {
        let mut info = Matrix::zeros(p, p);
        let mut xi = vec![1.0; p];
        for x in train.features.iter_rows() {
            xi[1..].copy_from_slice(x);
            let mu = sigmoid(linear_predictor(&beta, x));
            info.add_outer(&xi, mu * (1.0 - mu));
        }
        let step = solve_with_ridge(&mut info, &g, opts.ridge);
        iterations += 1;
        let mut t = 1.0;
        let (next, next_ll) = loop {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let cand_ll = log_likelihood(train, &cand);
            if cand_ll >= ll || t < 1e-10 {
                break (cand, cand_ll);
            }
            t *= 0.5;
        };
        let stalled = libm::fabs(next_ll - ll) <= 1e-12 * (libm::fabs(ll) + 0.1);
        beta = next;
        ll = next_ll;
        g = gradient(train, &beta);
        if stalled {
            break;
        }
    }
    let gradient_norm = norm(&g);
    let saturated = train.features.iter_rows().any(|x| {
        let mu = sigmoid(linear_predictor(&beta, x));
        mu.min(1.0 - mu) < SATURATION
    });
    Ok(LogisticModel {
        converged: gradient_norm <= opts.gradient_tol && !saturated,
        coefficients: beta,
        iterations,
        gradient_norm,
    })
}

fn solve_with_ridge(info: &mut Matrix, g: &[f64], ridge: f64) -> Vec<f64> {
    if let Some(c) = Cholesky::new(info) {
        return c.solve(g);
    }
    let p = info.rows();
    let mut lambda = ridge;
    let mut added = 0.0;
    loop {
        for i in 0..p {
            info[(i, i)] += lambda - added;
        }
        added = lambda;
        if let Some(c) = Cholesky::new(info) {
            return c.solve(g);
        }
        lambda *= 10.0;
    }
}

/// Elite when the estimated probability is at least `1 - thresh`.
pub fn logistic_verdict(probability: f64, params: &LogitParams) -> Label {
    Label::from_bool(probability >= params.probability_threshold())
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Log odds of the elite class.
    pub fn log_odds(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(linear_predictor(&self.coefficients, x))
    }

    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.log_odds(x)?))
    }

    pub fn predict(&self, x: &[f64], params: &LogitParams) -> Result<Label> {
        Ok(logistic_verdict(self.probability(x)?, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy(n: usize, d: usize, seed: u64) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let labels = rows
            .iter()
            .map(|r| {
                let eta = 0.3
                    + r.iter()
                        .enumerate()
                        .map(|(j, v)| v * (j as f64 - 1.0) * 0.8)
                        .sum::<f64>();
                Label::from_bool(rng.random_bool(sigmoid(eta)))
            })
            .collect();
        TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap()
    }

    fn central_difference(train: &TrainingSet, beta: &[f64], h: f64) -> Vec<f64> {
        (0..beta.len())
            .map(|j| {
                let mut up = beta.to_vec();
                let mut dn = beta.to_vec();
                up[j] += h;
                dn[j] -= h;
                (log_likelihood(train, &up) - log_likelihood(train, &dn)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn converges_with_small_gradient() {
        let train = noisy(600, 4, 1);
        let m = fit_logistic(&train).unwrap();
        assert!(m.converged);
        assert!(m.gradient_norm <= 1e-6);
        assert!(m.iterations < 20);
        let fd = central_difference(&train, &m.coefficients, 1e-5);
        let g = gradient(&train, &m.coefficients);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-4 * b.abs().max(1.0));
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let train = noisy(300, 5, 2);
        let one_step = fit_logistic_with(
            &train,
            &IrlsOptions {
                max_iter: 1,
                ..IrlsOptions::default()
            },
        )
        .unwrap();
        assert!(!one_step.converged);
        let g = gradient(&train, &one_step.coefficients);
        let fd = central_difference(&train, &one_step.coefficients, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-4 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn separable_data_is_flagged_not_converged() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64 - 9.5]).collect();
        let labels = (0..20).map(|i| Label::from_bool(i >= 10)).collect();
        let train = TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap();
        let m = fit_logistic(&train).unwrap();
        assert!(!m.converged);
        assert!(m.iterations <= 100);
        assert_eq!(
            m.predict(&[3.0], &LogitParams { thresh: 0.05 }).unwrap(),
            Label::Elite
        );
        assert_eq!(
            m.predict(&[-3.0], &LogitParams { thresh: 0.5 }).unwrap(),
            Label::NotElite
        );
    }

    #[test]
    fn collinear_predictors_use_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<[f64; 3]> = (0..200)
            .map(|_| {
                let a = rng.random_range(-1.0..1.0);
                [a, 2.0 * a, rng.random_range(-1.0..1.0)]
            })
            .collect();
        let labels = rows
            .iter()
            .map(|r| Label::from_bool(rng.random_bool(sigmoid(r[0] - r[2]))))
            .collect();
        let train = TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap();
        let m = fit_logistic(&train).unwrap();
        assert!(m.coefficients.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn threshold_convention() {
        let p = LogitParams { thresh: 0.25 };
        assert_eq!(p.probability_threshold(), 0.75);
        assert_eq!(logistic_verdict(0.75, &p), Label::Elite);
        assert_eq!(logistic_verdict(0.7499999, &p), Label::NotElite);
        assert_eq!(
            logistic_verdict(0.5, &LogitParams { thresh: 0.5 }),
            Label::Elite
        );
        assert!(LogitParams { thresh: 0.6 }.validate().is_err());
        assert!(LogitParams { thresh: 0.0 }.validate().is_err());
    }

    #[test]
    fn higher_log_odds_never_flip_to_not_elite() {
        let m = LogisticModel {
            coefficients: vec![0.0, 1.0],
            converged: true,
            iterations: 0,
            gradient_norm: 0.0,
        };
        for thresh in [0.05, 0.25, 0.5] {
            let p = LogitParams { thresh };
            let mut seen_elite = false;
            for i in -400..400 {
                let elite = m.predict(&[i as f64 / 40.0], &p).unwrap().is_elite();
                assert!(!seen_elite || elite);
                seen_elite |= elite;
            }
            assert!(seen_elite);
        }
    }
}
