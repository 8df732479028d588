//! Minutes-weighted linear discriminant analysis.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_dim, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::stats::Label;

/// Class index 0 is `not_elite`, 1 is `elite`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub means: [Vec<f64>; 2],
    pub cov_inverse: Matrix,
    pub priors: [f64; 2],
}

/// Weighted class means, pooled covariance `Σ_g Σ_i w_i (x_i - μ_g)(x_i - μ_g)ᵀ / W`
/// with a ridge of `1e-8 · trace / d` on the diagonal, and priors equal to
/// the weighted class shares.
pub fn fit_lda(train: &TrainingSet) -> Result<LdaModel> {
    train.require_both_classes()?;
    let d = train.dim();
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    let mut mass = [0.0; 2];
    for ((x, l), w) in train
        .features
        .iter_rows()
        .zip(&train.labels)
        .zip(&train.weights)
    {
        let g = l.is_elite() as usize;
        mass[g] += w;
        for (s, v) in sums[g].iter_mut().zip(x) {
            *s += w * v;
        }
    }
    let means: [Vec<f64>; 2] = [0, 1].map(|g| sums[g].iter().map(|s| s / mass[g]).collect());
    let total = mass[0] + mass[1];
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for ((x, l), w) in train
        .features
        .iter_rows()
        .zip(&train.labels)
        .zip(&train.weights)
    {
        let mu = &means[l.is_elite() as usize];
        for ((c, v), m) in centered.iter_mut().zip(x).zip(mu) {
            *c = v - m;
        }
        cov.add_outer(&centered, w / total);
    }
    let ridge = 1e-8 * cov.trace() / d.max(1) as f64;
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    let chol = Cholesky::new(&cov).ok_or(Error::SingularCovariance)?;
    Ok(LdaModel {
        means,
        cov_inverse: chol.inverse(),
        priors: [mass[0] / total, mass[1] / total],
    })
}

impl LdaModel {
    pub fn dim(&self) -> usize {
        self.cov_inverse.cols()
    }

    /// `δ_g(x) = xᵀΣ⁻¹μ_g − ½ μ_gᵀΣ⁻¹μ_g + ln π_g` for `[not_elite, elite]`.
    pub fn scores(&self, x: &[f64]) -> Result<[f64; 2]> {
        check_dim(self.dim(), x)?;
        Ok([0, 1].map(|g| {
            let a = self.cov_inverse.mul_vec(&self.means[g]);
            dot(x, &a) - 0.5 * dot(&self.means[g], &a) + libm::log(self.priors[g])
        }))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let [n, e] = self.scores(x)?;
        Ok(Label::from_bool(e > n))
    }

    /// Discriminant direction `Σ⁻¹(μ_elite − μ_not_elite)`.
    pub fn direction(&self) -> Vec<f64> {
        let diff: Vec<f64> = self.means[1]
            .iter()
            .zip(&self.means[0])
            .map(|(a, b)| a - b)
            .collect();
        self.cov_inverse.mul_vec(&diff)
    }

    /// Absolute discriminant coefficients on the standardized scale.
    pub fn importance(&self) -> Vec<f64> {
        self.direction().iter().map(|c| libm::fabs(*c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_classes_split_at_zero() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (sx, l) in [(1.0, Label::Elite), (-1.0, Label::NotElite)] {
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                rows.push([sx + dx, dy]);
                labels.push(l);
            }
        }
        let m =
            fit_lda(&TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap()).unwrap();
        assert_eq!(m.priors, [0.5, 0.5]);
        let [n, e] = m.scores(&[0.0, 0.7]).unwrap();
        assert!((n - e).abs() < 1e-12);
        assert_eq!(m.predict(&[0.0, 0.0]).unwrap(), Label::NotElite);
        assert_eq!(m.predict(&[0.01, -3.0]).unwrap(), Label::Elite);
        assert_eq!(m.predict(&[-0.01, 3.0]).unwrap(), Label::NotElite);
        let dir = m.direction();
        assert!(dir[0] > 0.0 && dir[1].abs() < 1e-12);
    }

    fn random_set(n: usize, seed: u64) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<[f64; 4]> = (0..n)
            .map(|_| core::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        let labels = rows
            .iter()
            .map(|r| Label::from_bool(r[0] - 0.5 * r[2] + rng.random_range(-1.0..1.0) > 0.0))
            .collect();
        let weights = (0..n).map(|_| rng.random_range(25.0..400.0)).collect();
        TrainingSet::new(Matrix::from_rows(&rows), labels, weights).unwrap()
    }

    #[test]
    fn doubled_weight_equals_duplicated_row() {
        let base = random_set(80, 3);
        for target in [0usize, 17, 79] {
            let mut doubled = base.clone();
            doubled.weights[target] *= 2.0;
            let mut rows: Vec<Vec<f64>> = base.features.iter_rows().map(|r| r.to_vec()).collect();
            rows.push(rows[target].clone());
            let mut labels = base.labels.clone();
            labels.push(base.labels[target]);
            let mut weights = base.weights.clone();
            weights.push(base.weights[target]);
            let dup = TrainingSet::new(Matrix::from_rows(&rows), labels, weights).unwrap();
            let a = fit_lda(&doubled).unwrap();
            let b = fit_lda(&dup).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(target as u64);
            for _ in 0..50 {
                let q: [f64; 4] = core::array::from_fn(|_| rng.random_range(-3.0..3.0));
                let (sa, sb) = (a.scores(&q).unwrap(), b.scores(&q).unwrap());
                for g in 0..2 {
                    assert!((sa[g] - sb[g]).abs() <= 1e-9 * sa[g].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn weight_scale_invariance() {
        let base = random_set(120, 8);
        let scaled = TrainingSet {
            weights: base.weights.iter().map(|w| w * 37.5).collect(),
            ..base.clone()
        };
        let a = fit_lda(&base).unwrap();
        let b = fit_lda(&scaled).unwrap();
        for x in base.features.iter_rows() {
            assert_eq!(a.predict(x).unwrap(), b.predict(x).unwrap());
        }
    }

    #[test]
    fn constant_predictors_are_rejected() {
        let rows = [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        let labels = vec![Label::Elite, Label::NotElite, Label::Elite, Label::NotElite];
        let train = TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap();
        assert!(matches!(fit_lda(&train), Err(Error::SingularCovariance)));
    }

    #[test]
    fn collinear_predictors_survive_the_ridge() {
        let base = random_set(60, 2);
        let rows: Vec<Vec<f64>> = base
            .features
            .iter_rows()
            .map(|r| vec![r[0], r[1], r[0] + r[1]])
            .collect();
        let train = TrainingSet::new(
            Matrix::from_rows(&rows),
            base.labels.clone(),
            base.weights.clone(),
        )
        .unwrap();
        let m = fit_lda(&train).unwrap();
        assert!(m.importance().iter().all(|c| c.is_finite()));
    }
}
