//! Discrete AdaBoost.M1 over depth-limited, cost-complexity pruned trees.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowConfig, TreeModel};
use super::{check_dim, TrainingSet};
use crate::error::{Error, Result};
use crate::stats::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub mfinal: usize,
    pub maxdepth: usize,
    pub cp: f64,
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.mfinal == 0 || self.maxdepth == 0 {
            return Err(Error::InvalidParameter(
                "mfinal and maxdepth must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.cp) {
            return Err(Error::InvalidParameter(alloc::format!(
                "boosting cp {} must lie in [0, 1]",
                self.cp
            )));
        }
        Ok(())
    }
}

/// Stage weight given to a round with zero weighted error.
pub const PERFECT_ROUND_ALPHA: f64 = 23.025850929940457; // ln(1e10)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostStage {
    pub alpha: f64,
    pub error: f64,
    pub tree: TreeModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub dim: usize,
    pub stages: Vec<BoostStage>,
}

/// Observation weights start proportional to lineup minutes. A round whose
/// weighted error reaches 0.5 ends boosting without being kept; a perfect
/// round is kept with a capped stage weight and ends boosting.
///
/// The `seed` is accepted for interface symmetry; weighted fitting is
/// deterministic.
pub fn fit_adaboost(
    train: &TrainingSet,
    params: &BoostParams,
    _seed: u64,
) -> Result<AdaBoostModel> {
    params.validate()?;
    let total: f64 = train.weights.iter().sum();
    let mut w: Vec<f64> = train.weights.iter().map(|x| x / total).collect();
    let cfg = GrowConfig {
        loss_fp: 1.0,
        min_split: 20,
        min_bucket: 7,
        max_depth: params.maxdepth,
        mtry: None,
    };
    let sample: Vec<usize> = (0..train.len()).collect();
    let mut stages = Vec::new();
    for _ in 0..params.mfinal {
        let mut tree = grow(
            &train.features,
            &train.labels,
            &w,
            &sample,
            &cfg,
            None::<&mut rand_chacha::ChaCha8Rng>,
        );
        tree.prune(params.cp);
        let miss: Vec<bool> = (0..train.len())
            .map(|i| tree.predict_unchecked(train.features.row(i)) != train.labels[i])
            .collect();
        let err: f64 = w
            .iter()
            .zip(&miss)
            .filter(|(_, m)| **m)
            .map(|(x, _)| x)
            .sum::<f64>()
            / w.iter().sum::<f64>();
        if err >= 0.5 {
            break;
        }
        if err <= 0.0 {
            stages.push(BoostStage {
                alpha: PERFECT_ROUND_ALPHA,
                error: 0.0,
                tree,
            });
            break;
        }
        let alpha = libm::log((1.0 - err) / err);
        let boost = libm::exp(alpha);
        for (x, m) in w.iter_mut().zip(&miss) {
            if *m {
                *x *= boost;
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        stages.push(BoostStage {
            alpha,
            error: err,
            tree,
        });
    }
    Ok(AdaBoostModel {
        dim: train.dim(),
        stages,
    })
}

impl AdaBoostModel {
    /// `Σ α_m · vote_m` with votes in {-1, +1}.
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.margin_unchecked(x, self.stages.len()))
    }

    fn margin_unchecked(&self, x: &[f64], rounds: usize) -> f64 {
        self.stages[..rounds]
            .iter()
            .map(|s| {
                if s.tree.predict_unchecked(x).is_elite() {
                    s.alpha
                } else {
                    -s.alpha
                }
            })
            .sum()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_bool(self.margin(x)? > 0.0))
    }

    /// Prediction using only the first `rounds` stages.
    pub fn predict_partial(&self, x: &[f64], rounds: usize) -> Result<Label> {
        check_dim(self.dim, x)?;
        Ok(Label::from_bool(
            self.margin_unchecked(x, rounds.min(self.stages.len())) > 0.0,
        ))
    }

    pub fn gini_importance(&self) -> Vec<f64> {
        let mut imp = alloc::vec![0.0; self.dim];
        for s in &self.stages {
            for (f, g) in s.tree.splits() {
                imp[f] += g;
            }
        }
        imp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(n: usize, seed: u64, noise: f64) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<[f64; 5]> = (0..n)
            .map(|_| core::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect();
        let labels = rows
            .iter()
            .map(|r| {
                Label::from_bool(
                    r[0] + r[1] * r[1] - 0.3 + noise * rng.random_range(-1.0..1.0) > 0.0,
                )
            })
            .collect();
        let w = (0..n).map(|_| rng.random_range(25.0..300.0)).collect();
        TrainingSet::new(Matrix::from_rows(&rows), labels, w).unwrap()
    }

    #[test]
    fn perfect_first_round_is_a_single_tree() {
        let rows: Vec<[f64; 1]> = (0..40).map(|i| [i as f64]).collect();
        let labels = (0..40).map(|i| Label::from_bool(i >= 20)).collect();
        let train = TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap();
        let m = fit_adaboost(
            &train,
            &BoostParams {
                mfinal: 50,
                maxdepth: 1,
                cp: 0.01,
            },
            0,
        )
        .unwrap();
        assert_eq!(m.stages.len(), 1);
        assert_eq!(m.stages[0].alpha, PERFECT_ROUND_ALPHA);
        assert_eq!(PERFECT_ROUND_ALPHA, libm::log(1e10));
        for r in &rows {
            assert_eq!(m.predict(r).unwrap(), m.stages[0].tree.predict(r).unwrap());
        }
    }

    #[test]
    fn retained_rounds_have_positive_alpha() {
        for (seed, depth) in [(1u64, 1usize), (2, 2), (3, 3)] {
            let train = dataset(300, seed, 0.4);
            let m = fit_adaboost(
                &train,
                &BoostParams {
                    mfinal: 60,
                    maxdepth: depth,
                    cp: 0.01,
                },
                0,
            )
            .unwrap();
            assert!(!m.stages.is_empty());
            for s in &m.stages {
                assert!(s.error < 0.5 && s.alpha > 0.0, "{} {}", s.error, s.alpha);
            }
        }
    }

    #[test]
    fn boosting_beats_a_single_stump() {
        let train = dataset(400, 7, 0.0);
        let m = fit_adaboost(
            &train,
            &BoostParams {
                mfinal: 100,
                maxdepth: 1,
                cp: 0.0,
            },
            0,
        )
        .unwrap();
        let errors = |rounds: usize| {
            (0..train.len())
                .filter(|&i| {
                    m.predict_partial(train.features.row(i), rounds).unwrap() != train.labels[i]
                })
                .count()
        };
        assert!(errors(m.stages.len()) < errors(1));
    }

    /// Round-by-round misclassification count is not monotone for discrete
    /// AdaBoost (on this data it rises at several rounds), so the test pins
    /// the quantity that is: the exponential bound `Σ w_i exp(-y_i F_m / 2)`,
    /// which shrinks by `2 sqrt(err_m (1 - err_m)) < 1` per round and caps
    /// the weighted training error.
    #[test]
    fn training_error_bound_shrinks_on_separable_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<[f64; 2]> = (0..200)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let labels = rows
            .iter()
            .map(|r| Label::from_bool(r[0] + 0.6 * r[1] > 0.1))
            .collect();
        let train = TrainingSet::unweighted(Matrix::from_rows(&rows), labels).unwrap();
        let m = fit_adaboost(
            &train,
            &BoostParams {
                mfinal: 60,
                maxdepth: 1,
                cp: 0.0,
            },
            0,
        )
        .unwrap();
        let n = train.len() as f64;
        let mut prev_bound = 1.0;
        let mut last_errors = 0;
        for r in 1..=m.stages.len() {
            let mut bound = 0.0;
            let mut errors = 0;
            for i in 0..train.len() {
                let x = train.features.row(i);
                let y = if train.labels[i].is_elite() {
                    1.0
                } else {
                    -1.0
                };
                bound += libm::exp(-y * m.margin_unchecked(x, r) / 2.0) / n;
                errors += (m.predict_partial(x, r).unwrap() != train.labels[i]) as usize;
            }
            let e = m.stages[r - 1].error;
            assert!((bound - prev_bound * 2.0 * libm::sqrt(e * (1.0 - e))).abs() < 1e-9);
            assert!(bound < prev_bound);
            assert!(errors as f64 / n <= bound);
            prev_bound = bound;
            last_errors = errors;
        }
        assert_eq!(last_errors, 0);
    }

    #[test]
    fn weight_scale_invariance() {
        let train = dataset(200, 5, 0.3);
        let scaled = TrainingSet {
            weights: train.weights.iter().map(|w| w * 8.0).collect(),
            ..train.clone()
        };
        let p = BoostParams {
            mfinal: 30,
            maxdepth: 2,
            cp: 0.01,
        };
        let a = fit_adaboost(&train, &p, 0).unwrap();
        let b = fit_adaboost(&scaled, &p, 0).unwrap();
        for i in 0..train.len() {
            let x = train.features.row(i);
            assert_eq!(a.predict(x).unwrap(), b.predict(x).unwrap());
        }
    }
}
