//! k-nearest neighbours in standardized predictor space.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_dim, squared_distance, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

/// The stored training set; kNN has nothing else to learn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub features: Matrix,
    pub labels: Vec<Label>,
}

impl KnnModel {
    pub fn fit(train: &TrainingSet, params: &KnnParams) -> Result<KnnModel> {
        if params.k == 0 || params.k > train.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "k = {} must lie in 1..={}",
                params.k,
                train.len()
            )));
        }
        Ok(KnnModel {
            k: params.k,
            features: train.features.clone(),
            labels: train.labels.clone(),
        })
    }

    /// Majority label among the `k` nearest training rows (Euclidean);
    /// distance ties go to the lower training index, vote ties to `not_elite`.
    pub fn predict(&self, query: &[f64]) -> Result<Label> {
        check_dim(self.features.cols(), query)?;
        let mut nearest: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, row) in self.features.iter_rows().enumerate() {
            let d = squared_distance(row, query);
            if nearest.len() == self.k && d >= nearest[self.k - 1].0 {
                continue;
            }
            let pos = nearest.partition_point(|&(nd, _)| nd <= d);
            nearest.insert(pos, (d, i));
            nearest.truncate(self.k);
        }
        let elite = nearest
            .iter()
            .filter(|(_, i)| self.labels[*i].is_elite())
            .count();
        Ok(Label::from_bool(2 * elite > nearest.len()))
    }
}

pub fn knn_predict(train: &TrainingSet, query: &[f64], params: &KnnParams) -> Result<Label> {
    KnnModel::fit(train, params)?.predict(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(rows: &[Vec<f64>], labels: &[bool]) -> TrainingSet {
        TrainingSet::unweighted(
            Matrix::from_rows(rows),
            labels.iter().map(|b| Label::from_bool(*b)).collect(),
        )
        .unwrap()
    }

    /// Full scan with a stable sort on distance.
    fn exhaustive(train: &TrainingSet, q: &[f64], k: usize) -> Label {
        let mut all: Vec<(f64, usize)> = (0..train.len())
            .map(|i| {
                let r = train.features.row(i);
                (
                    r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
                    i,
                )
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let elite = all[..k]
            .iter()
            .filter(|(_, i)| train.labels[*i].is_elite())
            .count();
        if elite * 2 > k {
            Label::Elite
        } else {
            Label::NotElite
        }
    }

    #[test]
    fn nearest_self_and_majority() {
        let train = set(
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.5],
                vec![5.0, 5.0],
            ],
            &[true, true, false, false],
        );
        assert_eq!(
            knn_predict(&train, &[5.0, 5.0], &KnnParams { k: 1 }).unwrap(),
            Label::NotElite
        );
        assert_eq!(
            knn_predict(&train, &[0.0, 0.0], &KnnParams { k: 1 }).unwrap(),
            Label::Elite
        );
        assert_eq!(
            knn_predict(&train, &[0.1, 0.1], &KnnParams { k: 3 }).unwrap(),
            Label::Elite
        );
        // Even k with a split vote.
        assert_eq!(
            knn_predict(&train, &[0.1, 0.1], &KnnParams { k: 4 }).unwrap(),
            Label::NotElite
        );
        assert!(knn_predict(&train, &[0.1, 0.1], &KnnParams { k: 5 }).is_err());
        assert!(knn_predict(&train, &[0.1], &KnnParams { k: 1 }).is_err());
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let train = set(&[vec![1.0], vec![-1.0], vec![3.0]], &[false, true, true]);
        assert_eq!(
            knn_predict(&train, &[0.0], &KnnParams { k: 1 }).unwrap(),
            Label::NotElite
        );
        let train = set(&[vec![-1.0], vec![1.0], vec![3.0]], &[true, false, true]);
        assert_eq!(
            knn_predict(&train, &[0.0], &KnnParams { k: 1 }).unwrap(),
            Label::Elite
        );
    }

    #[test]
    fn matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.random_range(10..200);
            let d = rng.random_range(1..8);
            // Coarse grid values so distance ties actually occur.
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-3..3) as f64).collect())
                .collect();
            let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let train = set(&rows, &labels);
            for k in [1, 2, 3, 5, 7] {
                let model = KnnModel::fit(&train, &KnnParams { k }).unwrap();
                for _ in 0..50 {
                    let q: Vec<f64> = (0..d)
                        .map(|_| {
                            rng.random_range(-3..3) as f64 + 0.5 * rng.random_range(0..2) as f64
                        })
                        .collect();
                    assert_eq!(model.predict(&q).unwrap(), exhaustive(&train, &q, k));
                }
            }
        }
    }
}
