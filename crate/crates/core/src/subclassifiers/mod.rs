//! The seven voting subclassifiers.
//!
//! Each family has a `fit_*` function taking a [`TrainingSet`] of
//! standardized predictors and returns an immutable, serializable model.
//! Every score or probability tie resolves to `not_elite`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::linalg::Matrix;
use crate::stats::Label;

pub mod boost;
pub mod forest;
pub mod knn;
pub mod lda;
pub mod logistic;
pub mod svm;
pub mod tree;

pub use boost::{fit_adaboost, AdaBoostModel, BoostParams};
pub use forest::{fit_random_forest, forest_verdict, ForestModel, ForestParams};
pub use knn::{knn_predict, KnnModel, KnnParams};
pub use lda::{fit_lda, LdaModel};
pub use logistic::{fit_logistic, logistic_verdict, LogisticModel, LogitParams};
pub use svm::{fit_svm_rbf, SvmModel, SvmParams};
pub use tree::{fit_decision_tree, TreeModel, TreeParams};

/// Standardized predictors, labels and positive observation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub features: Matrix,
    pub labels: Vec<Label>,
    pub weights: Vec<f64>,
}

impl TrainingSet {
    pub fn new(features: Matrix, labels: Vec<Label>, weights: Vec<f64>) -> Result<TrainingSet> {
        let n = features.rows();
        if labels.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: labels.len(),
            });
        }
        if weights.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: weights.len(),
            });
        }
        if n < 2 {
            return Err(Error::TooFewObservations {
                needed: 2,
                found: n,
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "observation weight {w} must be positive"
            )));
        }
        Ok(TrainingSet {
            features,
            labels,
            weights,
        })
    }

    /// Unit weights.
    pub fn unweighted(features: Matrix, labels: Vec<Label>) -> Result<TrainingSet> {
        let n = features.rows();
        TrainingSet::new(features, labels, alloc::vec![1.0; n])
    }

    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<TrainingSet> {
        let rows: Vec<&[f64]> = vectors.iter().map(|v| v.values.as_slice()).collect();
        if let Some(first) = rows.first() {
            if let Some(bad) = rows.iter().find(|r| r.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        TrainingSet::new(
            Matrix::from_rows(&rows),
            vectors.iter().map(|v| v.label).collect(),
            vectors.iter().map(|v| v.weight).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.iter().any(|l| l.is_elite()) && self.labels.iter().any(|l| !l.is_elite())
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(Error::SingleClass)
        }
    }
}

/// Fixed vote order used everywhere votes are listed or serialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tree,
    Forest,
    Boost,
    Svm,
    Knn,
    Logit,
    Lda,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Tree,
        Family::Forest,
        Family::Boost,
        Family::Svm,
        Family::Knn,
        Family::Logit,
        Family::Lda,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Tree => "tree",
            Family::Forest => "forest",
            Family::Boost => "boost",
            Family::Svm => "svm",
            Family::Knn => "knn",
            Family::Logit => "logit",
            Family::Lda => "lda",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl core::fmt::Display for Family {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        })
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
