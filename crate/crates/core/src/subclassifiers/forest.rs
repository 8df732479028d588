//! Random forest with a cutoff-weighted vote.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowConfig, TreeModel};
use super::{check_dim, TrainingSet};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub ntree: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`.
    #[serde(default)]
    pub mtry: Option<usize>,
    /// Elite vote fraction at which the forest is indifferent.
    pub cutoff: f64,
}

impl ForestParams {
    pub fn new(ntree: usize, cutoff: f64) -> ForestParams {
        ForestParams {
            ntree,
            mtry: None,
            cutoff,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.ntree == 0 {
            return Err(Error::InvalidParameter("ntree must be positive".into()));
        }
        if !(0.5..1.0).contains(&self.cutoff) {
            return Err(Error::InvalidParameter(alloc::format!(
                "forest cutoff {} must lie in [0.5, 1)",
                self.cutoff
            )));
        }
        if let Some(m) = self.mtry {
            if m == 0 || m > dim {
                return Err(Error::InvalidParameter(alloc::format!(
                    "mtry {m} must lie in 1..={dim}"
                )));
            }
        }
        Ok(())
    }

    pub fn mtry_for(&self, dim: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (libm::floor(libm::sqrt(dim as f64)) as usize).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub seed: u64,
    pub cutoff: f64,
    pub trees: Vec<TreeModel>,
}

/// With `p` the fraction of trees voting elite, the forest picks the class
/// maximising `(p / c, (1 - p) / (1 - c))`; ties go to `not_elite`.
pub fn forest_verdict(p: f64, c: f64) -> Label {
    Label::from_bool(p / c > (1.0 - p) / (1.0 - c))
}

/// Each tree sees an unweighted bootstrap resample of size n and a fresh
/// sample of `mtry` features at every split, and is grown to purity.
pub fn fit_random_forest(
    train: &TrainingSet,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    let d = train.dim();
    params.validate(d)?;
    let cfg = GrowConfig {
        loss_fp: 1.0,
        min_split: 2,
        min_bucket: 1,
        max_depth: usize::MAX,
        mtry: Some(params.mtry_for(d)),
    };
    let unit = vec![1.0; train.len()];
    let n = train.len();
    let trees = (0..params.ntree)
        .map(|t| {
            let mut rng = seed::rng(seed, &[t as u64]);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow(
                &train.features,
                &train.labels,
                &unit,
                &sample,
                &cfg,
                Some(&mut rng),
            )
        })
        .collect();
    Ok(ForestModel {
        seed,
        cutoff: params.cutoff,
        trees,
    })
}

impl ForestModel {
    pub fn dim(&self) -> usize {
        self.trees.first().map_or(0, |t| t.dim)
    }

    pub fn elite_fraction(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let votes = self
            .trees
            .iter()
            .filter(|t| t.predict_unchecked(x).is_elite())
            .count();
        Ok(votes as f64 / self.trees.len() as f64)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(forest_verdict(self.elite_fraction(x)?, self.cutoff))
    }

    /// Gini decrease summed over every split of every tree.
    pub fn gini_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.dim()];
        for t in &self.trees {
            for (f, g) in t.splits() {
                imp[f] += g;
            }
        }
        imp
    }
}
