//! Confusion matrices, the PMM group comparison and variable importance.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ensemble::TunedEnsembleModel;
use crate::error::{Error, Result};
use crate::stats::Label;

/// Counts with `elite` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `tp / (tp + fp)`, undefined when nothing was predicted elite.
    pub fn precision(&self) -> Option<f64> {
        let called = self.tp + self.fp;
        (called > 0).then(|| self.tp as f64 / called as f64)
    }

    /// `(tp + tn) / n`; NaN for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn prevalence(&self) -> f64 {
        (self.tp + self.fn_) as f64 / self.total() as f64
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (predicted.is_elite(), truth.is_elite()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

pub fn confusion(predicted: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        cm.record(*p, *t);
    }
    Ok(cm)
}

pub fn precision(cm: &ConfusionMatrix) -> Option<f64> {
    cm.precision()
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    cm.accuracy()
}

/// Realized PMM of predicted-elite lineups against the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub mean_elite_pred: f64,
    pub mean_notelite_pred: f64,
    pub n_elite_pred: usize,
    pub n_notelite_pred: usize,
    pub t_statistic: f64,
    pub df: f64,
    /// One-sided: elite-predicted mean greater than the other group's.
    pub p_value: f64,
}

/// One-sided Welch t-test of `mean(elite-predicted PMM) > mean(rest)`.
pub fn compare_pmm_groups(pmm: &[f64], predicted: &[Label]) -> Result<GroupComparison> {
    if pmm.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: pmm.len(),
            right: predicted.len(),
        });
    }
    let mut elite = Vec::new();
    let mut rest = Vec::new();
    for (v, l) in pmm.iter().zip(predicted) {
        if l.is_elite() {
            elite.push(*v)
        } else {
            rest.push(*v)
        }
    }
    let w = welch_one_sided(&elite, &rest)?;
    Ok(GroupComparison {
        mean_elite_pred: w.mean_a,
        mean_notelite_pred: w.mean_b,
        n_elite_pred: elite.len(),
        n_notelite_pred: rest.len(),
        t_statistic: w.t,
        df: w.df,
        p_value: w.p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Welch's unequal-variance t-test for `H1: mean(a) > mean(b)` with
/// Welch-Satterthwaite degrees of freedom.
pub fn welch_one_sided(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    for g in [a, b] {
        if g.len() < 2 {
            return Err(Error::GroupTooSmall(g.len()));
        }
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    if sa + sb <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let t = (ma - mb) / libm::sqrt(sa + sb);
    let df = (sa + sb) * (sa + sb)
        / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    Ok(WelchTest {
        mean_a: ma,
        mean_b: mb,
        t,
        df,
        p_value: student_t_sf(t, df),
    })
}

/// Student t upper tail `P(T > t)`.
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5);
    if t > 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    1.0 - student_t_sf(t, df)
}

/// `I_x(a, b)` by the Lentz continued fraction, using the symmetry
/// `I_x(a, b) = 1 - I_{1-x}(b, a)` where the fraction converges slowly.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_fraction(1.0 - x, b, a) / b
    }
}

fn beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < 1e-15 {
            break;
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub importance: f64,
}

/// Importance per interpretable subclassifier, each sorted by decreasing
/// importance (ties by feature order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTables {
    /// Gini decrease summed over all trees, scaled to a maximum of 1.
    pub forest: Vec<ImportanceEntry>,
    /// Gini decrease summed over all boosting stages, scaled to a maximum of 1.
    pub boost: Vec<ImportanceEntry>,
    /// Absolute discriminant coefficients on the standardized scale.
    pub lda: Vec<ImportanceEntry>,
    /// Absolute logistic coefficients on the standardized scale.
    pub logit: Vec<ImportanceEntry>,
    /// Features used by the retained splits of the pruned tree, with their
    /// summed Gini decrease; empty for a root-only tree.
    pub tree: Vec<ImportanceEntry>,
}

fn table(
    names: &[String],
    values: &[f64],
    normalize: bool,
    keep_zero: bool,
) -> Vec<ImportanceEntry> {
    let max = values.iter().copied().fold(0.0, f64::max);
    let scale = if normalize && max > 0.0 {
        1.0 / max
    } else {
        1.0
    };
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| keep_zero || values[i] > 0.0)
        .collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx.into_iter()
        .map(|i| ImportanceEntry {
            feature: names[i].clone(),
            importance: values[i] * scale,
        })
        .collect()
}

pub fn variable_importance(model: &TunedEnsembleModel) -> ImportanceTables {
    let names = model.config.feature_mode.feature_names();
    let logit: Vec<f64> = model.logit.coefficients[1..]
        .iter()
        .map(|c| libm::fabs(*c))
        .collect();
    ImportanceTables {
        forest: table(&names, &model.forest.gini_importance(), true, true),
        boost: table(&names, &model.boost.gini_importance(), true, true),
        lda: table(&names, &model.lda.importance(), false, true),
        logit: table(&names, &logit, false, true),
        tree: table(&names, &model.tree.gini_importance(), false, false),
    }
}
