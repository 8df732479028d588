//! The all-or-nothing vote, grid tuning by k-fold cross-validation, the
//! efficient frontier and the final tuned ensemble.
//!
//! Tuning fits each subclassifier once per fold and per value of its own
//! parameters, stores the held-out predictions, and only then forms the
//! ensemble combinations by cross product; no combination triggers a refit.
//! The work is split into independent [`FitTask`]s so a caller can run them
//! in parallel and hand the outcomes back to [`GridPlan::finish`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::ConfusionMatrix;
use crate::features::{
    fit_standardizer, lineup_order_statistics, order_statistics, restrict_values, FeatureMode,
    FeatureVector, StandardizationParams,
};
use crate::ingest::Dataset;
use crate::linalg::Matrix;
use crate::seed;
use crate::stats::{Label, Lineup, PlayerSeasonStats};
use crate::subclassifiers::{
    fit_adaboost, fit_decision_tree, fit_lda, fit_logistic, fit_random_forest, fit_svm_rbf,
    AdaBoostModel, BoostParams, Family, ForestModel, ForestParams, KnnModel, KnnParams, LdaModel,
    LogisticModel, LogitParams, SvmModel, SvmParams, TrainingSet, TreeModel, TreeParams,
};

pub const NUM_VOTERS: usize = 7;

/// Elite iff at least `num_votes` of the seven votes are elite.
pub fn anc_vote(votes: &[Label], num_votes: usize) -> Result<Label> {
    if votes.len() != NUM_VOTERS {
        return Err(Error::VoteCount(votes.len()));
    }
    Ok(Label::from_bool(
        votes.iter().filter(|v| v.is_elite()).count() >= num_votes,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub boost: BoostParams,
    pub svm: SvmParams,
    pub knn: KnnParams,
    pub logit: LogitParams,
    pub num_votes: usize,
    #[serde(default)]
    pub feature_mode: FeatureMode,
}

impl EnsembleConfig {
    /// The tuned values reported for the published ensemble.
    pub fn reference_tuned() -> EnsembleConfig {
        EnsembleConfig {
            tree: TreeParams::new(0.05, 1.0),
            forest: ForestParams::new(500, 0.7),
            boost: BoostParams {
                mfinal: 500,
                maxdepth: 3,
                cp: 0.01,
            },
            svm: SvmParams {
                cost: 1.0,
                gamma: 1.0,
            },
            knn: KnnParams { k: 7 },
            logit: LogitParams { thresh: 0.25 },
            num_votes: 7,
            feature_mode: FeatureMode::Full140,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.feature_mode.dimension();
        self.tree.validate()?;
        self.forest.validate(dim)?;
        self.boost.validate()?;
        self.svm.validate()?;
        if self.knn.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        self.logit.validate()?;
        if !(1..=NUM_VOTERS).contains(&self.num_votes) {
            return Err(Error::InvalidParameter(format!(
                "num_votes {} must lie in 1..=7",
                self.num_votes
            )));
        }
        Ok(())
    }
}

/// Candidate values per subclassifier. LDA has no parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tree: Vec<TreeParams>,
    pub forest: Vec<ForestParams>,
    pub boost: Vec<BoostParams>,
    pub svm: Vec<SvmParams>,
    pub knn: Vec<KnnParams>,
    pub logit: Vec<LogitParams>,
    pub num_votes: Vec<usize>,
    #[serde(default)]
    pub feature_mode: FeatureMode,
}

/// Parameter index of each family (LDA always 0) plus the `num_votes` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combination {
    pub params: [usize; NUM_VOTERS],
    pub num_votes: usize,
}

impl GridSpec {
    /// The full published search grid.
    pub fn paper() -> GridSpec {
        let mut tree = Vec::new();
        for cp in [-1.0, 0.01, 0.05] {
            for loss in [1.0, 1.5, 2.0] {
                tree.push(TreeParams::new(cp, loss));
            }
        }
        let mut forest = Vec::new();
        for c in [0.5, 0.7] {
            for ntree in [100, 500] {
                forest.push(ForestParams::new(ntree, c));
            }
        }
        let mut boost = Vec::new();
        for mfinal in [100, 500] {
            for maxdepth in [1, 2, 3] {
                for cp in [0.01, 0.05] {
                    boost.push(BoostParams {
                        mfinal,
                        maxdepth,
                        cp,
                    });
                }
            }
        }
        let mut svm = Vec::new();
        for cost in [0.1, 1.0, 10.0] {
            for gamma in [0.01, 0.1, 1.0] {
                svm.push(SvmParams { cost, gamma });
            }
        }
        GridSpec {
            tree,
            forest,
            boost,
            svm,
            knn: [3, 5, 7].map(|k| KnnParams { k }).to_vec(),
            logit: [0.05, 0.25, 0.5]
                .map(|thresh| LogitParams { thresh })
                .to_vec(),
            num_votes: (1..=NUM_VOTERS).collect(),
            feature_mode: FeatureMode::Full140,
        }
    }

    /// Desk-scale grid: two values for the tree cp, forest cutoff, k and
    /// logistic threshold, one value elsewhere; 112 combinations.
    pub fn mini() -> GridSpec {
        GridSpec {
            tree: vec![TreeParams::new(0.01, 1.0), TreeParams::new(0.05, 1.0)],
            forest: vec![ForestParams::new(100, 0.5), ForestParams::new(100, 0.7)],
            boost: vec![BoostParams {
                mfinal: 100,
                maxdepth: 1,
                cp: 0.01,
            }],
            svm: vec![SvmParams {
                cost: 1.0,
                gamma: 0.01,
            }],
            knn: vec![KnnParams { k: 3 }, KnnParams { k: 7 }],
            logit: vec![LogitParams { thresh: 0.01 }, LogitParams { thresh: 0.25 }],
            num_votes: (1..=NUM_VOTERS).collect(),
            feature_mode: FeatureMode::Full140,
        }
    }

    /// A one-combination grid.
    pub fn single(config: &EnsembleConfig) -> GridSpec {
        GridSpec {
            tree: vec![config.tree],
            forest: vec![config.forest],
            boost: vec![config.boost],
            svm: vec![config.svm],
            knn: vec![config.knn],
            logit: vec![config.logit],
            num_votes: vec![config.num_votes],
            feature_mode: config.feature_mode,
        }
    }

    /// Grid size of each family in vote order.
    pub fn family_sizes(&self) -> [usize; NUM_VOTERS] {
        [
            self.tree.len(),
            self.forest.len(),
            self.boost.len(),
            self.svm.len(),
            self.knn.len(),
            self.logit.len(),
            1,
        ]
    }

    /// Subclassifier fits per fold: the sum, not the product, of the sizes.
    pub fn fits_per_fold(&self) -> usize {
        self.family_sizes().iter().sum()
    }

    pub fn combinations(&self) -> usize {
        self.family_sizes().iter().product::<usize>() * self.num_votes.len()
    }

    /// Mixed-radix decoding, tree outermost and `num_votes` innermost.
    pub fn combination(&self, index: usize) -> Combination {
        let sizes = self.family_sizes();
        let v = self.num_votes.len();
        let mut rest = index / v;
        let mut params = [0; NUM_VOTERS];
        for f in (0..NUM_VOTERS).rev() {
            params[f] = rest % sizes[f];
            rest /= sizes[f];
        }
        Combination {
            params,
            num_votes: self.num_votes[index % v],
        }
    }

    pub fn config(&self, index: usize) -> EnsembleConfig {
        let c = self.combination(index);
        EnsembleConfig {
            tree: self.tree[c.params[0]],
            forest: self.forest[c.params[1]],
            boost: self.boost[c.params[2]],
            svm: self.svm[c.params[3]],
            knn: self.knn[c.params[4]],
            logit: self.logit[c.params[5]],
            num_votes: c.num_votes,
            feature_mode: self.feature_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family_sizes().contains(&0) || self.num_votes.is_empty() {
            return Err(Error::InvalidParameter(
                "every grid dimension needs at least one value".into(),
            ));
        }
        let dim = self.feature_mode.dimension();
        self.tree.iter().try_for_each(|p| p.validate())?;
        self.forest.iter().try_for_each(|p| p.validate(dim))?;
        self.boost.iter().try_for_each(|p| p.validate())?;
        self.svm.iter().try_for_each(|p| p.validate())?;
        self.logit.iter().try_for_each(|p| p.validate())?;
        if self.knn.iter().any(|p| p.k == 0) {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if let Some(v) = self
            .num_votes
            .iter()
            .find(|v| !(1..=NUM_VOTERS).contains(*v))
        {
            return Err(Error::InvalidParameter(format!(
                "num_votes {v} must lie in 1..=7"
            )));
        }
        Ok(())
    }
}

/// Seeded uniform fold assignment: a random permutation dealt round-robin,
/// so fold sizes differ by at most one. Not stratified.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if n < k {
        return Err(Error::TooFewObservations {
            needed: k,
            found: n,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng(seed, &[0xF01D]));
    let mut fold = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold[i] = pos % k;
    }
    Ok(fold)
}

/// Order-statistic feature vectors of every observation, restricted to `mode`.
pub fn dataset_features(dataset: &Dataset, mode: FeatureMode) -> Result<Vec<FeatureVector>> {
    dataset
        .observations
        .iter()
        .map(|o| {
            let mut v = order_statistics(o, &dataset.players)?;
            v.values = restrict_values(&v.values, mode)?;
            Ok(v)
        })
        .collect()
}

/// Standardizer for held-out fold `k`, fitted on every other fold only.
pub fn fold_standardizer(
    vectors: &[FeatureVector],
    folds: &[usize],
    k: usize,
) -> Result<StandardizationParams> {
    fit_standardizer(
        vectors
            .iter()
            .zip(folds)
            .filter(|(_, f)| **f != k)
            .map(|(v, _)| v.values.as_slice()),
    )
}

/// Observer notified before every subclassifier fit of a grid run.
pub trait FitObserver: Sync {
    fn on_fit(&self, task: &FitTask);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FitTask {
    pub fold: usize,
    pub family: Family,
    pub param: usize,
}

/// Held-out predictions of one task, in the fold's row order.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub task: FitTask,
    pub predictions: core::result::Result<Vec<Label>, String>,
}

struct FoldData {
    train: TrainingSet,
    test: Matrix,
    /// Dataset row index of each test row.
    rows: Vec<usize>,
}

/// Prepared folds of a grid run.
pub struct GridPlan<'a> {
    grid: GridSpec,
    seed: u64,
    labels: Vec<Label>,
    fold_of: Vec<usize>,
    folds: Vec<FoldData>,
    observer: Option<&'a dyn FitObserver>,
}

impl<'a> GridPlan<'a> {
    pub fn new(dataset: &Dataset, grid: &GridSpec, k: usize, seed: u64) -> Result<GridPlan<'a>> {
        grid.validate()?;
        let vectors = dataset_features(dataset, grid.feature_mode)?;
        let fold_of = make_folds(vectors.len(), k, seed)?;
        let mut folds = Vec::with_capacity(k);
        for fold in 0..k {
            let params = fold_standardizer(&vectors, &fold_of, fold)?;
            let (mut train, mut test) = (Vec::new(), Vec::new());
            let mut rows = Vec::new();
            for (i, v) in vectors.iter().enumerate() {
                let z = FeatureVector {
                    values: params.apply_values(&v.values)?,
                    ..v.clone()
                };
                if fold_of[i] == fold {
                    rows.push(i);
                    test.push(z.values);
                } else {
                    train.push(z);
                }
            }
            folds.push(FoldData {
                train: TrainingSet::from_vectors(&train)?,
                test: Matrix::from_rows(&test),
                rows,
            });
        }
        Ok(GridPlan {
            grid: grid.clone(),
            seed,
            labels: vectors.iter().map(|v| v.label).collect(),
            fold_of,
            folds,
            observer: None,
        })
    }

    pub fn with_observer(mut self, observer: &'a dyn FitObserver) -> GridPlan<'a> {
        self.observer = Some(observer);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn fold_assignment(&self) -> &[usize] {
        &self.fold_of
    }

    /// One task per fold, family and parameter value of that family.
    pub fn tasks(&self) -> Vec<FitTask> {
        let sizes = self.grid.family_sizes();
        let mut out = Vec::new();
        for fold in 0..self.folds.len() {
            for family in Family::ALL {
                for param in 0..sizes[family.index()] {
                    out.push(FitTask {
                        fold,
                        family,
                        param,
                    });
                }
            }
        }
        out
    }

    /// Fits one subclassifier on the task's training folds and predicts its
    /// held-out fold. The seed depends only on the task coordinates.
    pub fn run(&self, task: &FitTask) -> TaskOutcome {
        if let Some(o) = self.observer {
            o.on_fit(task);
        }
        let fold = &self.folds[task.fold];
        let s = seed::derive(
            self.seed,
            &[
                task.fold as u64,
                task.family.index() as u64,
                task.param as u64,
            ],
        );
        let fitted = FittedModel::fit(&fold.train, &self.grid, task.family, task.param, s);
        let predictions = fitted
            .and_then(|m| {
                fold.test
                    .iter_rows()
                    .map(|x| m.predict(x))
                    .collect::<Result<Vec<_>>>()
            })
            .map_err(|e| e.to_string());
        TaskOutcome {
            task: *task,
            predictions,
        }
    }

    pub fn run_all(&self) -> Vec<TaskOutcome> {
        self.tasks().iter().map(|t| self.run(t)).collect()
    }

    /// Combines stored held-out predictions into per-combination records.
    pub fn finish(self, outcomes: Vec<TaskOutcome>) -> Result<TuningTable> {
        let sizes = self.grid.family_sizes();
        let n = self.labels.len();
        let k = self.folds.len();
        // predictions[family][param][row], rows in dataset order.
        let mut predictions: Vec<Vec<Vec<Label>>> = sizes
            .iter()
            .map(|&s| vec![vec![Label::NotElite; n]; s])
            .collect();
        let mut failed: Vec<Vec<Vec<bool>>> =
            sizes.iter().map(|&s| vec![vec![false; k]; s]).collect();
        let mut done: BTreeSet<FitTask> = BTreeSet::new();
        let mut failures = Vec::new();
        for o in outcomes {
            let t = o.task;
            if t.fold >= k || t.param >= sizes[t.family.index()] {
                return Err(Error::InvalidParameter(format!(
                    "task {t:?} is not part of this plan"
                )));
            }
            done.insert(t);
            match o.predictions {
                Ok(p) => {
                    let rows = &self.folds[t.fold].rows;
                    if p.len() != rows.len() {
                        return Err(Error::LengthMismatch {
                            left: rows.len(),
                            right: p.len(),
                        });
                    }
                    for (r, l) in rows.iter().zip(p) {
                        predictions[t.family.index()][t.param][*r] = l;
                    }
                }
                Err(message) => {
                    failed[t.family.index()][t.param][t.fold] = true;
                    failures.push(FitFailure { task: t, message });
                }
            }
        }
        if done.len() != k * self.grid.fits_per_fold() {
            return Err(Error::InvalidParameter(format!(
                "expected {} task outcomes, got {}",
                k * self.grid.fits_per_fold(),
                done.len()
            )));
        }
        failures.sort_by_key(|f| f.task);
        let records = aggregate(
            &self.grid,
            &self.labels,
            &self.fold_of,
            k,
            &predictions,
            &failed,
        );
        Ok(TuningTable {
            grid: self.grid,
            folds: k,
            seed: self.seed,
            fold_of: self.fold_of,
            labels: self.labels,
            predictions,
            records,
            failures,
        })
    }
}

/// Serial grid run.
pub fn cross_validate_grid(
    dataset: &Dataset,
    grid: &GridSpec,
    k: usize,
    seed: u64,
) -> Result<TuningTable> {
    let plan = GridPlan::new(dataset, grid, k, seed)?;
    let outcomes = plan.run_all();
    plan.finish(outcomes)
}

fn aggregate(
    grid: &GridSpec,
    labels: &[Label],
    fold_of: &[usize],
    k: usize,
    predictions: &[Vec<Vec<Label>>],
    failed: &[Vec<Vec<bool>>],
) -> Vec<ComboRecord> {
    let sizes = grid.family_sizes();
    let n = labels.len();
    let mut records = Vec::with_capacity(grid.combinations());
    let mut counts = vec![vec![0u8; n]; NUM_VOTERS + 1];
    let mut fail = vec![vec![false; k]; NUM_VOTERS + 1];
    let mut params = [0usize; NUM_VOTERS];
    // Depth-first over families keeps running elite-vote counts per row, so
    // the cost per leaf is one pass over the rows.
    fn walk(
        level: usize,
        ctx: &Walk<'_>,
        params: &mut [usize; NUM_VOTERS],
        counts: &mut [Vec<u8>],
        fail: &mut [Vec<bool>],
        records: &mut Vec<ComboRecord>,
    ) {
        if level == NUM_VOTERS {
            leaf(ctx, &counts[level], &fail[level], records);
            return;
        }
        for p in 0..ctx.sizes[level] {
            params[level] = p;
            let (head, tail) = counts.split_at_mut(level + 1);
            for ((out, prev), l) in tail[0]
                .iter_mut()
                .zip(&head[level])
                .zip(&ctx.predictions[level][p])
            {
                *out = prev + l.is_elite() as u8;
            }
            let (head, tail) = fail.split_at_mut(level + 1);
            for ((out, prev), f) in tail[0]
                .iter_mut()
                .zip(&head[level])
                .zip(&ctx.failed[level][p])
            {
                *out = *prev || *f;
            }
            walk(level + 1, ctx, params, counts, fail, records);
        }
    }
    let ctx = Walk {
        sizes,
        labels,
        fold_of,
        k,
        num_votes: &grid.num_votes,
        predictions,
        failed,
    };
    walk(0, &ctx, &mut params, &mut counts, &mut fail, &mut records);
    records
}

struct Walk<'a> {
    sizes: [usize; NUM_VOTERS],
    labels: &'a [Label],
    fold_of: &'a [usize],
    k: usize,
    num_votes: &'a [usize],
    predictions: &'a [Vec<Vec<Label>>],
    failed: &'a [Vec<Vec<bool>>],
}

fn leaf(ctx: &Walk<'_>, counts: &[u8], fail: &[bool], records: &mut Vec<ComboRecord>) {
    // hist[fold][truth][elite votes]
    let mut hist = vec![[[0u64; NUM_VOTERS + 1]; 2]; ctx.k];
    for ((c, l), f) in counts.iter().zip(ctx.labels).zip(ctx.fold_of) {
        hist[*f][l.is_elite() as usize][*c as usize] += 1;
    }
    let fit_failed = fail.iter().any(|f| *f);
    for &v in ctx.num_votes {
        let mut precisions = Vec::with_capacity(ctx.k);
        let mut accuracy_sum = 0.0;
        let mut scored = 0;
        let mut has_na = false;
        for (f, h) in hist.iter().enumerate() {
            let cm = ConfusionMatrix {
                tp: h[1][v..].iter().sum(),
                fp: h[0][v..].iter().sum(),
                fn_: h[1][..v].iter().sum(),
                tn: h[0][..v].iter().sum(),
            };
            if fail[f] {
                has_na = true;
                continue;
            }
            accuracy_sum += cm.accuracy();
            scored += 1;
            match fold_precision(&cm) {
                Some(p) => precisions.push(p),
                None => has_na = true,
            }
        }
        let index = records.len();
        records.push(ComboRecord::from_folds(
            index,
            &precisions,
            accuracy_sum / scored as f64,
            has_na,
            fit_failed,
        ));
    }
}

/// `tp / (tp + fp)`, undefined for a fold with no elite predictions.
pub fn fold_precision(cm: &ConfusionMatrix) -> Option<f64> {
    cm.precision()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    pub task: FitTask,
    pub message: String,
}

/// Fold aggregates of one combination. With `has_na` set, the precision
/// statistics cover only the folds where precision is defined (NaN when
/// there are none) and the record is excluded from the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComboRecord {
    pub index: usize,
    pub avg_precision: f64,
    pub min_precision: f64,
    /// Sample standard deviation over folds.
    pub sd_precision: f64,
    /// Mean over the folds whose fits succeeded.
    pub avg_accuracy: f64,
    pub has_na: bool,
    /// Some subclassifier fit behind this combination failed on some fold.
    pub fit_failed: bool,
}

impl ComboRecord {
    fn from_folds(
        index: usize,
        precisions: &[f64],
        avg_accuracy: f64,
        has_na: bool,
        fit_failed: bool,
    ) -> ComboRecord {
        let m = precisions.len() as f64;
        let (avg, min, sd) = if precisions.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            let avg = precisions.iter().sum::<f64>() / m;
            let min = precisions.iter().copied().fold(f64::INFINITY, f64::min);
            let sd = if precisions.len() > 1 {
                libm::sqrt(
                    precisions
                        .iter()
                        .map(|p| (p - avg) * (p - avg))
                        .sum::<f64>()
                        / (m - 1.0),
                )
            } else {
                0.0
            };
            (avg, min, sd)
        };
        ComboRecord {
            index,
            avg_precision: avg,
            min_precision: min,
            sd_precision: sd,
            avg_accuracy,
            has_na: has_na || fit_failed,
            fit_failed,
        }
    }

    pub fn is_candidate(&self) -> bool {
        !self.has_na && !self.fit_failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningTable {
    pub grid: GridSpec,
    pub folds: usize,
    pub seed: u64,
    pub fold_of: Vec<usize>,
    pub labels: Vec<Label>,
    /// Held-out predictions `[family][param][row]`.
    pub predictions: Vec<Vec<Vec<Label>>>,
    pub records: Vec<ComboRecord>,
    pub failures: Vec<FitFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondMetric {
    MinPrecision,
    AvgAccuracy,
}

impl TuningTable {
    pub fn config(&self, index: usize) -> EnsembleConfig {
        self.grid.config(index)
    }

    pub fn candidates(&self) -> impl Iterator<Item = &ComboRecord> {
        self.records.iter().filter(|r| r.is_candidate())
    }

    /// Frontier over `(avg_precision, metric)` among records without NA
    /// folds, as record indices ordered by decreasing average precision.
    pub fn frontier(&self, metric: SecondMetric) -> Vec<usize> {
        let cands: Vec<&ComboRecord> = self.candidates().collect();
        let points: Vec<(f64, f64)> = cands
            .iter()
            .map(|r| {
                let b = match metric {
                    SecondMetric::MinPrecision => r.min_precision,
                    SecondMetric::AvgAccuracy => r.avg_accuracy,
                };
                (r.avg_precision, b)
            })
            .collect();
        efficient_frontier(&points)
            .into_iter()
            .map(|i| cands[i].index)
            .collect()
    }
}

/// Weak Pareto set of `points` (maximising both coordinates): a point is kept
/// iff no other point is at least as good in both coordinates and strictly
/// better in one; of exact duplicates the first is kept. Returns indices
/// ordered by decreasing first coordinate.
pub fn efficient_frontier(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[j]
            .0
            .total_cmp(&points[i].0)
            .then(points[j].1.total_cmp(&points[i].1))
            .then(i.cmp(&j))
    });
    let mut best = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for i in order {
        if out.is_empty() || points[i].1 > best {
            best = points[i].1;
            out.push(i);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "value", rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Highest average precision; ties by higher minimum, lower sd, lower index.
    MaxAvg,
    /// Highest average precision among combinations whose worst fold reaches the floor.
    MinPrecisionFloor(f64),
    /// The i-th point of the (average, minimum) precision frontier, leaving
    /// the trade-off to a person.
    InteractiveIndex(usize),
}

fn better(a: &ComboRecord, b: &ComboRecord) -> bool {
    a.avg_precision
        .total_cmp(&b.avg_precision)
        .then(a.min_precision.total_cmp(&b.min_precision))
        .then(b.sd_precision.total_cmp(&a.sd_precision))
        .then(b.index.cmp(&a.index))
        .is_gt()
}

fn best_of<'a>(records: impl Iterator<Item = &'a ComboRecord>) -> Option<&'a ComboRecord> {
    records.fold(None, |acc, r| match acc {
        Some(b) if !better(r, b) => Some(b),
        _ => Some(r),
    })
}

/// Chosen combination and its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub record: ComboRecord,
    pub config: EnsembleConfig,
}

pub fn select_configuration(table: &TuningTable, policy: SelectionPolicy) -> Result<Selection> {
    let best = best_of(table.candidates()).ok_or(Error::NoCandidates)?;
    let record = match policy {
        SelectionPolicy::MaxAvg => *best,
        SelectionPolicy::MinPrecisionFloor(floor) => {
            match best_of(table.candidates().filter(|r| r.min_precision >= floor)) {
                Some(r) => *r,
                None => {
                    return Err(Error::InfeasibleFloor {
                        floor,
                        best_min: table
                            .candidates()
                            .map(|r| r.min_precision)
                            .fold(f64::NEG_INFINITY, f64::max),
                        best_avg: best.avg_precision,
                    })
                }
            }
        }
        SelectionPolicy::InteractiveIndex(i) => {
            let frontier = table.frontier(SecondMetric::MinPrecision);
            let idx = *frontier.get(i).ok_or(Error::FrontierIndex {
                index: i,
                len: frontier.len(),
            })?;
            table.records[idx]
        }
    };
    Ok(Selection {
        config: table.config(record.index),
        record,
    })
}

/// One fitted subclassifier with the parameters needed to predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Tree(TreeModel),
    Forest(ForestModel),
    Boost(AdaBoostModel),
    Svm(SvmModel),
    Knn(KnnModel),
    Logit {
        model: LogisticModel,
        params: LogitParams,
    },
    Lda(LdaModel),
}

impl FittedModel {
    fn fit(
        train: &TrainingSet,
        grid: &GridSpec,
        family: Family,
        param: usize,
        seed: u64,
    ) -> Result<FittedModel> {
        Ok(match family {
            Family::Tree => FittedModel::Tree(fit_decision_tree(train, &grid.tree[param])?),
            Family::Forest => {
                FittedModel::Forest(fit_random_forest(train, &grid.forest[param], seed)?)
            }
            Family::Boost => FittedModel::Boost(fit_adaboost(train, &grid.boost[param], seed)?),
            Family::Svm => FittedModel::Svm(fit_svm_rbf(train, &grid.svm[param])?),
            Family::Knn => FittedModel::Knn(KnnModel::fit(train, &grid.knn[param])?),
            Family::Logit => FittedModel::Logit {
                model: fit_logistic(train)?,
                params: grid.logit[param],
            },
            Family::Lda => FittedModel::Lda(fit_lda(train)?),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            FittedModel::Tree(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Boost(m) => m.predict(x),
            FittedModel::Svm(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Logit { model, params } => model.predict(x, params),
            FittedModel::Lda(m) => m.predict(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    /// FNV-1a digest of the training observations and player statistics.
    pub data_hash: String,
    pub n_train: usize,
}

/// The seven fitted subclassifiers, the standardizer they were fitted on, and
/// the player statistics that define the feature basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedEnsembleModel {
    pub config: EnsembleConfig,
    pub standardizer: StandardizationParams,
    pub tree: TreeModel,
    pub forest: ForestModel,
    pub boost: AdaBoostModel,
    pub svm: SvmModel,
    pub knn: KnnModel,
    pub logit: LogisticModel,
    pub lda: LdaModel,
    pub metadata: TrainingMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsemblePrediction {
    pub label: Label,
    /// Tree, forest, boost, svm, knn, logit, lda.
    pub votes: [Label; NUM_VOTERS],
}

impl EnsemblePrediction {
    pub fn elite_votes(&self) -> usize {
        self.votes.iter().filter(|v| v.is_elite()).count()
    }

    /// The verdict these votes would get at another agreement level.
    pub fn label_at(&self, num_votes: usize) -> Label {
        Label::from_bool(self.elite_votes() >= num_votes)
    }
}

/// Seed of the final fit of `family`.
fn final_seed(seed: u64, family: Family) -> u64 {
    seed::derive(seed, &[u64::MAX, family.index() as u64])
}

pub fn fit_ensemble(
    train: &Dataset,
    config: &EnsembleConfig,
    seed: u64,
) -> Result<TunedEnsembleModel> {
    config.validate()?;
    let raw = dataset_features(train, config.feature_mode)?;
    let standardizer = fit_standardizer(raw.iter().map(|v| v.values.as_slice()))?;
    let z = standardizer.apply(&raw)?;
    let ts = TrainingSet::from_vectors(&z)?;
    Ok(TunedEnsembleModel {
        tree: fit_decision_tree(&ts, &config.tree)?,
        forest: fit_random_forest(&ts, &config.forest, final_seed(seed, Family::Forest))?,
        boost: fit_adaboost(&ts, &config.boost, final_seed(seed, Family::Boost))?,
        svm: fit_svm_rbf(&ts, &config.svm)?,
        knn: KnnModel::fit(&ts, &config.knn)?,
        logit: fit_logistic(&ts)?,
        lda: fit_lda(&ts)?,
        standardizer,
        config: config.clone(),
        metadata: TrainingMetadata {
            seed,
            data_hash: data_fingerprint(train),
            n_train: train.len(),
        },
    })
}

/// Verdict and votes for a raw (unstandardized) feature vector in the
/// model's feature mode.
pub fn predict_ensemble(model: &TunedEnsembleModel, raw: &[f64]) -> Result<EnsemblePrediction> {
    let x = model.standardizer.apply_values(raw)?;
    let votes = [
        model.tree.predict(&x)?,
        model.forest.predict(&x)?,
        model.boost.predict(&x)?,
        model.svm.predict(&x)?,
        model.knn.predict(&x)?,
        model.logit.predict(&x, &model.config.logit)?,
        model.lda.predict(&x)?,
    ];
    Ok(EnsemblePrediction {
        label: anc_vote(&votes, model.config.num_votes)?,
        votes,
    })
}

/// Builds the lineup's order statistics from `stats` and predicts.
pub fn predict_lineup(
    model: &TunedEnsembleModel,
    lineup: &Lineup,
    stats: &BTreeMap<String, PlayerSeasonStats>,
) -> Result<EnsemblePrediction> {
    let full = lineup_order_statistics(lineup, stats)?;
    predict_ensemble(model, &restrict_values(&full, model.config.feature_mode)?)
}

struct Fnv(u64);

impl Fnv {
    fn bytes(&mut self, b: &[u8]) {
        for x in b {
            self.0 ^= *x as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }

    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_bits().to_le_bytes());
    }
}

/// Order-sensitive FNV-1a digest of a dataset, as 16 hex digits.
pub fn data_fingerprint(dataset: &Dataset) -> String {
    let mut h = Fnv(0xCBF2_9CE4_8422_2325);
    for o in &dataset.observations {
        h.bytes(o.lineup.to_string().as_bytes());
        h.f64(o.minutes);
        h.f64(o.point_diff);
    }
    for (id, s) in &dataset.players {
        h.bytes(id.as_bytes());
        h.f64(s.total_minutes);
        s.stats.iter().for_each(|v| h.f64(*v));
    }
    format!("{:016x}", h.0)
}
