//! Glue between the readers and the core: ingestion, parallel tuning,
//! evaluation reports and the real-data comparison.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use anc_core::ensemble::{
    predict_lineup, select_configuration, EnsembleConfig, FitObserver, FitTask, GridPlan, GridSpec,
    SecondMetric, Selection, SelectionPolicy, TunedEnsembleModel, TuningTable, NUM_VOTERS,
};
use anc_core::evaluation::{
    compare_pmm_groups, confusion, variable_importance, ConfusionMatrix, GroupComparison,
    ImportanceTables,
};
use anc_core::ingest::{
    aggregate_lineup_observations, filter_merge, segment_stints, Dataset, DiscardReport,
    FilterThresholds, LineupObservation, PlayEvent, Stint,
};
use anc_core::stats::{Label, PlayerSeasonStats};
use anc_core::subclassifiers::Family;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Test precision of the published tuned ensemble.
pub const REFERENCE_TEST_PRECISION: f64 = 0.867;
/// Published next-season precision restricted to lineups with enough minutes.
pub const REFERENCE_NEXT_SEASON_PRECISION: f64 = 0.769;

pub struct Ingested {
    pub stints: Vec<Stint>,
    pub observations: Vec<LineupObservation>,
    pub dataset: Dataset,
    pub discards: DiscardReport,
}

pub fn ingest(
    events: &[PlayEvent],
    stats: Vec<PlayerSeasonStats>,
    thresholds: FilterThresholds,
) -> Result<Ingested> {
    let stints = segment_stints(events)?;
    let observations = aggregate_lineup_observations(&stints)?;
    let (dataset, discards) = filter_merge(stats, observations.clone(), thresholds)?;
    Ok(Ingested {
        stints,
        observations,
        dataset,
        discards,
    })
}

/// Counts fits per family; used to check that a grid costs the sum, not the
/// product, of its family sizes.
#[derive(Debug, Default)]
pub struct FitCounter {
    counts: [AtomicUsize; NUM_VOTERS],
}

impl FitCounter {
    pub fn per_family(&self) -> [usize; NUM_VOTERS] {
        std::array::from_fn(|i| self.counts[i].load(Ordering::Relaxed))
    }

    pub fn total(&self) -> usize {
        self.per_family().iter().sum()
    }
}

impl FitObserver for FitCounter {
    fn on_fit(&self, task: &FitTask) {
        self.counts[task.family.index()].fetch_add(1, Ordering::Relaxed);
    }
}

/// Grid search with tasks spread over the rayon pool. Task seeds depend only
/// on task coordinates, so the result equals the serial run.
pub fn tune_parallel(
    dataset: &Dataset,
    grid: &GridSpec,
    folds: usize,
    seed: u64,
    observer: Option<&dyn FitObserver>,
) -> Result<TuningTable> {
    let mut plan = GridPlan::new(dataset, grid, folds, seed)?;
    if let Some(o) = observer {
        plan = plan.with_observer(o);
    }
    let outcomes = plan.tasks().par_iter().map(|t| plan.run(t)).collect();
    Ok(plan.finish(outcomes)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub index: usize,
    pub avg_precision: f64,
    pub second: f64,
    pub config: EnsembleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub combinations: usize,
    pub candidates: usize,
    pub fit_failures: usize,
    pub min_precision: Vec<FrontierPoint>,
    pub avg_accuracy: Vec<FrontierPoint>,
    pub selection: Option<Selection>,
    pub selection_error: Option<String>,
}

pub fn frontier_report(table: &TuningTable, policy: SelectionPolicy) -> FrontierReport {
    let points = |metric: SecondMetric| {
        table
            .frontier(metric)
            .into_iter()
            .map(|i| {
                let r = &table.records[i];
                FrontierPoint {
                    index: i,
                    avg_precision: r.avg_precision,
                    second: match metric {
                        SecondMetric::MinPrecision => r.min_precision,
                        SecondMetric::AvgAccuracy => r.avg_accuracy,
                    },
                    config: table.config(i),
                }
            })
            .collect()
    };
    let (selection, selection_error) = match select_configuration(table, policy) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    FrontierReport {
        combinations: table.records.len(),
        candidates: table.candidates().count(),
        fit_failures: table.failures.len(),
        min_precision: points(SecondMetric::MinPrecision),
        avg_accuracy: points(SecondMetric::AvgAccuracy),
        selection,
        selection_error,
    }
}

/// `max-avg`, `floor:<f>` or `index:<i>`.
pub fn parse_policy(s: &str) -> std::result::Result<SelectionPolicy, String> {
    match s.split_once(':') {
        None if s == "max-avg" => Ok(SelectionPolicy::MaxAvg),
        Some(("floor", f)) => f
            .parse()
            .map(SelectionPolicy::MinPrecisionFloor)
            .map_err(|_| format!("bad floor {f:?}")),
        Some(("index", i)) => i
            .parse()
            .map(SelectionPolicy::InteractiveIndex)
            .map_err(|_| format!("bad frontier index {i:?}")),
        _ => Err(format!(
            "unknown policy {s:?}; use max-avg, floor:<f> or index:<i>"
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub lineups: usize,
    /// Lineups dropped because a player lacks statistics.
    pub skipped: usize,
    pub confusion: ConfusionMatrix,
    pub precision: Option<f64>,
    pub accuracy: f64,
    pub prevalence: f64,
    pub group_comparison: Option<GroupComparison>,
    pub group_comparison_error: Option<String>,
    pub votes_elite_per_family: BTreeMap<Family, usize>,
    pub importance: ImportanceTables,
}

/// Scored lineups of an evaluation run, in observation order.
pub struct Scored {
    pub observations: Vec<LineupObservation>,
    pub predicted: Vec<Label>,
}

/// Predicts every observation whose five players have statistics in
/// `stats` (the model's training season for cross-season use).
pub fn evaluate(
    model: &TunedEnsembleModel,
    observations: &[LineupObservation],
    stats: &BTreeMap<String, PlayerSeasonStats>,
) -> Result<(EvaluationReport, Scored)> {
    let mut kept = Vec::new();
    let mut predicted = Vec::new();
    let mut per_family = BTreeMap::new();
    for o in observations {
        if o.lineup.players().iter().any(|p| !stats.contains_key(p)) {
            continue;
        }
        let p = predict_lineup(model, &o.lineup, stats)?;
        for (f, v) in Family::ALL.iter().zip(p.votes) {
            *per_family.entry(*f).or_insert(0) += v.is_elite() as usize;
        }
        kept.push(o.clone());
        predicted.push(p.label);
    }
    let truth: Vec<Label> = kept.iter().map(|o| o.label).collect();
    let cm = confusion(&predicted, &truth)?;
    let pmm: Vec<f64> = kept.iter().map(|o| o.pmm).collect();
    let (group_comparison, group_comparison_error) = match compare_pmm_groups(&pmm, &predicted) {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = EvaluationReport {
        lineups: kept.len(),
        skipped: observations.len() - kept.len(),
        precision: cm.precision(),
        accuracy: if cm.total() == 0 {
            f64::NAN
        } else {
            cm.accuracy()
        },
        prevalence: if cm.total() == 0 {
            f64::NAN
        } else {
            cm.prevalence()
        },
        confusion: cm,
        group_comparison,
        group_comparison_error,
        votes_elite_per_family: per_family,
        importance: variable_importance(model),
    };
    Ok((
        report,
        Scored {
            observations: kept,
            predicted,
        },
    ))
}

/// Observations with at least `min_minutes` minutes.
pub fn restrict_minutes(
    observations: &[LineupObservation],
    min_minutes: f64,
) -> Vec<LineupObservation> {
    observations
        .iter()
        .filter(|o| o.minutes >= min_minutes)
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDeviation {
    pub name: String,
    pub reference: f64,
    pub observed: Option<f64>,
    /// observed minus reference; no tolerance is applied.
    pub deviation: Option<f64>,
}

pub fn deviation(name: &str, reference: f64, observed: Option<f64>) -> ReferenceDeviation {
    ReferenceDeviation {
        name: name.into(),
        reference,
        observed,
        deviation: observed.map(|o| o - reference),
    }
}

/// Inputs for the two-season comparison with the published figures.
pub struct SeasonPair {
    pub train_events: Vec<PlayEvent>,
    pub train_stats: Vec<PlayerSeasonStats>,
    pub next_events: Vec<PlayEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub config: EnsembleConfig,
    pub n_train: usize,
    /// Held-out part of the training season.
    pub test: EvaluationReport,
    /// Next season, lineups with 25+ minutes whose players have 50+
    /// prior-season minutes.
    pub next_season: EvaluationReport,
    pub deviations: Vec<ReferenceDeviation>,
}

/// Ingests the training season, splits 80/20, fits `config`, scores the
/// held-out part and the next season, and reports the deviation of both
/// precisions from the published ones. No tolerance is applied.
pub fn real_data_harness(
    data: &SeasonPair,
    config: &EnsembleConfig,
    seed: u64,
) -> Result<HarnessReport> {
    let thresholds = FilterThresholds::default();
    let ing = ingest(&data.train_events, data.train_stats.clone(), thresholds)?;
    let (train, test) = anc_core::ingest::split_dataset(&ing.dataset, 0.8, seed)?;
    let model = anc_core::ensemble::fit_ensemble(&train, config, seed)?;
    let (test_report, _) = evaluate(&model, &test.observations, &test.players)?;

    let prior: BTreeMap<String, PlayerSeasonStats> = data
        .train_stats
        .iter()
        .filter(|p| p.total_minutes >= thresholds.min_player_minutes)
        .map(|p| (p.player_id.clone(), p.clone()))
        .collect();
    let next_obs = aggregate_lineup_observations(&segment_stints(&data.next_events)?)?;
    let next_obs = restrict_minutes(&next_obs, thresholds.min_lineup_minutes);
    let (next_report, _) = evaluate(&model, &next_obs, &prior)?;
    let deviations = vec![
        deviation(
            "test_precision",
            REFERENCE_TEST_PRECISION,
            test_report.precision,
        ),
        deviation(
            "next_season_precision",
            REFERENCE_NEXT_SEASON_PRECISION,
            next_report.precision,
        ),
    ];
    Ok(HarnessReport {
        config: config.clone(),
        n_train: train.len(),
        test: test_report,
        next_season: next_report,
        deviations,
    })
}
