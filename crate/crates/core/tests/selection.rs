use anc_core::ensemble::{
    efficient_frontier, select_configuration, ComboRecord, GridSpec, SecondMetric, SelectionPolicy,
    TuningTable,
};
use anc_core::Error;
use proptest::prelude::*;

fn record(index: usize, avg: f64, min: f64, has_na: bool) -> ComboRecord {
    ComboRecord {
        index,
        avg_precision: avg,
        min_precision: min,
        sd_precision: 0.1,
        avg_accuracy: 0.6,
        has_na,
        fit_failed: false,
    }
}

fn table(records: Vec<ComboRecord>) -> TuningTable {
    TuningTable {
        grid: GridSpec::mini(),
        folds: 10,
        seed: 0,
        fold_of: Vec::new(),
        labels: Vec::new(),
        predictions: Vec::new(),
        records,
        failures: Vec::new(),
    }
}

fn published() -> TuningTable {
    table(vec![
        record(0, 0.798, 0.50, false),
        record(1, 0.770, 0.667, false),
        record(2, 0.70, 0.60, false),
        // An NA combination never competes, however good it looks.
        record(3, 0.95, 0.90, true),
    ])
}

#[test]
fn frontier_keeps_the_two_published_points() {
    assert_eq!(published().frontier(SecondMetric::MinPrecision), vec![0, 1]);
}

#[test]
fn floor_policy_examples() {
    let t = published();
    let pick = |p| select_configuration(&t, p).unwrap().record;
    let r = pick(SelectionPolicy::MinPrecisionFloor(0.6));
    assert_eq!((r.avg_precision, r.min_precision), (0.770, 0.667));
    assert_eq!(
        pick(SelectionPolicy::MinPrecisionFloor(0.0)).avg_precision,
        0.798
    );
    assert_eq!(pick(SelectionPolicy::MaxAvg).avg_precision, 0.798);
    assert_eq!(pick(SelectionPolicy::InteractiveIndex(1)).index, 1);
    match select_configuration(&t, SelectionPolicy::MinPrecisionFloor(0.9)) {
        Err(Error::InfeasibleFloor {
            best_min, best_avg, ..
        }) => assert_eq!((best_min, best_avg), (0.667, 0.798)),
        other => panic!("expected an infeasible floor, got {other:?}"),
    }
    assert!(matches!(
        select_configuration(&t, SelectionPolicy::InteractiveIndex(2)),
        Err(Error::FrontierIndex { index: 2, len: 2 })
    ));
}

#[test]
fn all_na_table_has_no_selection() {
    let t = table(vec![record(0, 0.9, 0.8, true)]);
    assert!(matches!(
        select_configuration(&t, SelectionPolicy::MaxAvg),
        Err(Error::NoCandidates)
    ));
}

#[test]
fn selected_config_is_the_grid_entry() {
    let t = published();
    let s = select_configuration(&t, SelectionPolicy::MinPrecisionFloor(0.6)).unwrap();
    assert_eq!(s.config, GridSpec::mini().config(1));
}

fn dominance_oracle(points: &[(f64, f64)]) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..points.len())
        .filter(|&i| {
            let (a, b) = points[i];
            let dominated = points
                .iter()
                .any(|&(c, d)| c >= a && d >= b && (c > a || d > b));
            let earlier_duplicate = points[..i].contains(&(a, b));
            !dominated && !earlier_duplicate
        })
        .collect();
    keep.sort_by(|&i, &j| points[j].0.total_cmp(&points[i].0));
    keep
}

proptest! {
    #[test]
    fn frontier_matches_quadratic_oracle(raw in proptest::collection::vec((0u8..12, 0u8..12), 0..60)) {
        // A coarse lattice makes ties and duplicates common.
        let points: Vec<(f64, f64)> = raw.iter().map(|&(a, b)| (a as f64 / 11.0, b as f64 / 11.0)).collect();
        prop_assert_eq!(efficient_frontier(&points), dominance_oracle(&points));
    }
}
