use std::collections::BTreeMap;

use anc_core::ensemble::{
    fit_ensemble, predict_lineup, EnsembleConfig, GridPlan, GridSpec, SecondMetric, NUM_VOTERS,
};
use anc_core::rosterlab::{predict_roster, Roster};
use anc_core::stats::{Lineup, PlayerSeasonStats};

mod common;

#[test]
fn fold_aggregates_are_ordered() {
    let ds = common::toy_dataset(40, 120, 2);
    let plan = GridPlan::new(&ds, &GridSpec::mini(), 5, 4).unwrap();
    let outcomes = plan.run_all();
    let table = plan.finish(outcomes).unwrap();
    assert_eq!(table.records.len(), GridSpec::mini().combinations());
    for r in table.candidates() {
        assert!(r.min_precision <= r.avg_precision + 1e-12);
        assert!(r.sd_precision >= 0.0);
        assert!((0.0..=1.0).contains(&r.avg_accuracy));
    }
    let frontier = table.frontier(SecondMetric::AvgAccuracy);
    assert!(!frontier.is_empty());
    assert!(frontier.iter().all(|&i| table.records[i].is_candidate()));
}

#[test]
fn num_votes_nests_elite_sets() {
    let ds = common::toy_dataset(40, 120, 3);
    let mut model = fit_ensemble(&ds, &GridSpec::mini().config(0), 1).unwrap();
    let mut previous: Option<Vec<bool>> = None;
    for v in 1..=NUM_VOTERS {
        model.config.num_votes = v;
        let elite: Vec<bool> = ds
            .observations
            .iter()
            .map(|o| {
                predict_lineup(&model, &o.lineup, &ds.players)
                    .unwrap()
                    .label
                    .is_elite()
            })
            .collect();
        if let Some(prev) = &previous {
            assert!(
                elite.iter().zip(prev).all(|(now, before)| !now || *before),
                "num_votes {v}"
            );
        }
        previous = Some(elite);
    }
}

/// Next-season prediction must scale with the training standardizer: a
/// lineup's verdict cannot depend on which other players are being scored.
#[test]
fn prediction_ignores_other_players() {
    let ds = common::toy_dataset(40, 150, 5);
    let model = fit_ensemble(&ds, &EnsembleConfig::reference_tuned(), 2).unwrap();
    let before = model.standardizer.clone();
    let ids: Vec<String> = ds.players.keys().take(7).cloned().collect();
    let lineup = Lineup::new(ids[..5].to_vec()).unwrap();
    let alone = predict_lineup(&model, &lineup, &ds.players).unwrap();

    // Rescale everyone outside the lineup, as a new season would.
    let mut shifted: BTreeMap<String, PlayerSeasonStats> = ds.players.clone();
    for (id, p) in shifted.iter_mut() {
        if !lineup.contains(id) {
            p.stats.iter_mut().for_each(|v| *v *= 3.0);
        }
    }
    assert_eq!(predict_lineup(&model, &lineup, &shifted).unwrap(), alone);

    let roster = Roster::new("r", ids, &shifted);
    let batch = predict_roster(&model, &roster, &shifted).unwrap();
    let entry = batch.lineups.iter().find(|v| v.lineup == lineup).unwrap();
    assert_eq!((entry.label, entry.votes), (alone.label, alone.votes));
    assert_eq!(model.standardizer, before);
}

#[test]
fn identical_seeds_give_identical_models() {
    let ds = common::toy_dataset(40, 100, 6);
    let cfg = GridSpec::mini().config(57);
    let a = serde_json::to_string(&fit_ensemble(&ds, &cfg, 8).unwrap()).unwrap();
    let b = serde_json::to_string(&fit_ensemble(&ds, &cfg, 8).unwrap()).unwrap();
    assert_eq!(a, b);
}
