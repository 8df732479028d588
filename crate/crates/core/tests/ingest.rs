use anc_core::ingest::{
    aggregate_lineup_observations, normalize_player_name, segment_stints, split_dataset, PlayEvent,
};
use anc_core::stats::{Label, Lineup};
use proptest::prelude::*;

mod common;

fn lineup(base: usize) -> Lineup {
    Lineup::new((base..base + 5).map(|i| format!("p{i}"))).unwrap()
}

/// A game as (gap seconds, home unit, away unit, home points, away points).
fn game() -> impl Strategy<Value = Vec<(u32, usize, usize, u32, u32)>> {
    proptest::collection::vec((0u32..200, 0usize..3, 3usize..6, 0u32..4, 0u32..4), 1..40)
}

fn events(rows: &[(u32, usize, usize, u32, u32)]) -> Vec<PlayEvent> {
    let mut t = 0;
    rows.iter()
        .map(|&(gap, h, a, hp, ap)| {
            t += gap;
            PlayEvent {
                game_id: "g".into(),
                elapsed_seconds: t as f64,
                home: lineup(h * 5),
                away: lineup(a * 5),
                home_points: hp,
                away_points: ap,
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn stints_tile_the_game(rows in game()) {
        let ev = events(&rows);
        let stints = segment_stints(&ev).unwrap();
        let total: f64 = stints.iter().map(|s| s.duration_seconds()).sum();
        prop_assert_eq!(total, ev.last().unwrap().elapsed_seconds - ev[0].elapsed_seconds);
        for w in stints.windows(2) {
            prop_assert!(w[0].end_seconds <= w[1].start_seconds);
        }

        // Oracle: runs of identical units, each ending where the next begins;
        // runs of zero length carry no time and are dropped with their points.
        let mut runs: Vec<(f64, f64, i64)> = Vec::new();
        let mut i = 0;
        while i < ev.len() {
            let mut j = i;
            let mut d = 0;
            while j < ev.len() && ev[j].home == ev[i].home && ev[j].away == ev[i].away {
                d += ev[j].home_points as i64 - ev[j].away_points as i64;
                j += 1;
            }
            let end = ev.get(j).map_or(ev[j - 1].elapsed_seconds, |e| e.elapsed_seconds);
            if end > ev[i].elapsed_seconds {
                runs.push((ev[i].elapsed_seconds, end, d));
            }
            i = j;
        }
        let got: Vec<(f64, f64, i64)> = stints.iter().map(|s| (s.start_seconds, s.end_seconds, s.home_point_diff)).collect();
        prop_assert_eq!(got, runs);
    }

    #[test]
    fn observations_conserve_minutes_and_points(rows in game()) {
        let stints = segment_stints(&events(&rows)).unwrap();
        let obs = aggregate_lineup_observations(&stints).unwrap();
        let minutes: f64 = obs.iter().map(|o| o.minutes).sum();
        let stint_minutes: f64 = stints.iter().filter(|s| s.duration_seconds() > 0.0).map(|s| 2.0 * s.duration_minutes()).sum();
        prop_assert!((minutes - stint_minutes).abs() < 1e-9);
        let net: f64 = obs.iter().map(|o| o.point_diff).sum();
        prop_assert!(net.abs() < 1e-9, "each stint adds +d and -d");
        for o in &obs {
            prop_assert!((o.pmm * o.minutes - o.point_diff).abs() < 1e-9);
            prop_assert_eq!(o.label, Label::from_pmm(o.pmm));
        }
        prop_assert!(obs.windows(2).all(|w| w[0].lineup < w[1].lineup));
    }

    #[test]
    fn normalization_is_idempotent(raw in "[A-Za-z .'-]{1,20}( (Jr\\.|Sr|II|III|IV))?") {
        if let Ok(once) = normalize_player_name(&raw) {
            prop_assert_eq!(normalize_player_name(&once).unwrap(), once.clone());
            prop_assert!(!once.contains("  ") && once == once.trim());
        }
    }
}

#[test]
fn suffixes_and_punctuation() {
    assert_eq!(
        normalize_player_name("Marcus Morris Sr.").unwrap(),
        "marcus morris"
    );
    assert_eq!(
        normalize_player_name("  Larry  Nance Jr. ").unwrap(),
        "larry nance"
    );
    assert_eq!(
        normalize_player_name("Kelly Oubre III").unwrap(),
        "kelly oubre"
    );
    assert_eq!(
        normalize_player_name("D'Angelo Russell").unwrap(),
        "dangelo russell"
    );
}

#[test]
fn split_uses_floor_and_needs_ten_rows() {
    let ds = common::toy_dataset(30, 37, 1);
    let (train, test) = split_dataset(&ds, 0.8, 3).unwrap();
    assert_eq!((train.len(), test.len()), (29, 8));
    let mut small = ds.clone();
    small.observations.truncate(9);
    assert!(split_dataset(&small, 0.8, 3).is_err());
}
