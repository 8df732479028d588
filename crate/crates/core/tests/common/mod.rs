use std::collections::BTreeMap;

use anc_core::ingest::{filter_merge, Dataset, FilterThresholds, LineupObservation};
use anc_core::stats::{Lineup, PlayerSeasonStats, NUM_STATS, PERCENTAGES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Players with a latent quality that drives both their statistics and the
/// point differential of the lineups they appear in.
pub fn toy_dataset(players: usize, lineups: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quality: Vec<f64> = (0..players)
        .map(|_| rng.random::<f64>() * 2.0 - 1.0)
        .collect();
    let stats: Vec<PlayerSeasonStats> = (0..players)
        .map(|i| {
            let mut s = [0.0; NUM_STATS];
            for v in s.iter_mut() {
                *v = 5.0 + 2.0 * quality[i] + rng.random::<f64>();
            }
            for (pct, made, att) in PERCENTAGES {
                s[made] = s[att] * 0.4;
                s[pct] = 0.4 + 0.05 * quality[i];
            }
            PlayerSeasonStats {
                player_id: format!("p{i:03}"),
                team: "toy".into(),
                total_minutes: 400.0,
                stats: s,
            }
        })
        .collect();
    let mut seen = BTreeMap::new();
    while seen.len() < lineups {
        let mut idx: Vec<usize> = (0..players).collect();
        for i in 0..5 {
            let j = rng.random_range(i..players);
            idx.swap(i, j);
        }
        let five = &idx[..5];
        let lineup = Lineup::new(five.iter().map(|i| format!("p{i:03}"))).unwrap();
        let strength: f64 = five.iter().map(|&i| quality[i]).sum();
        let diff = (10.0 * strength + 6.0 * (rng.random::<f64>() - 0.5)).round();
        seen.insert(lineup, diff);
    }
    let obs = seen
        .into_iter()
        .map(|(l, d)| LineupObservation::new(l, 40.0, d).unwrap())
        .collect();
    filter_merge(stats, obs, FilterThresholds::default())
        .unwrap()
        .0
}
