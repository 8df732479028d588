//! Order-statistic predictors and standardization.
//!
//! For every statistic the five players' values are sorted ascending; the
//! feature vector is laid out statistic-major, so column `5 * s + i` holds
//! the `(i + 1)`-th smallest value of statistic `s`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::LineupObservation;
use crate::stats::{
    Label, Lineup, PlayerSeasonStats, LINEUP_SIZE, NUM_FEATURES, NUM_STATS, STAT_NAMES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// Lineup minutes.
    pub weight: f64,
    pub label: Label,
    pub lineup: Lineup,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[default]
    Full140,
    /// Only the minimum of each statistic.
    FirstOrder28,
}

impl FeatureMode {
    pub fn dimension(self) -> usize {
        match self {
            FeatureMode::Full140 => NUM_FEATURES,
            FeatureMode::FirstOrder28 => NUM_STATS,
        }
    }

    /// Column names, e.g. `FGM_1` … `BOXOUTS_5`.
    pub fn feature_names(self) -> Vec<String> {
        match self {
            FeatureMode::Full140 => STAT_NAMES
                .iter()
                .flat_map(|s| (1..=LINEUP_SIZE).map(move |i| format!("{s}_{i}")))
                .collect(),
            FeatureMode::FirstOrder28 => STAT_NAMES.iter().map(|s| format!("{s}_1")).collect(),
        }
    }

    fn restrict(self, values: &[f64]) -> Vec<f64> {
        match self {
            FeatureMode::Full140 => values.to_vec(),
            FeatureMode::FirstOrder28 => values.iter().step_by(LINEUP_SIZE).copied().collect(),
        }
    }
}

/// The 140 raw order statistics of a lineup.
pub fn lineup_order_statistics(
    lineup: &Lineup,
    stats: &BTreeMap<String, PlayerSeasonStats>,
) -> Result<Vec<f64>> {
    let mut players = [&[0.0; NUM_STATS]; LINEUP_SIZE];
    for (slot, id) in players.iter_mut().zip(lineup.players()) {
        *slot = &stats
            .get(id)
            .ok_or_else(|| Error::MissingPlayer(id.clone()))?
            .stats;
    }
    let mut values = Vec::with_capacity(NUM_FEATURES);
    for s in 0..NUM_STATS {
        let mut column = players.map(|p| p[s]);
        column.sort_by(f64::total_cmp);
        values.extend_from_slice(&column);
    }
    Ok(values)
}

pub fn order_statistics(
    obs: &LineupObservation,
    stats: &BTreeMap<String, PlayerSeasonStats>,
) -> Result<FeatureVector> {
    Ok(FeatureVector {
        values: lineup_order_statistics(&obs.lineup, stats)?,
        weight: obs.minutes,
        label: obs.label,
        lineup: obs.lineup.clone(),
    })
}

pub fn restrict_features(vectors: &[FeatureVector], mode: FeatureMode) -> Vec<FeatureVector> {
    vectors
        .iter()
        .map(|v| FeatureVector {
            values: mode.restrict(&v.values),
            ..v.clone()
        })
        .collect()
}

pub fn restrict_values(values: &[f64], mode: FeatureMode) -> Result<Vec<f64>> {
    if values.len() != NUM_FEATURES {
        return Err(Error::DimensionMismatch {
            expected: NUM_FEATURES,
            found: values.len(),
        });
    }
    Ok(mode.restrict(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    /// Sample standard deviations; zero for constant columns.
    pub sds: Vec<f64>,
}

/// Unweighted column means and sample standard deviations.
pub fn fit_standardizer<'a, I>(rows: I) -> Result<StandardizationParams>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let rows: Vec<&[f64]> = rows.into_iter().collect();
    if rows.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            found: rows.len(),
        });
    }
    let d = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    let n = rows.len() as f64;
    let mut means = alloc::vec![0.0; d];
    for r in &rows {
        for (m, v) in means.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut ss = alloc::vec![0.0; d];
    for r in &rows {
        for ((s, v), m) in ss.iter_mut().zip(r.iter()).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    // Columns that are constant up to rounding get an exact zero.
    let sds = ss
        .iter()
        .zip(&means)
        .map(|(s, m)| {
            let sd = libm::sqrt(s / (n - 1.0));
            if sd <= 1e-12 * libm::fabs(*m) {
                0.0
            } else {
                sd
            }
        })
        .collect();
    Ok(StandardizationParams { means, sds })
}

pub fn fit_standardizer_vectors(vectors: &[FeatureVector]) -> Result<StandardizationParams> {
    fit_standardizer(vectors.iter().map(|v| v.values.as_slice()))
}

impl StandardizationParams {
    pub fn dimension(&self) -> usize {
        self.means.len()
    }

    pub fn apply_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, sd))| (v - m) / if *sd > 0.0 { *sd } else { 1.0 })
            .collect())
    }

    pub fn apply(&self, vectors: &[FeatureVector]) -> Result<Vec<FeatureVector>> {
        vectors
            .iter()
            .map(|v| {
                Ok(FeatureVector {
                    values: self.apply_values(&v.values)?,
                    ..v.clone()
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn players_with(
        stat: usize,
        values: [f64; 5],
        ids: [&str; 5],
    ) -> BTreeMap<String, PlayerSeasonStats> {
        ids.iter()
            .zip(values)
            .map(|(id, v)| {
                let mut stats = [0.0; NUM_STATS];
                stats[stat] = v;
                (
                    id.to_string(),
                    PlayerSeasonStats {
                        player_id: id.to_string(),
                        team: "T".into(),
                        total_minutes: 1000.0,
                        stats,
                    },
                )
            })
            .collect()
    }

    // Table-3 style example: per-minute field goals and blocks of two real lineups.
    fn example_lineups() -> [(Lineup, BTreeMap<String, PlayerSeasonStats>); 2] {
        let blk = crate::stats::stat_index("BLK").unwrap();
        let mk = |ids: [&str; 5], fgm: [f64; 5], dbm: [f64; 5]| {
            let mut map = players_with(0, fgm, ids);
            for (id, v) in ids.iter().zip(dbm) {
                map.get_mut(*id).unwrap().stats[blk] = v;
            }
            (Lineup::new(ids).unwrap(), map)
        };
        [
            mk(
                ["brown", "irving", "morris", "rozier", "tatum"],
                [0.17, 0.28, 0.18, 0.15, 0.16],
                [0.01, 0.01, 0.01, 0.01, 0.02],
            ),
            mk(
                ["harden", "paul", "gordon", "hilario", "capela"],
                [0.26, 0.20, 0.19, 0.18, 0.22],
                [0.02, 0.01, 0.01, 0.02, 0.07],
            ),
        ]
    }

    #[test]
    fn example_order_statistics() {
        let blk = crate::stats::stat_index("BLK").unwrap() * 5;
        let [(l1, s1), (l2, s2)] = example_lineups();
        let v1 = lineup_order_statistics(&l1, &s1).unwrap();
        let v2 = lineup_order_statistics(&l2, &s2).unwrap();
        assert_eq!(&v1[0..5], &[0.15, 0.16, 0.17, 0.18, 0.28]);
        assert_eq!(&v1[blk..blk + 5], &[0.01, 0.01, 0.01, 0.01, 0.02]);
        assert_eq!(&v2[0..5], &[0.18, 0.19, 0.20, 0.22, 0.26]);
        assert_eq!(&v2[blk..blk + 5], &[0.01, 0.01, 0.02, 0.02, 0.07]);

        let fv = FeatureVector {
            values: v1,
            weight: 1.0,
            label: Label::Elite,
            lineup: l1,
        };
        let first = restrict_features(&[fv], FeatureMode::FirstOrder28);
        assert_eq!(first[0].values.len(), 28);
        assert_eq!(first[0].values[0], 0.15);
        assert_eq!(first[0].values[blk / 5], 0.01);
    }

    #[test]
    fn missing_player_is_named() {
        let [(l1, mut s1), _] = example_lineups();
        s1.remove("tatum");
        assert_eq!(
            lineup_order_statistics(&l1, &s1),
            Err(Error::MissingPlayer("tatum".into()))
        );
    }

    #[test]
    fn identical_players_give_flat_order_statistics() {
        let ids = ["a", "b", "c", "d", "e"];
        let map = players_with(3, [0.4; 5], ids);
        let v = lineup_order_statistics(&Lineup::new(ids).unwrap(), &map).unwrap();
        for s in 0..NUM_STATS {
            assert!(v[5 * s..5 * s + 5].iter().all(|x| *x == v[5 * s]));
        }
    }

    #[test]
    fn feature_names_layout() {
        let names = FeatureMode::Full140.feature_names();
        assert_eq!(names.len(), 140);
        assert_eq!(names[0], "FGM_1");
        assert_eq!(names[4], "FGM_5");
        assert_eq!(names[139], "BOXOUTS_5");
        assert_eq!(FeatureMode::FirstOrder28.feature_names()[27], "BOXOUTS_1");
    }

    #[test]
    fn standardizer_two_points() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0]];
        let p = fit_standardizer(rows.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(p.means, vec![2.0, 5.0]);
        assert!((p.sds[0] - libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(p.sds[1], 0.0);
        let z = p.apply_values(&[3.0, 5.0]).unwrap();
        assert!((z[0] - 1.0 / libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(z[1], 0.0);
    }

    #[test]
    fn apply_arithmetic_and_dimension_check() {
        let p = StandardizationParams {
            means: vec![0.1],
            sds: vec![0.05],
        };
        assert!((p.apply_values(&[0.15]).unwrap()[0] - 1.0).abs() < 1e-12);
        assert!(p.apply_values(&[0.1, 0.2]).is_err());
        assert!(fit_standardizer([[1.0].as_slice()]).is_err());
    }

    #[test]
    fn standardized_training_matrix_has_zero_mean_unit_sd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                (0..140)
                    .map(|j| {
                        if j == 7 {
                            2.5
                        } else {
                            rng.random_range(-3.0..3.0) * (j + 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let p = fit_standardizer(rows.iter().map(Vec::as_slice)).unwrap();
        let z: Vec<Vec<f64>> = rows.iter().map(|r| p.apply_values(r).unwrap()).collect();
        for j in 0..140 {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / 100.0;
            let sd =
                libm::sqrt(z.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / 99.0);
            assert!(mean.abs() < 1e-9, "col {j} mean {mean}");
            if j == 7 {
                assert_eq!(sd, 0.0);
            } else {
                assert!((sd - 1.0).abs() < 1e-9, "col {j} sd {sd}");
            }
        }
    }

    #[test]
    fn held_out_rows_are_not_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut draw = |n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..10).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect()
        };
        let train = draw(40);
        let held = draw(10);
        let p = fit_standardizer(train.iter().map(Vec::as_slice)).unwrap();
        let z: Vec<Vec<f64>> = held.iter().map(|r| p.apply_values(r).unwrap()).collect();
        let off_center = (0..10).any(|j| (z.iter().map(|r| r[j]).sum::<f64>() / 10.0).abs() > 1e-6);
        assert!(off_center);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn order_statistics_sorted_and_permutation_invariant(
            values in proptest::collection::vec(proptest::array::uniform28(-5.0f64..5.0), 5),
            perm in Just([0usize, 1, 2, 3, 4]).prop_shuffle(),
        ) {
            let ids = ["p0", "p1", "p2", "p3", "p4"];
            let stats: BTreeMap<String, PlayerSeasonStats> = ids.iter().zip(&values).map(|(id, v)| {
                (id.to_string(), PlayerSeasonStats { player_id: id.to_string(), team: "T".into(), total_minutes: 100.0, stats: *v })
            }).collect();
            let l1 = Lineup::new(ids).unwrap();
            let l2 = Lineup::new(perm.iter().map(|&i| ids[i])).unwrap();
            let v1 = lineup_order_statistics(&l1, &stats).unwrap();
            let v2 = lineup_order_statistics(&l2, &stats).unwrap();
            prop_assert_eq!(&v1, &v2);
            for s in 0..NUM_STATS {
                for i in 0..4 {
                    prop_assert!(v1[5 * s + i] <= v1[5 * s + i + 1]);
                }
                let min = values.iter().map(|v| v[s]).fold(f64::INFINITY, f64::min);
                prop_assert_eq!(v1[5 * s], min);
            }
        }
    }
}
