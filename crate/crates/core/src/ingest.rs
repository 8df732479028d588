//! Stints, lineup plus-minus observations, name normalization, filtering and
//! the train/test split.
//!
//! Parsing files is done by the `lineup-anc` crate; everything here works on
//! already-parsed values.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::stats::{Label, Lineup, PlayerSeasonStats};

/// One row of play-by-play: the ten players on court at `elapsed_seconds`
/// and the points each side scored at that moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayEvent {
    pub game_id: String,
    pub elapsed_seconds: f64,
    pub home: Lineup,
    pub away: Lineup,
    pub home_points: u32,
    pub away_points: u32,
}

/// A maximal game interval with a fixed set of ten players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stint {
    pub game_id: String,
    pub lineup_home: Lineup,
    pub lineup_away: Lineup,
    pub start_seconds: f64,
    pub end_seconds: f64,
    /// Home points minus away points scored during the stint.
    pub home_point_diff: i64,
}

impl Stint {
    pub fn duration_seconds(&self) -> f64 {
        self.end_seconds - self.start_seconds
    }

    pub fn duration_minutes(&self) -> f64 {
        self.duration_seconds() / 60.0
    }

    pub fn away_point_diff(&self) -> i64 {
        -self.home_point_diff
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineupObservation {
    pub lineup: Lineup,
    pub minutes: f64,
    pub point_diff: f64,
    pub pmm: f64,
    pub label: Label,
}

impl LineupObservation {
    pub fn new(lineup: Lineup, minutes: f64, point_diff: f64) -> Result<LineupObservation> {
        if !(minutes > 0.0) || !minutes.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "lineup {lineup}: minutes {minutes} must be positive"
            )));
        }
        let pmm = point_diff / minutes;
        Ok(LineupObservation {
            lineup,
            minutes,
            point_diff,
            pmm,
            label: Label::from_pmm(pmm),
        })
    }
}

/// Merges consecutive events with the same ten players into stints.
///
/// A stint runs from its first event to the first event of the next stint
/// (or to its own last event when it closes the game), so per game the stint
/// durations partition the span between the first and last event.
/// Zero-length stints are dropped.
pub fn segment_stints(events: &[PlayEvent]) -> Result<Vec<Stint>> {
    let mut out = Vec::new();
    let mut finished_games: BTreeSet<&str> = BTreeSet::new();
    let mut i = 0;
    while i < events.len() {
        let game = events[i].game_id.as_str();
        if !finished_games.insert(game) {
            return Err(Error::UngroupedGame(game.to_string()));
        }
        let mut j = i;
        while j < events.len() && events[j].game_id == game {
            j += 1;
        }
        segment_game(&events[i..j], &mut out)?;
        i = j;
    }
    Ok(out)
}

fn segment_game(events: &[PlayEvent], out: &mut Vec<Stint>) -> Result<()> {
    for w in events.windows(2) {
        if w[1].elapsed_seconds < w[0].elapsed_seconds {
            return Err(Error::NegativeTimeSpan {
                game_id: w[1].game_id.clone(),
                at_seconds: w[1].elapsed_seconds,
            });
        }
    }
    let mut start = 0;
    while start < events.len() {
        let first = &events[start];
        let mut end = start;
        let mut diff = 0i64;
        while end < events.len() && events[end].home == first.home && events[end].away == first.away
        {
            diff += i64::from(events[end].home_points) - i64::from(events[end].away_points);
            end += 1;
        }
        let end_seconds = match events.get(end) {
            Some(next) => next.elapsed_seconds,
            None => events[end - 1].elapsed_seconds,
        };
        if end_seconds > first.elapsed_seconds {
            out.push(Stint {
                game_id: first.game_id.clone(),
                lineup_home: first.home.clone(),
                lineup_away: first.away.clone(),
                start_seconds: first.elapsed_seconds,
                end_seconds,
                home_point_diff: diff,
            });
        }
        start = end;
    }
    Ok(())
}

/// Accumulates minutes and signed point differential per distinct lineup.
/// Both sides of every stint contribute; the away side's differential is
/// negated. Output is sorted by lineup.
pub fn aggregate_lineup_observations(stints: &[Stint]) -> Result<Vec<LineupObservation>> {
    let mut acc: BTreeMap<&Lineup, (f64, i64)> = BTreeMap::new();
    for s in stints {
        let secs = s.duration_seconds();
        let home = acc.entry(&s.lineup_home).or_insert((0.0, 0));
        home.0 += secs;
        home.1 += s.home_point_diff;
        let away = acc.entry(&s.lineup_away).or_insert((0.0, 0));
        away.0 += secs;
        away.1 += s.away_point_diff();
    }
    acc.into_iter()
        .map(|(lineup, (secs, diff))| {
            LineupObservation::new(lineup.clone(), secs / 60.0, diff as f64)
        })
        .collect()
}

const NAME_SUFFIXES: [&str; 5] = ["jr", "sr", "ii", "iii", "iv"];

/// Canonical player name: lower-cased, punctuation removed, trailing
/// generational suffixes dropped, whitespace collapsed.
pub fn normalize_player_name(raw: &str) -> Result<String> {
    let lowered = raw.to_lowercase();
    let cleaned: String = lowered
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    let mut tokens: Vec<&str> = cleaned.split_whitespace().collect();
    while tokens.len() > 1 && tokens.last().is_some_and(|t| NAME_SUFFIXES.contains(t)) {
        tokens.pop();
    }
    if tokens.len() == 1 && NAME_SUFFIXES.contains(&tokens[0]) {
        tokens.clear();
    }
    if tokens.is_empty() {
        return Err(Error::EmptyName(raw.to_string()));
    }
    Ok(tokens.join(" "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardKind {
    Player,
    Lineup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardEntry {
    pub kind: DiscardKind,
    pub id: String,
    pub reason: String,
}

pub type DiscardReport = Vec<DiscardEntry>;

pub mod reasons {
    pub const BELOW_MIN_MINUTES: &str = "below_min_player_minutes";
    pub const UNMATCHED: &str = "unmatched";
    pub const DUPLICATE: &str = "duplicate";
    pub const FILTERED_PLAYER: &str = "contains_filtered_player";
    pub const BELOW_MIN_LINEUP_MINUTES: &str = "below_min_lineup_minutes";
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterThresholds {
    pub min_player_minutes: f64,
    pub min_lineup_minutes: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        FilterThresholds {
            min_player_minutes: 50.0,
            min_lineup_minutes: 25.0,
        }
    }
}

/// Lineup observations together with the statistics of every player in them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub observations: Vec<LineupObservation>,
    pub players: BTreeMap<String, PlayerSeasonStats>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn prevalence(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let elite = self
            .observations
            .iter()
            .filter(|o| o.label.is_elite())
            .count();
        elite as f64 / self.len() as f64
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            observations: idx.iter().map(|&i| self.observations[i].clone()).collect(),
            players: self.players.clone(),
        }
    }
}

/// Drops players below the minutes threshold, players present in only one of
/// the two sources, and every lineup that contains one of them; then drops
/// lineups below the lineup-minutes threshold.
///
/// "Fewer than" is strict: a player with exactly `min_player_minutes` stays,
/// as does a lineup with exactly `min_lineup_minutes`.
pub fn filter_merge(
    stats: Vec<PlayerSeasonStats>,
    observations: Vec<LineupObservation>,
    thresholds: FilterThresholds,
) -> Result<(Dataset, DiscardReport)> {
    let mut report = DiscardReport::new();
    let mut players: BTreeMap<String, PlayerSeasonStats> = BTreeMap::new();
    for s in stats {
        match players.get(&s.player_id) {
            Some(prev) if prev.total_minutes >= s.total_minutes => {
                report.push(player_discard(&s.player_id, reasons::DUPLICATE));
            }
            _ => {
                if players.contains_key(&s.player_id) {
                    report.push(player_discard(&s.player_id, reasons::DUPLICATE));
                }
                players.insert(s.player_id.clone(), s);
            }
        }
    }

    let in_lineups: BTreeSet<&str> = observations
        .iter()
        .flat_map(|o| o.lineup.players().iter().map(String::as_str))
        .collect();
    let mut removed: BTreeSet<String> = BTreeSet::new();
    players.retain(|id, s| {
        if !in_lineups.contains(id.as_str()) {
            report.push(player_discard(id, reasons::UNMATCHED));
            removed.insert(id.clone());
            false
        } else if s.total_minutes < thresholds.min_player_minutes {
            report.push(player_discard(id, reasons::BELOW_MIN_MINUTES));
            removed.insert(id.clone());
            false
        } else {
            true
        }
    });
    let mut unmatched_reported: BTreeSet<&str> = BTreeSet::new();
    for id in &in_lineups {
        if !players.contains_key(*id) && !removed.contains(*id) && unmatched_reported.insert(id) {
            report.push(player_discard(id, reasons::UNMATCHED));
        }
    }

    let mut kept = Vec::new();
    for obs in observations {
        let missing = obs
            .lineup
            .players()
            .iter()
            .find(|p| !players.contains_key(*p));
        let reason = match missing {
            Some(p) if removed.contains(p) => Some(reasons::FILTERED_PLAYER),
            Some(_) => Some(reasons::UNMATCHED),
            None if obs.minutes < thresholds.min_lineup_minutes => {
                Some(reasons::BELOW_MIN_LINEUP_MINUTES)
            }
            None => None,
        };
        match reason {
            Some(r) => report.push(DiscardEntry {
                kind: DiscardKind::Lineup,
                id: obs.lineup.to_string(),
                reason: r.to_string(),
            }),
            None => kept.push(obs),
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let used: BTreeSet<&String> = kept
        .iter()
        .flat_map(|o| o.lineup.players().iter())
        .collect();
    let players = players
        .iter()
        .filter(|(id, _)| used.contains(id))
        .map(|(id, s)| (id.clone(), s.clone()))
        .collect();
    Ok((
        Dataset {
            observations: kept,
            players,
        },
        report,
    ))
}

fn player_discard(id: &str, reason: &str) -> DiscardEntry {
    DiscardEntry {
        kind: DiscardKind::Player,
        id: id.to_string(),
        reason: reason.to_string(),
    }
}

/// Seeded uniform split without replacement. The training part gets
/// `floor(n * train_fraction)` observations; both parts keep dataset order.
pub fn split_dataset(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let n = dataset.len();
    if n < 10 {
        return Err(Error::TooFewObservations {
            needed: 10,
            found: n,
        });
    }
    let n_train = libm::floor(n as f64 * train_fraction) as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(seed, &[0x5911]));
    let (train, test) = idx.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(train), dataset.subset(test)))
}
