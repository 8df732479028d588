//! Roster-level analyses: every five-player lineup a roster can field,
//! positional balance, single-position probes and the pace join.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ensemble::{predict_lineup, TunedEnsembleModel, NUM_VOTERS};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::{Label, Lineup, PlayerSeasonStats, LINEUP_SIZE};

/// Prior-season minutes a player needs before lineups containing them are predicted.
pub const MIN_PRIOR_MINUTES: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterPlayer {
    pub id: String,
    pub eligible: bool,
    /// Why an ineligible player was left out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub team: String,
    pub players: Vec<RosterPlayer>,
}

impl Roster {
    /// Eligibility from the prior season: the player must appear in `stats`
    /// with at least [`MIN_PRIOR_MINUTES`] minutes. Duplicate ids collapse.
    pub fn new<I, S>(team: &str, ids: I, stats: &BTreeMap<String, PlayerSeasonStats>) -> Roster
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        let players = ids
            .into_iter()
            .map(|id| {
                let reason = match stats.get(&id) {
                    None => Some("no_prior_season_stats"),
                    Some(s) if s.total_minutes < MIN_PRIOR_MINUTES => {
                        Some("below_min_player_minutes")
                    }
                    Some(_) => None,
                };
                RosterPlayer {
                    eligible: reason.is_none(),
                    reason: reason.map(ToString::to_string),
                    id,
                }
            })
            .collect();
        Roster {
            team: team.to_string(),
            players,
        }
    }

    pub fn eligible(&self) -> impl Iterator<Item = &str> {
        self.players
            .iter()
            .filter(|p| p.eligible)
            .map(|p| p.id.as_str())
    }

    pub fn ineligible(&self) -> impl Iterator<Item = &RosterPlayer> {
        self.players.iter().filter(|p| !p.eligible)
    }
}

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// All five-player subsets of the eligible players, in lexicographic order
/// of the sorted ids.
pub fn enumerate_lineups(roster: &Roster) -> Result<Vec<Lineup>> {
    let mut ids: Vec<&str> = roster.eligible().collect();
    ids.sort_unstable();
    let n = ids.len();
    if n < LINEUP_SIZE {
        return Err(Error::TooFewPlayers(n));
    }
    let mut out = Vec::with_capacity(binomial(n as u64, LINEUP_SIZE as u64) as usize);
    let mut idx: [usize; LINEUP_SIZE] = core::array::from_fn(|i| i);
    loop {
        out.push(Lineup::new(idx.iter().map(|&i| ids[i]))?);
        // Advance the rightmost index that still has room.
        let Some(pos) = (0..LINEUP_SIZE)
            .rev()
            .find(|&p| idx[p] < n - LINEUP_SIZE + p)
        else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..LINEUP_SIZE {
            idx[p] = idx[p - 1] + 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineupVerdict {
    pub lineup: Lineup,
    pub label: Label,
    pub votes: [Label; NUM_VOTERS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterPrediction {
    pub team: String,
    pub lineups: Vec<LineupVerdict>,
    pub elite_count: usize,
    /// Players left out for lack of prior-season history.
    pub skipped_players: Vec<RosterPlayer>,
    /// Lineups of the full roster that contain a skipped player.
    pub excluded_lineups: u64,
}

/// Predicts every lineup of eligible players. Features come from `stats`
/// (the season before the one being predicted) and are scaled with the
/// model's own training standardizer.
pub fn predict_roster(
    model: &TunedEnsembleModel,
    roster: &Roster,
    stats: &BTreeMap<String, PlayerSeasonStats>,
) -> Result<RosterPrediction> {
    let lineups = enumerate_lineups(roster)?;
    let mut out = Vec::with_capacity(lineups.len());
    for lineup in lineups {
        let p = predict_lineup(model, &lineup, stats)?;
        out.push(LineupVerdict {
            lineup,
            label: p.label,
            votes: p.votes,
        });
    }
    let total = roster.players.len() as u64;
    let eligible = roster.eligible().count() as u64;
    Ok(RosterPrediction {
        team: roster.team.clone(),
        elite_count: out.iter().filter(|v| v.label.is_elite()).count(),
        lineups: out,
        skipped_players: roster.ineligible().cloned().collect(),
        excluded_lineups: binomial(total, 5) - binomial(eligible, 5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Position {
    C,
    PF,
    PG,
    SG,
    SF,
}

impl Position {
    pub const ALL: [Position; 5] = [
        Position::C,
        Position::PF,
        Position::PG,
        Position::SG,
        Position::SF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::C => "C",
            Position::PF => "PF",
            Position::PG => "PG",
            Position::SG => "SG",
            Position::SF => "SF",
        }
    }
}

impl core::str::FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Position> {
        let t = s.trim();
        Position::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownPosition(t.to_string()))
    }
}

/// Parses `"PG"`, `"PG;SG"`, `"PG/SG"` or `"PG-SG"` into a set of classes; a
/// combination player belongs to every class it names.
pub fn parse_positions(s: &str) -> Result<BTreeSet<Position>> {
    let set = s
        .split([';', '/', '-', ','])
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<BTreeSet<Position>>>()?;
    if set.is_empty() {
        return Err(Error::UnknownPosition(s.to_string()));
    }
    Ok(set)
}

pub type PositionMap = BTreeMap<String, BTreeSet<Position>>;

/// Size of the union of the players' position classes.
pub fn distinct_positions(lineup: &Lineup, map: &PositionMap) -> Result<usize> {
    let mut union = BTreeSet::new();
    for p in lineup.players() {
        let classes = map.get(p).ok_or_else(|| Error::UnmappedPlayer(p.clone()))?;
        union.extend(classes.iter().copied());
    }
    Ok(union.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionBalance {
    /// `counts[i]` lineups with `i + 1` distinct positions.
    pub counts: [u64; 5],
    pub proportions: [f64; 5],
}

pub fn position_balance(lineups: &[Lineup], map: &PositionMap) -> Result<PositionBalance> {
    let mut counts = [0u64; 5];
    for l in lineups {
        counts[distinct_positions(l, map)? - 1] += 1;
    }
    let n = lineups.len() as f64;
    Ok(PositionBalance {
        counts,
        proportions: counts.map(|c| if n > 0.0 { c as f64 / n } else { 0.0 }),
    })
}

/// Players listed under each class; combination players appear in each of
/// their classes. Pools are sorted by id.
pub fn players_by_position(map: &PositionMap) -> BTreeMap<Position, Vec<String>> {
    let mut out: BTreeMap<Position, Vec<String>> = BTreeMap::new();
    for (id, classes) in map {
        for c in classes {
            out.entry(*c).or_default().push(id.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub samples: Vec<Lineup>,
    pub elite: usize,
}

/// Draws `samples` lineups of five distinct players uniformly from `pool`
/// and counts elite verdicts.
pub fn single_position_probe(
    model: &TunedEnsembleModel,
    pool: &[String],
    stats: &BTreeMap<String, PlayerSeasonStats>,
    samples: usize,
    seed: u64,
) -> Result<ProbeResult> {
    let mut pool: Vec<String> = pool
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pool.len() < LINEUP_SIZE {
        return Err(Error::TooFewPlayers(pool.len()));
    }
    let mut rng = seed::rng(seed, &[0x9E0B]);
    let mut drawn = Vec::with_capacity(samples);
    let mut elite = 0;
    for _ in 0..samples {
        let (five, _) = pool.partial_shuffle(&mut rng, LINEUP_SIZE);
        let lineup = Lineup::new(five.iter().cloned())?;
        if predict_lineup(model, &lineup, stats)?.label.is_elite() {
            elite += 1;
        }
        drawn.push(lineup);
    }
    Ok(ProbeResult {
        samples: drawn,
        elite,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaceRow {
    pub team: String,
    pub elite_count: usize,
    pub pace: f64,
}

/// Joins elite counts to team pace; no trend is fitted.
pub fn join_pace(counts: &[(String, usize)], pace: &BTreeMap<String, f64>) -> Result<Vec<PaceRow>> {
    counts
        .iter()
        .map(|(team, n)| {
            let p = pace
                .get(team)
                .ok_or_else(|| Error::MissingTeam(team.clone()))?;
            Ok(PaceRow {
                team: team.clone(),
                elite_count: *n,
                pace: *p,
            })
        })
        .collect()
}
