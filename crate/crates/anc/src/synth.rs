//! Synthetic seasons with a planted signal.
//!
//! Every player has a latent quality `q ~ N(0, 1)`. A lineup's strength is
//! `0.5 min(q) + 0.3 median(q) + 0.2 max(q)` plus a fixed per-lineup noise
//! term, so the signal is a monotone function of the order statistics of q.
//! Each possession scores with probability `sigmoid(BASE + KAPPA * (s_off -
//! s_def))`. Player statistics are noisy functions of q, except PMM which is
//! the player's realized on-court differential per minute.
//!
//! The generator keeps its own books (stints, lineup totals, game lengths),
//! which are the ground truth ingestion is checked against.

use std::collections::BTreeMap;

use anc_core::ingest::{PlayEvent, Stint};
use anc_core::seed;
use anc_core::stats::{Lineup, PlayerSeasonStats, NUM_STATS, PMM_INDEX, STAT_NAMES};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AncError, Result};

pub const GAME_SECONDS: u32 = 2880;
const BASE: f64 = -0.2;
const KAPPA: f64 = 0.3;
const THREE_SHARE: f64 = 0.3;
const LINEUP_NOISE_SD: f64 = 0.25;
/// Lineup minutes needed for a lineup to count in the planted-signal summary.
const SUMMARY_MIN_MINUTES: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub teams: usize,
    /// Games in the whole season; each involves two teams.
    pub games: usize,
    pub roster_size: usize,
    /// Distinct five-player units a team rotates through.
    pub lineups_per_team: usize,
    pub seed: u64,
    /// Later seasons keep the players, qualities and rotations of season 0
    /// and replay new games.
    #[serde(default)]
    pub season: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            teams: 10,
            games: 200,
            roster_size: 13,
            lineups_per_team: 12,
            seed: 1,
            season: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AncError::Invalid(m));
        if self.teams < 2 {
            return bad(format!("need at least 2 teams, got {}", self.teams));
        }
        if self.games == 0 {
            return bad("games must be positive".into());
        }
        if self.roster_size < 5 {
            return bad(format!("roster size {} is below 5", self.roster_size));
        }
        let possible = anc_core::rosterlab::binomial(self.roster_size as u64, 5);
        if self.lineups_per_team < 2 || self.lineups_per_team as u64 > possible {
            return bad(format!(
                "lineups per team must lie in 2..={possible}, got {}",
                self.lineups_per_team
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTruth {
    pub game_id: String,
    pub home: String,
    pub away: String,
    pub length_seconds: f64,
    pub home_score: u32,
    pub away_score: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineupTruth {
    pub lineup: Lineup,
    pub team: String,
    pub minutes: f64,
    pub point_diff: f64,
    pub pmm: f64,
    /// Expected differential per minute given the opponents actually faced.
    pub expected_pmm: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerTruth {
    pub id: String,
    pub team: String,
    pub quality: f64,
    pub minutes: f64,
}

/// How well the noise-free rule `expected_pmm > 0` recovers realized labels
/// over lineups with at least 25 minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedSignal {
    pub lineups: usize,
    pub prevalence: f64,
    pub bayes_precision: f64,
    pub bayes_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: SynthConfig,
    pub event_count: usize,
    pub games: Vec<GameTruth>,
    pub stints: Vec<Stint>,
    pub lineups: Vec<LineupTruth>,
    pub players: Vec<PlayerTruth>,
    pub signal: PlantedSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeason {
    pub events: Vec<PlayEvent>,
    pub players: Vec<PlayerSeasonStats>,
    pub truth: GroundTruth,
}

struct Team {
    name: String,
    players: Vec<usize>,
    pool: Vec<Unit>,
}

#[derive(Clone)]
struct Unit {
    lineup: Lineup,
    members: [usize; 5],
    strength: f64,
}

#[derive(Default, Clone, Copy)]
struct Book {
    seconds: u64,
    diff: i64,
    expected: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn score_probability(offense: f64, defense: f64) -> f64 {
    sigmoid(BASE + KAPPA * (offense - defense))
}

fn expected_points(offense: f64, defense: f64) -> f64 {
    score_probability(offense, defense) * (2.0 + THREE_SHARE)
}

fn strength(q: &[f64; 5]) -> f64 {
    let mut s = *q;
    s.sort_by(f64::total_cmp);
    0.5 * s[0] + 0.3 * s[2] + 0.2 * s[4]
}

pub fn team_name(t: usize) -> String {
    format!("t{:02}", t + 1)
}

pub fn player_name(t: usize, p: usize) -> String {
    format!("t{:02} p{:02}", t + 1, p + 1)
}

pub fn generate_synthetic_season(config: &SynthConfig) -> Result<SyntheticSeason> {
    config.validate()?;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut rng = seed::rng(config.seed, &[0x5E1]);
    let mut names = Vec::new();
    let mut quality = Vec::new();
    let mut teams = Vec::new();
    for t in 0..config.teams {
        let mut players = Vec::new();
        for p in 0..config.roster_size {
            players.push(names.len());
            names.push(player_name(t, p));
            quality.push(normal.sample(&mut rng));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut pool = Vec::new();
        while pool.len() < config.lineups_per_team {
            let mut members: [usize; 5] = [0; 5];
            for (slot, &id) in members.iter_mut().zip(players.choose_multiple(&mut rng, 5)) {
                *slot = id;
            }
            members.sort_unstable();
            if !seen.insert(members) {
                continue;
            }
            let q = members.map(|i| quality[i]);
            pool.push(Unit {
                lineup: Lineup::new(members.iter().map(|&i| names[i].clone()))
                    .expect("distinct players"),
                members,
                strength: strength(&q) + LINEUP_NOISE_SD * normal.sample(&mut rng),
            });
        }
        teams.push(Team {
            name: team_name(t),
            players,
            pool,
        });
    }

    let mut events = Vec::new();
    let mut stints = Vec::new();
    let mut games = Vec::new();
    let mut books: BTreeMap<(usize, usize), Book> = BTreeMap::new();
    let mut player_secs = vec![0u64; names.len()];
    let mut player_diff = vec![0i64; names.len()];
    for g in 0..config.games {
        let home = g % config.teams;
        let away = (home + 1 + (g / config.teams) % (config.teams - 1)) % config.teams;
        let mut grng = seed::rng(config.seed, &[0x6A3E, config.season, g as u64]);
        let game_id = format!("g{:04}", g + 1);
        let game = simulate_game(&game_id, [&teams[home], &teams[away]], &mut grng);
        for s in &game.segments {
            for (side, team) in [(0usize, home), (1, away)] {
                let unit = &teams[team].pool[s.units[side]];
                let sign = if side == 0 { 1 } else { -1 };
                let b = books.entry((team, s.units[side])).or_default();
                b.seconds += s.seconds as u64;
                b.diff += sign * s.home_diff;
                b.expected += sign as f64 * s.expected_home_diff;
                for &p in &unit.members {
                    player_secs[p] += s.seconds as u64;
                    player_diff[p] += sign * s.home_diff;
                }
            }
        }
        stints.extend(game.stints);
        games.push(GameTruth {
            game_id,
            home: teams[home].name.clone(),
            away: teams[away].name.clone(),
            length_seconds: GAME_SECONDS as f64,
            home_score: game.score[0],
            away_score: game.score[1],
        });
        events.extend(game.events);
    }

    let mut lineups: Vec<LineupTruth> = books
        .iter()
        .map(|(&(team, unit), b)| {
            let minutes = b.seconds as f64 / 60.0;
            let u = &teams[team].pool[unit];
            LineupTruth {
                lineup: u.lineup.clone(),
                team: teams[team].name.clone(),
                minutes,
                point_diff: b.diff as f64,
                pmm: b.diff as f64 / minutes,
                expected_pmm: b.expected / minutes,
                strength: u.strength,
            }
        })
        .collect();
    lineups.sort_by(|a, b| a.lineup.cmp(&b.lineup));

    let mut srng = seed::rng(config.seed, &[0x57A7, config.season]);
    let mut stats = Vec::with_capacity(names.len());
    let mut players = Vec::with_capacity(names.len());
    for team in &teams {
        for &p in &team.players {
            let minutes = player_secs[p] as f64 / 60.0;
            let pmm = if player_secs[p] > 0 {
                player_diff[p] as f64 / minutes
            } else {
                0.0
            };
            stats.push(PlayerSeasonStats {
                player_id: names[p].clone(),
                team: team.name.clone(),
                total_minutes: minutes,
                stats: player_stats(quality[p], pmm, &mut srng),
            });
            players.push(PlayerTruth {
                id: names[p].clone(),
                team: team.name.clone(),
                quality: quality[p],
                minutes,
            });
        }
    }

    let signal = planted_signal(&lineups);
    Ok(SyntheticSeason {
        truth: GroundTruth {
            config: *config,
            event_count: events.len(),
            games,
            stints,
            lineups,
            players,
            signal,
        },
        events,
        players: stats,
    })
}

fn planted_signal(lineups: &[LineupTruth]) -> PlantedSignal {
    let kept: Vec<&LineupTruth> = lineups
        .iter()
        .filter(|l| l.minutes >= SUMMARY_MIN_MINUTES)
        .collect();
    let elite = kept.iter().filter(|l| l.pmm > 0.0).count();
    let called: Vec<&&LineupTruth> = kept.iter().filter(|l| l.expected_pmm > 0.0).collect();
    let hits = called.iter().filter(|l| l.pmm > 0.0).count();
    let prevalence = if kept.is_empty() {
        0.0
    } else {
        elite as f64 / kept.len() as f64
    };
    let bayes_precision = if called.is_empty() {
        0.0
    } else {
        hits as f64 / called.len() as f64
    };
    PlantedSignal {
        lineups: kept.len(),
        prevalence,
        bayes_precision,
        bayes_gap: bayes_precision - prevalence,
    }
}

/// Per-minute statistics as noisy functions of quality. Counting stats are
/// log-normal around a base rate; PMM is the realized value passed in.
fn player_stats(q: f64, pmm: f64, rng: &mut ChaCha8Rng) -> [f64; NUM_STATS] {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut noise = || normal.sample(rng);
    let rate = |base: f64, load: f64, z: f64| base * (0.25 * load * q + 0.2 * z).exp();
    let mut s = [0.0; NUM_STATS];
    let fga = rate(0.38, 0.3, noise());
    let fg3a = rate(0.12, 0.3, noise());
    let fta = rate(0.1, 0.5, noise());
    let fg_pct = (0.45 + 0.03 * q + 0.02 * noise()).clamp(0.05, 0.95);
    let fg3_pct = (0.35 + 0.03 * q + 0.03 * noise()).clamp(0.0, 0.9);
    let ft_pct = (0.76 + 0.04 * q + 0.05 * noise()).clamp(0.2, 1.0);
    s[0] = fga * fg_pct;
    s[1] = fga;
    s[2] = fg_pct;
    s[3] = fg3a * fg3_pct;
    s[4] = fg3a;
    s[5] = fg3_pct;
    s[6] = fta * ft_pct;
    s[7] = fta;
    s[8] = ft_pct;
    let loads: [(usize, f64, f64); 17] = [
        (9, 0.05, 0.4),
        (10, 0.15, 0.4),
        (11, 0.09, 0.6),
        (12, 0.06, -0.5),
        (13, 0.03, 0.6),
        (14, 0.02, 0.5),
        (15, 0.02, -0.4),
        (16, 0.08, -0.4),
        (18, 0.07, 0.5),
        (20, 0.17, 0.5),
        (21, 0.1, 0.5),
        (22, 0.07, 0.5),
        (23, 0.005, 0.4),
        (24, 0.05, 0.7),
        (25, 0.02, 0.5),
        (26, 0.03, 0.4),
        (27, 0.02, 0.5),
    ];
    for (i, base, load) in loads {
        s[i] = rate(base, load, noise());
    }
    s[17] = 2.0 * (s[0] - s[3]) + 3.0 * s[3] + s[6];
    s[PMM_INDEX] = pmm;
    debug_assert_eq!(STAT_NAMES[PMM_INDEX], "PMM");
    s
}

struct Segment {
    units: [usize; 2],
    seconds: u32,
    home_diff: i64,
    expected_home_diff: f64,
}

struct GameOutput {
    events: Vec<PlayEvent>,
    stints: Vec<Stint>,
    segments: Vec<Segment>,
    score: [u32; 2],
}

fn next_change(t: u32, rng: &mut ChaCha8Rng) -> u32 {
    t + rng.random_range(150..=420)
}

fn pick_other(pool_len: usize, current: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut next = rng.random_range(0..pool_len - 1);
    if next >= current {
        next += 1;
    }
    next
}

fn simulate_game(game_id: &str, teams: [&Team; 2], rng: &mut ChaCha8Rng) -> GameOutput {
    let mut units = [
        rng.random_range(0..teams[0].pool.len()),
        rng.random_range(0..teams[1].pool.len()),
    ];
    let mut change_at = [next_change(0, rng), next_change(0, rng)];
    let mut out = GameOutput {
        events: Vec::new(),
        stints: Vec::new(),
        segments: Vec::new(),
        score: [0, 0],
    };
    let lineup = |side: usize, units: &[usize; 2]| teams[side].pool[units[side]].lineup.clone();
    let row = |t: u32, units: &[usize; 2], pts: [u32; 2]| PlayEvent {
        game_id: game_id.to_string(),
        elapsed_seconds: t as f64,
        home: lineup(0, units),
        away: lineup(1, units),
        home_points: pts[0],
        away_points: pts[1],
    };
    let mut t = 0u32;
    let mut start = 0u32;
    let mut diff = 0i64;
    let mut expected = 0.0;
    let mut offense = rng.random_range(0..2usize);
    out.events.push(row(0, &units, [0, 0]));
    loop {
        let dur = rng.random_range(12..=20);
        let end_of_game = t + dur > GAME_SECONDS;
        let change = !end_of_game
            && t + dur < GAME_SECONDS
            && (t + dur >= change_at[0] || t + dur >= change_at[1]);
        if !end_of_game {
            t += dur;
            let s = [
                teams[0].pool[units[0]].strength,
                teams[1].pool[units[1]].strength,
            ];
            let p = score_probability(s[offense], s[1 - offense]);
            let sign = if offense == 0 { 1.0 } else { -1.0 };
            expected += sign * expected_points(s[offense], s[1 - offense]);
            if rng.random::<f64>() < p {
                let pts = if rng.random::<f64>() < THREE_SHARE {
                    3
                } else {
                    2
                };
                let mut delta = [0, 0];
                delta[offense] = pts;
                out.score[offense] += pts;
                diff += if offense == 0 {
                    pts as i64
                } else {
                    -(pts as i64)
                };
                out.events.push(row(t, &units, delta));
            }
            offense = 1 - offense;
        }
        if change || end_of_game {
            let stop = if end_of_game { GAME_SECONDS } else { t };
            out.stints.push(Stint {
                game_id: game_id.to_string(),
                lineup_home: lineup(0, &units),
                lineup_away: lineup(1, &units),
                start_seconds: start as f64,
                end_seconds: stop as f64,
                home_point_diff: diff,
            });
            out.segments.push(Segment {
                units,
                seconds: stop - start,
                home_diff: diff,
                expected_home_diff: expected,
            });
            if end_of_game {
                out.events.push(row(GAME_SECONDS, &units, [0, 0]));
                break;
            }
            for side in 0..2 {
                if t >= change_at[side] {
                    units[side] = pick_other(teams[side].pool.len(), units[side], rng);
                    change_at[side] = next_change(t, rng);
                }
            }
            out.events.push(row(t, &units, [0, 0]));
            start = t;
            diff = 0;
            expected = 0.0;
        }
    }
    out
}

impl SyntheticSeason {
    /// The season's player table as a lookup keyed by id.
    pub fn player_map(&self) -> BTreeMap<String, PlayerSeasonStats> {
        self.players
            .iter()
            .map(|p| (p.player_id.clone(), p.clone()))
            .collect()
    }
}
