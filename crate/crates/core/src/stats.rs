//! Player statistics, lineups and labels.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-minute player statistics, in predictor order.
pub const STAT_NAMES: [&str; NUM_STATS] = [
    "FGM",
    "FGA",
    "FGPCT",
    "FG3M",
    "FG3A",
    "FG3PCT",
    "FTM",
    "FTA",
    "FTPCT",
    "OREB",
    "DREB",
    "AST",
    "TOV",
    "STL",
    "BLK",
    "BLKA",
    "PF",
    "PTS",
    "PFD",
    "PMM",
    "CONTESTEDSHOTS",
    "CONTESTEDSHOTS2PT",
    "CONTESTEDSHOTS3PT",
    "CHARGESDRAWN",
    "DEFLECTIONS",
    "LOOSEBALLSRECOVERED",
    "SCREENASSISTS",
    "BOXOUTS",
];

pub const NUM_STATS: usize = 28;
pub const LINEUP_SIZE: usize = 5;
pub const NUM_FEATURES: usize = NUM_STATS * LINEUP_SIZE;

/// Percentage statistics and the (made, attempted) statistics they derive from.
pub const PERCENTAGES: [(usize, usize, usize); 3] = [(2, 0, 1), (5, 3, 4), (8, 6, 7)];

pub const PMM_INDEX: usize = 19;

pub fn stat_index(name: &str) -> Option<usize> {
    STAT_NAMES.iter().position(|s| *s == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NotElite,
    Elite,
}

impl Label {
    /// Elite requires a strictly positive plus-minus per minute.
    pub fn from_pmm(pmm: f64) -> Label {
        if pmm > 0.0 {
            Label::Elite
        } else {
            Label::NotElite
        }
    }

    pub fn from_bool(elite: bool) -> Label {
        if elite {
            Label::Elite
        } else {
            Label::NotElite
        }
    }

    pub fn is_elite(self) -> bool {
        self == Label::Elite
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Elite => "elite",
            Label::NotElite => "not_elite",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s {
            "elite" => Ok(Label::Elite),
            "not_elite" => Ok(Label::NotElite),
            other => Err(Error::InvalidParameter(alloc::format!(
                "unknown label {other:?}"
            ))),
        }
    }
}

/// Five distinct canonical player ids, kept sorted so equal lineups compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Lineup([String; LINEUP_SIZE]);

impl Lineup {
    pub fn new<I, S>(ids: I) -> Result<Lineup>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        if ids.len() != LINEUP_SIZE {
            return Err(Error::InvalidLineup(alloc::format!(
                "expected 5 players, got {}",
                ids.len()
            )));
        }
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidLineup(alloc::format!(
                "duplicate player {}",
                w[0]
            )));
        }
        if let Some(empty) = ids.iter().find(|id| id.is_empty()) {
            return Err(Error::InvalidLineup(alloc::format!(
                "empty player id {empty:?}"
            )));
        }
        let arr: [String; LINEUP_SIZE] = ids.try_into().expect("length checked");
        Ok(Lineup(arr))
    }

    pub fn players(&self) -> &[String; LINEUP_SIZE] {
        &self.0
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.iter().any(|p| p == id)
    }
}

impl TryFrom<Vec<String>> for Lineup {
    type Error = Error;

    fn try_from(ids: Vec<String>) -> Result<Lineup> {
        Lineup::new(ids)
    }
}

impl From<Lineup> for Vec<String> {
    fn from(l: Lineup) -> Vec<String> {
        l.0.into()
    }
}

impl fmt::Display for Lineup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(p)?;
        }
        Ok(())
    }
}

impl FromStr for Lineup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Lineup> {
        Lineup::new(s.split('|').map(|p| p.trim().to_string()))
    }
}

/// One player's season: total minutes plus the 28 per-minute statistics in
/// [`STAT_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSeasonStats {
    pub player_id: String,
    pub team: String,
    pub total_minutes: f64,
    pub stats: [f64; NUM_STATS],
}

impl PlayerSeasonStats {
    pub fn get(&self, name: &str) -> Option<f64> {
        stat_index(name).map(|i| self.stats[i])
    }

    /// Individual plus-minus per minute.
    pub fn pmm(&self) -> f64 {
        self.stats[PMM_INDEX]
    }

    /// Checks that percentage statistics lie in [0, 1] and every value is finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.total_minutes >= 0.0) || !self.total_minutes.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{}: total minutes {} must be non-negative",
                self.player_id,
                self.total_minutes
            )));
        }
        for (name, v) in STAT_NAMES.iter().zip(self.stats.iter()) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{}: {name} is not finite",
                    self.player_id
                )));
            }
        }
        for (pct, _, _) in PERCENTAGES {
            let v = self.stats[pct];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{}: {} = {v} outside [0, 1]",
                    self.player_id,
                    STAT_NAMES[pct]
                )));
            }
        }
        Ok(())
    }
}
