//! CSV readers and writers for play-by-play, player statistics, rosters,
//! positions, pace and the exported tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use anc_core::ensemble::{TuningTable, NUM_VOTERS};
use anc_core::features::{FeatureMode, FeatureVector};
use anc_core::ingest::{normalize_player_name, LineupObservation, PlayEvent};
use anc_core::rosterlab::{parse_positions, PositionMap, RosterPrediction};
use anc_core::stats::{Label, Lineup, PlayerSeasonStats, NUM_STATS, PERCENTAGES, STAT_NAMES};
use anc_core::subclassifiers::Family;

use crate::error::{AncError, Result};

pub const EVENT_COLUMNS: [&str; 14] = [
    "game_id",
    "elapsed_seconds",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "a1",
    "a2",
    "a3",
    "a4",
    "a5",
    "home_pts",
    "away_pts",
];

struct Header {
    index: BTreeMap<String, usize>,
}

impl Header {
    fn new(rec: &csv::StringRecord) -> Header {
        Header {
            index: rec
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_string(), i))
                .collect(),
        }
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| AncError::MissingColumn(name.to_string()))
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn row_error(rec: &csv::StringRecord, message: impl Into<String>) -> AncError {
    AncError::Row {
        line: line_of(rec),
        message: message.into(),
    }
}

fn cell(rec: &csv::StringRecord, idx: usize) -> &str {
    rec.get(idx).unwrap_or("").trim()
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn side(
    rec: &csv::StringRecord,
    cols: &[usize],
    game: &str,
    t: f64,
    name: &'static str,
) -> Result<Lineup> {
    let mut ids = Vec::with_capacity(5);
    for &c in cols {
        let raw = cell(rec, c);
        if raw.is_empty() {
            return Err(row_error(rec, format!("{name} side needs 5 players")));
        }
        let id = normalize_player_name(raw).map_err(|e| row_error(rec, e.to_string()))?;
        if ids.contains(&id) {
            return Err(AncError::DuplicatePlayer {
                game_id: game.to_string(),
                elapsed_seconds: t,
                side: name,
                player: id,
            });
        }
        ids.push(id);
    }
    Lineup::new(ids).map_err(|e| row_error(rec, e.to_string()))
}

/// Play-by-play rows in file order.
pub fn read_events<R: Read>(r: R) -> Result<Vec<PlayEvent>> {
    let mut rdr = reader(r);
    let header = Header::new(rdr.headers()?);
    let cols: Vec<usize> = EVENT_COLUMNS
        .iter()
        .map(|c| header.require(c))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < header.index.len() {
            return Err(row_error(
                &rec,
                format!(
                    "expected {} fields, found {}",
                    header.index.len(),
                    rec.len()
                ),
            ));
        }
        let game = cell(&rec, cols[0]).to_string();
        if game.is_empty() {
            return Err(row_error(&rec, "empty game_id"));
        }
        let t: f64 = cell(&rec, cols[1])
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite() && *t >= 0.0)
            .ok_or_else(|| {
                row_error(
                    &rec,
                    format!("bad elapsed_seconds {:?}", cell(&rec, cols[1])),
                )
            })?;
        let home = side(&rec, &cols[2..7], &game, t, "home")?;
        let away = side(&rec, &cols[7..12], &game, t, "away")?;
        let pts = |c: usize, what: &str| -> Result<u32> {
            cell(&rec, c)
                .parse()
                .map_err(|_| row_error(&rec, format!("bad {what} {:?}", cell(&rec, c))))
        };
        out.push(PlayEvent {
            home_points: pts(cols[12], "home_pts")?,
            away_points: pts(cols[13], "away_pts")?,
            game_id: game,
            elapsed_seconds: t,
            home,
            away,
        });
    }
    Ok(out)
}

pub fn write_events<W: Write>(w: W, events: &[PlayEvent]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(EVENT_COLUMNS)?;
    for e in events {
        let mut rec = vec![e.game_id.clone(), fmt_f64(e.elapsed_seconds)];
        rec.extend(e.home.players().iter().cloned());
        rec.extend(e.away.players().iter().cloned());
        rec.push(e.home_points.to_string());
        rec.push(e.away_points.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

fn number(rec: &csv::StringRecord, idx: usize, column: &str) -> Result<f64> {
    let raw = cell(rec, idx);
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| AncError::NotNumeric {
            row: line_of(rec),
            column: column.to_string(),
            value: raw.to_string(),
        })
}

/// Player statistics: `player,team,minutes` plus the 28 statistic columns.
/// A percentage whose attempts are zero is set to 0 whatever the file says.
pub fn read_player_stats<R: Read>(r: R) -> Result<Vec<PlayerSeasonStats>> {
    let mut rdr = reader(r);
    let header = Header::new(rdr.headers()?);
    let player = header.require("player")?;
    let team = header.require("team")?;
    let minutes = header.require("minutes")?;
    let stat_cols: Vec<usize> = STAT_NAMES
        .iter()
        .map(|s| header.require(s))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = normalize_player_name(cell(&rec, player))
            .map_err(|e| row_error(&rec, e.to_string()))?;
        let mut stats = [0.0; NUM_STATS];
        let zero_attempts: Vec<usize> = PERCENTAGES
            .iter()
            .filter(|(_, _, att)| {
                cell(&rec, stat_cols[*att])
                    .parse::<f64>()
                    .is_ok_and(|v| v == 0.0)
            })
            .map(|(pct, _, _)| *pct)
            .collect();
        for (s, &c) in stat_cols.iter().enumerate() {
            stats[s] = if zero_attempts.contains(&s) {
                0.0
            } else {
                number(&rec, c, STAT_NAMES[s])?
            };
        }
        let p = PlayerSeasonStats {
            player_id: id,
            team: cell(&rec, team).to_string(),
            total_minutes: number(&rec, minutes, "minutes")?,
            stats,
        };
        p.validate().map_err(|e| row_error(&rec, e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_player_stats<W: Write>(w: W, players: &[PlayerSeasonStats]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["player", "team", "minutes"];
    head.extend(STAT_NAMES);
    wtr.write_record(&head)?;
    for p in players {
        let mut rec = vec![
            p.player_id.clone(),
            p.team.clone(),
            fmt_f64(p.total_minutes),
        ];
        rec.extend(p.stats.iter().map(|v| fmt_f64(*v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `team,player` rows grouped by team; players are normalized.
pub fn read_rosters<R: Read>(r: R) -> Result<BTreeMap<String, Vec<String>>> {
    let mut rdr = reader(r);
    let header = Header::new(rdr.headers()?);
    let (team, player) = (header.require("team")?, header.require("player")?);
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = normalize_player_name(cell(&rec, player))
            .map_err(|e| row_error(&rec, e.to_string()))?;
        out.entry(cell(&rec, team).to_string())
            .or_default()
            .push(id);
    }
    Ok(out)
}

/// `player,positions` with class codes separated by `;`, `/` or `-`.
pub fn read_positions<R: Read>(r: R) -> Result<PositionMap> {
    let mut rdr = reader(r);
    let header = Header::new(rdr.headers()?);
    let (player, positions) = (header.require("player")?, header.require("positions")?);
    let mut out = PositionMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = normalize_player_name(cell(&rec, player))
            .map_err(|e| row_error(&rec, e.to_string()))?;
        let set =
            parse_positions(cell(&rec, positions)).map_err(|e| row_error(&rec, e.to_string()))?;
        out.entry(id).or_default().extend(set);
    }
    Ok(out)
}

pub fn read_pace<R: Read>(r: R) -> Result<BTreeMap<String, f64>> {
    let mut rdr = reader(r);
    let header = Header::new(rdr.headers()?);
    let (team, pace) = (header.require("team")?, header.require("pace")?);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.insert(cell(&rec, team).to_string(), number(&rec, pace, "pace")?);
    }
    Ok(out)
}

/// Shortest representation that round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Named feature columns plus `weight`, `label`, `lineup`.
pub fn write_feature_matrix<W: Write>(
    w: W,
    vectors: &[FeatureVector],
    mode: FeatureMode,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = mode.feature_names();
    head.extend(["weight", "label", "lineup"].map(String::from));
    wtr.write_record(&head)?;
    for v in vectors {
        let mut rec: Vec<String> = v.values.iter().map(|x| fmt_f64(*x)).collect();
        rec.push(fmt_f64(v.weight));
        rec.push(v.label.as_str().to_string());
        rec.push(v.lineup.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

fn opt(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        "NA".into()
    }
}

/// One row per combination: parameters, fold aggregates and flags.
pub fn write_tuning_report<W: Write>(w: W, table: &TuningTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "index",
        "tree_cp",
        "tree_loss",
        "forest_cutoff",
        "forest_ntree",
        "boost_mfinal",
        "boost_maxdepth",
        "boost_cp",
        "svm_cost",
        "svm_gamma",
        "knn_k",
        "logit_thresh",
        "num_votes",
        "avg_precision",
        "min_precision",
        "sd_precision",
        "avg_accuracy",
        "has_na",
        "fit_failed",
    ])?;
    for r in &table.records {
        let c = table.config(r.index);
        wtr.write_record([
            r.index.to_string(),
            fmt_f64(c.tree.cp),
            fmt_f64(c.tree.loss_fp),
            fmt_f64(c.forest.cutoff),
            c.forest.ntree.to_string(),
            c.boost.mfinal.to_string(),
            c.boost.maxdepth.to_string(),
            fmt_f64(c.boost.cp),
            fmt_f64(c.svm.cost),
            fmt_f64(c.svm.gamma),
            c.knn.k.to_string(),
            fmt_f64(c.logit.thresh),
            c.num_votes.to_string(),
            opt(r.avg_precision),
            opt(r.min_precision),
            opt(r.sd_precision),
            opt(r.avg_accuracy),
            r.has_na.to_string(),
            r.fit_failed.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `(lineup, predicted_label, pmm, minutes)` rows for group box plots.
pub fn write_boxplot<W: Write>(
    w: W,
    observations: &[LineupObservation],
    predicted: &[Label],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["lineup", "predicted_label", "pmm", "minutes"])?;
    for (o, p) in observations.iter().zip(predicted) {
        wtr.write_record([
            o.lineup.to_string(),
            p.as_str().into(),
            fmt_f64(o.pmm),
            fmt_f64(o.minutes),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `(team, lineup, label, vote_tree, …, vote_lda)` rows.
pub fn write_predictions<W: Write>(w: W, predictions: &[RosterPrediction]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["team".to_string(), "lineup".into(), "label".into()];
    head.extend(Family::ALL.iter().map(|f| format!("vote_{f}")));
    wtr.write_record(&head)?;
    for p in predictions {
        for v in &p.lineups {
            let mut rec = vec![
                p.team.clone(),
                v.lineup.to_string(),
                v.label.as_str().to_string(),
            ];
            rec.extend(
                v.votes
                    .iter()
                    .take(NUM_VOTERS)
                    .map(|l| l.as_str().to_string()),
            );
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
