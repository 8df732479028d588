//! Read-only JSON service over one loaded model bundle.

use std::collections::BTreeMap;
use std::sync::Arc;

use anc_core::ensemble::predict_lineup;
use anc_core::features::lineup_order_statistics;
use anc_core::ingest::normalize_player_name;
use anc_core::rosterlab::{enumerate_lineups, Roster, MIN_PRIOR_MINUTES};
use anc_core::stats::{Label, Lineup, PlayerSeasonStats, LINEUP_SIZE, STAT_NAMES};
use anc_core::subclassifiers::Family;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::ModelBundle;

pub struct ServiceState {
    bundle: ModelBundle,
    players: BTreeMap<String, PlayerSeasonStats>,
}

pub fn router(bundle: ModelBundle) -> Router {
    let state = Arc::new(ServiceState {
        players: bundle.player_map(),
        bundle,
    });
    Router::new()
        .route("/health", get(health))
        .route("/model", get(model))
        .route("/players", get(players))
        .route("/predict", post(predict))
        .route("/roster", post(roster))
        .with_state(state)
}

pub async fn serve(bundle: ModelBundle, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(bundle)).await
}

struct ApiError(StatusCode, Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn unprocessable(message: String, player: Option<&str>) -> ApiError {
    let mut body = json!({ "error": message });
    if let Some(p) = player {
        body["player"] = json!(p);
    }
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, body)
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError(
        StatusCode::INTERNAL_SERVER_ERROR,
        json!({ "error": e.to_string() }),
    )
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn model(State(s): State<Arc<ServiceState>>) -> Json<Value> {
    let m = &s.bundle.model;
    Json(json!({
        "format": s.bundle.format,
        "version": s.bundle.version,
        "config": m.config,
        "num_votes": m.config.num_votes,
        "vote_order": Family::ALL,
        "feature_names": s.bundle.feature_names,
        "metadata": m.metadata,
    }))
}

#[derive(Serialize)]
struct PlayerSummary<'a> {
    id: &'a str,
    team: &'a str,
    minutes: f64,
    eligible: bool,
    pmm: f64,
    pts: f64,
}

async fn players(State(s): State<Arc<ServiceState>>) -> Json<Value> {
    let list: Vec<PlayerSummary> = s
        .players
        .values()
        .map(|p| PlayerSummary {
            id: &p.player_id,
            team: &p.team,
            minutes: p.total_minutes,
            eligible: p.total_minutes >= MIN_PRIOR_MINUTES,
            pmm: p.pmm(),
            pts: p.get("PTS").unwrap_or(0.0),
        })
        .collect();
    Json(json!({ "players": list }))
}

#[derive(Deserialize)]
struct PlayersBody {
    players: Vec<String>,
    #[serde(default)]
    team: Option<String>,
}

/// Canonical ids, rejecting anyone unknown or below the minutes rule.
fn resolve(s: &ServiceState, raw: &[String]) -> Result<Vec<String>, ApiError> {
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        let id = normalize_player_name(r).map_err(|e| unprocessable(e.to_string(), Some(r)))?;
        match s.players.get(&id) {
            None => return Err(unprocessable(format!("unknown player {r:?}"), Some(r))),
            Some(p) if p.total_minutes < MIN_PRIOR_MINUTES => {
                return Err(unprocessable(
                    format!(
                        "player {r:?} has {} minutes, below {MIN_PRIOR_MINUTES}",
                        p.total_minutes
                    ),
                    Some(r),
                ))
            }
            Some(_) => out.push(id),
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct OrderStat {
    stat: &'static str,
    values: [f64; LINEUP_SIZE],
}

async fn predict(
    State(s): State<Arc<ServiceState>>,
    Json(body): Json<PlayersBody>,
) -> Result<Json<Value>, ApiError> {
    if body.players.len() != LINEUP_SIZE {
        return Err(unprocessable(
            format!(
                "need exactly {LINEUP_SIZE} players, got {}",
                body.players.len()
            ),
            None,
        ));
    }
    let ids = resolve(&s, &body.players)?;
    let lineup = Lineup::new(ids).map_err(|e| unprocessable(e.to_string(), None))?;
    let p = predict_lineup(&s.bundle.model, &lineup, &s.players).map_err(internal)?;
    let raw = lineup_order_statistics(&lineup, &s.players).map_err(internal)?;
    let order_stats: Vec<OrderStat> = STAT_NAMES
        .iter()
        .zip(raw.chunks(LINEUP_SIZE))
        .map(|(stat, v)| OrderStat {
            stat,
            values: v.try_into().expect("five values per statistic"),
        })
        .collect();
    let votes: Vec<Value> = Family::ALL
        .iter()
        .zip(p.votes)
        .map(|(f, v)| json!({ "family": f, "label": v }))
        .collect();
    Ok(Json(json!({
        "lineup": lineup,
        "label": p.label,
        "votes": votes,
        "elite_votes": p.elite_votes(),
        "num_votes": s.bundle.model.config.num_votes,
        "order_stats": order_stats,
    })))
}

async fn roster(
    State(s): State<Arc<ServiceState>>,
    Json(body): Json<PlayersBody>,
) -> Result<Json<Value>, ApiError> {
    let mut ids = Vec::with_capacity(body.players.len());
    for r in &body.players {
        let id = normalize_player_name(r).map_err(|e| unprocessable(e.to_string(), Some(r)))?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    let team = body.team.unwrap_or_default();
    let roster = Roster::new(&team, ids, &s.players);
    let eligible = roster.eligible().count();
    if eligible < LINEUP_SIZE {
        return Err(unprocessable(
            format!("need at least {LINEUP_SIZE} eligible players, got {eligible}"),
            None,
        ));
    }
    let mut elite = Vec::new();
    let mut evaluated = 0;
    for lineup in enumerate_lineups(&roster).map_err(internal)? {
        let p = predict_lineup(&s.bundle.model, &lineup, &s.players).map_err(internal)?;
        evaluated += 1;
        if p.label == Label::Elite {
            elite.push(json!({ "lineup": lineup, "votes": p.votes }));
        }
    }
    Ok(Json(json!({
        "team": team,
        "evaluated": evaluated,
        "elite_count": elite.len(),
        "elite": elite,
        "skipped": roster.ineligible().collect::<Vec<_>>(),
    })))
}
