//! Command-line entry points. Each subcommand maps onto one pipeline step
//! and writes a run manifest next to its outputs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anc_core::ensemble::{fit_ensemble, EnsembleConfig, GridSpec};
use anc_core::features::FeatureMode;
use anc_core::ingest::{
    aggregate_lineup_observations, segment_stints, split_dataset, Dataset, FilterThresholds,
};
use anc_core::rosterlab::{
    join_pace, players_by_position, position_balance, predict_roster, single_position_probe, Roster,
};
use anc_core::stats::{Label, PlayerSeasonStats};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bundle::ModelBundle;
use crate::csvio;
use crate::error::{AncError, Result};
use crate::manifest::ManifestBuilder;
use crate::pipeline::{self, deviation};
use crate::synth::{generate_synthetic_season, SynthConfig};

pub const DATA_DIR_ENV: &str = "LINEUP_ANC_DATA_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "lineup-anc",
    version,
    about = "All-or-nothing lineup classifier"
)]
pub struct Cli {
    /// Default root for inputs and outputs.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = ".")]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic season (play-by-play, player stats, ground truth).
    Synth(SynthArgs),
    /// Build lineup observations, filter, split and export features.
    Ingest(IngestArgs),
    /// Cross-validate a parameter grid and write the tuning table and frontier.
    Tune(TuneArgs),
    /// Fit the ensemble for one configuration and write the model bundle.
    Train(TrainArgs),
    /// Score a held-out set or a later season.
    Evaluate(EvaluateArgs),
    /// Predict every five-player lineup of each roster.
    Predict(PredictArgs),
    /// Sample lineups drawn from a single position class.
    Probe(ProbeArgs),
    /// Serve a model over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub teams: usize,
    #[arg(long, default_value_t = 200)]
    pub games: usize,
    #[arg(long, default_value_t = 13)]
    pub roster_size: usize,
    #[arg(long, default_value_t = 12)]
    pub lineups_per_team: usize,
    /// Season number; later seasons reuse the players of season 0.
    #[arg(long, default_value_t = 0)]
    pub season: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Play-by-play CSV [default: <data-dir>/pbp.csv]
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Player statistics CSV [default: <data-dir>/players.csv]
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, default_value_t = 50.0)]
    pub min_player_minutes: f64,
    #[arg(long, default_value_t = 25.0)]
    pub min_lineup_minutes: f64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GridPreset {
    Paper,
    Mini,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Full140,
    FirstOrder28,
}

impl From<Mode> for FeatureMode {
    fn from(m: Mode) -> FeatureMode {
        match m {
            Mode::Full140 => FeatureMode::Full140,
            Mode::FirstOrder28 => FeatureMode::FirstOrder28,
        }
    }
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Training dataset JSON [default: <data-dir>/train.json]
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mini")]
    pub grid: GridPreset,
    #[arg(long, value_enum, default_value = "full140")]
    pub features: Mode,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// max-avg, floor:<min precision> or index:<frontier position>
    #[arg(long, default_value = "max-avg", value_parser = pipeline::parse_policy)]
    pub policy: anc_core::ensemble::SelectionPolicy,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Ensemble configuration JSON [default: <data-dir>/config.json]
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Model bundle path [default: <data-dir>/model.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Reference {
    None,
    Test,
    NextSeason,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Held-out dataset JSON [default: <data-dir>/test.json]
    #[arg(long, conflicts_with = "events")]
    pub test: Option<PathBuf>,
    /// Later-season play-by-play; features come from the model's training season.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Keep only lineups with at least this many minutes.
    #[arg(long)]
    pub min_lineup_minutes: Option<f64>,
    /// Published precision to report the deviation from.
    #[arg(long, value_enum, default_value = "none")]
    pub reference: Reference,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Roster CSV `team,player`
    #[arg(long)]
    pub roster: PathBuf,
    /// Prior-season statistics CSV [default: the bundle's training season]
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Position CSV `player,positions`
    #[arg(long)]
    pub positions: Option<PathBuf>,
    /// Pace CSV `team,pace`
    #[arg(long)]
    pub pace: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub positions: PathBuf,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
}

struct Ctx<'a> {
    data_dir: &'a Path,
}

impl Ctx<'_> {
    fn path(&self, given: &Option<PathBuf>, default: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.data_dir.join(default))
    }

    fn out_dir(&self, given: &Option<PathBuf>) -> Result<PathBuf> {
        let dir = given.clone().unwrap_or_else(|| self.data_dir.to_path_buf());
        std::fs::create_dir_all(&dir).map_err(|e| AncError::file(&dir, e))?;
        Ok(dir)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| AncError::file(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| AncError::file(path, e))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| AncError::file(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| AncError::file(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn stats_map(players: Vec<PlayerSeasonStats>) -> BTreeMap<String, PlayerSeasonStats> {
    players
        .into_iter()
        .map(|p| (p.player_id.clone(), p))
        .collect()
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        data_dir: &cli.data_dir,
    };
    match cli.command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Tune(a) => tune(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Predict(a) => predict(&ctx, a),
        Command::Probe(a) => probe(&ctx, a),
        Command::Serve(a) => serve(&ctx, a),
    }
}

fn synth(ctx: &Ctx, a: SynthArgs) -> Result<()> {
    let out = ctx.out_dir(&a.out)?;
    let mut m = ManifestBuilder::new("synth", Some(a.seed));
    let config = SynthConfig {
        teams: a.teams,
        games: a.games,
        roster_size: a.roster_size,
        lineups_per_team: a.lineups_per_team,
        seed: a.seed,
        season: a.season,
    };
    let season = generate_synthetic_season(&config)?;
    let (pbp, players, truth) = (
        out.join("pbp.csv"),
        out.join("players.csv"),
        out.join("truth.json"),
    );
    csvio::write_events(create(&pbp)?, &season.events)?;
    csvio::write_player_stats(create(&players)?, &season.players)?;
    write_json(&truth, &season.truth)?;
    for p in [&pbp, &players, &truth] {
        m.output(p);
    }
    m.finish(&out)?;
    let s = season.truth.signal;
    println!(
        "synth: {} games, {} events, {} players; {} lineups with 25+ minutes, prevalence {:.3}, planted rule precision {:.3}",
        season.truth.games.len(),
        season.truth.event_count,
        season.players.len(),
        s.lineups,
        s.prevalence,
        s.bayes_precision
    );
    Ok(())
}

fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let (events_path, stats_path) = (
        ctx.path(&a.events, "pbp.csv"),
        ctx.path(&a.stats, "players.csv"),
    );
    let out = ctx.out_dir(&a.out)?;
    let mut m = ManifestBuilder::new("ingest", Some(a.seed));
    m.input(&events_path)?;
    m.input(&stats_path)?;
    let events = csvio::read_events(open(&events_path)?)?;
    let stats = csvio::read_player_stats(open(&stats_path)?)?;
    let thresholds = FilterThresholds {
        min_player_minutes: a.min_player_minutes,
        min_lineup_minutes: a.min_lineup_minutes,
    };
    let ing = pipeline::ingest(&events, stats, thresholds)?;
    let (train, test) = split_dataset(&ing.dataset, a.train_fraction, a.seed)?;
    let features = anc_core::ensemble::dataset_features(&train, FeatureMode::Full140)?;
    let outputs = [
        ("dataset.json", &ing.dataset),
        ("train.json", &train),
        ("test.json", &test),
    ];
    for (name, ds) in outputs {
        let p = out.join(name);
        write_json(&p, ds)?;
        m.output(&p);
    }
    let discards = out.join("discards.json");
    write_json(&discards, &ing.discards)?;
    m.output(&discards);
    let features_path = out.join("features.csv");
    csvio::write_feature_matrix(create(&features_path)?, &features, FeatureMode::Full140)?;
    m.output(&features_path);
    m.finish(&out)?;
    println!(
        "ingest: {} events, {} stints, {} lineups observed, {} kept ({} train / {} test), {} discards",
        events.len(),
        ing.stints.len(),
        ing.observations.len(),
        ing.dataset.len(),
        train.len(),
        test.len(),
        ing.discards.len()
    );
    Ok(())
}

fn tune(ctx: &Ctx, a: TuneArgs) -> Result<()> {
    let train_path = ctx.path(&a.train, "train.json");
    let out = ctx.out_dir(&a.out)?;
    let mut m = ManifestBuilder::new("tune", Some(a.seed));
    m.input(&train_path)?;
    let train: Dataset = read_json(&train_path)?;
    let mut grid = match a.grid {
        GridPreset::Paper => GridSpec::paper(),
        GridPreset::Mini => GridSpec::mini(),
    };
    grid.feature_mode = a.features.into();
    let table = pipeline::tune_parallel(&train, &grid, a.folds, a.seed, None)?;
    let report = pipeline::frontier_report(&table, a.policy);
    let (tuning, frontier) = (out.join("tuning.csv"), out.join("frontier.json"));
    csvio::write_tuning_report(create(&tuning)?, &table)?;
    write_json(&frontier, &report)?;
    m.output(&tuning);
    m.output(&frontier);
    if let Some(sel) = &report.selection {
        let cfg = out.join("config.json");
        write_json(&cfg, &sel.config)?;
        m.output(&cfg);
    }
    m.finish(&out)?;
    println!(
        "tune: {} combinations, {} fits per fold, {} candidates, {} on the precision frontier",
        report.combinations,
        grid.fits_per_fold(),
        report.candidates,
        report.min_precision.len()
    );
    match (&report.selection, &report.selection_error) {
        (Some(s), _) => println!(
            "selected combination {}: avg precision {:.3}, min precision {:.3}, num_votes {}",
            s.record.index, s.record.avg_precision, s.record.min_precision, s.config.num_votes
        ),
        (None, Some(e)) => println!("no selection: {e}"),
        _ => {}
    }
    Ok(())
}

fn train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let train_path = ctx.path(&a.train, "train.json");
    let config_path = ctx.path(&a.config, "config.json");
    let model_path = ctx.path(&a.out, "model.json");
    let mut m = ManifestBuilder::new("train", Some(a.seed));
    m.input(&train_path)?;
    m.config(&config_path)?;
    let config: EnsembleConfig = read_json(&config_path)?;
    config.validate()?;
    println!("{}", serde_json::to_string_pretty(&config)?);
    let train: Dataset = read_json(&train_path)?;
    let model = fit_ensemble(&train, &config, a.seed)?;
    let bundle = ModelBundle::new(model, train.players.values().cloned());
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AncError::file(dir, e))?;
    }
    bundle.save(&model_path)?;
    m.output(&model_path);
    m.finish(
        model_path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new(".")),
    )?;
    println!(
        "train: fitted {} lineups, wrote {}",
        train.len(),
        model_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvaluationOutput {
    source: String,
    report: pipeline::EvaluationReport,
    reference: Option<pipeline::ReferenceDeviation>,
}

fn evaluate(ctx: &Ctx, a: EvaluateArgs) -> Result<()> {
    let model_path = ctx.path(&a.model, "model.json");
    let out = ctx.out_dir(&a.out)?;
    let mut m = ManifestBuilder::new("evaluate", None);
    m.input(&model_path)?;
    let bundle = ModelBundle::load(&model_path)?;
    let (source, observations, stats) = match &a.events {
        Some(ev) => {
            m.input(ev)?;
            let events = csvio::read_events(open(ev)?)?;
            let obs = aggregate_lineup_observations(&segment_stints(&events)?)?;
            // Later-season lineups need prior-season history.
            let prior: BTreeMap<_, _> = bundle
                .player_map()
                .into_iter()
                .filter(|(_, p)| p.total_minutes >= anc_core::rosterlab::MIN_PRIOR_MINUTES)
                .collect();
            (ev.display().to_string(), obs, prior)
        }
        None => {
            let test_path = ctx.path(&a.test, "test.json");
            m.input(&test_path)?;
            let test: Dataset = read_json(&test_path)?;
            (
                test_path.display().to_string(),
                test.observations,
                test.players,
            )
        }
    };
    let observations = match a.min_lineup_minutes {
        Some(min) => pipeline::restrict_minutes(&observations, min),
        None => observations,
    };
    let (report, scored) = pipeline::evaluate(&bundle.model, &observations, &stats)?;
    let reference = match a.reference {
        Reference::None => None,
        Reference::Test => Some(deviation(
            "test_precision",
            pipeline::REFERENCE_TEST_PRECISION,
            report.precision,
        )),
        Reference::NextSeason => Some(deviation(
            "next_season_precision",
            pipeline::REFERENCE_NEXT_SEASON_PRECISION,
            report.precision,
        )),
    };
    let cm = report.confusion;
    println!(
        "evaluate: {} lineups ({} skipped); tp {} fp {} fn {} tn {}; precision {}; accuracy {:.3}; prevalence {:.3}",
        report.lineups,
        report.skipped,
        cm.tp,
        cm.fp,
        cm.fn_,
        cm.tn,
        report.precision.map_or("undefined".into(), |p| format!("{p:.3}")),
        report.accuracy,
        report.prevalence
    );
    if let Some(r) = &reference {
        match r.deviation {
            Some(d) => println!("deviation from published {:.3}: {:+.3}", r.reference, d),
            None => println!(
                "deviation from published {:.3}: undefined (no elite predictions)",
                r.reference
            ),
        }
    }
    let (eval_path, box_path) = (out.join("evaluation.json"), out.join("boxplot.csv"));
    write_json(
        &eval_path,
        &EvaluationOutput {
            source,
            report,
            reference,
        },
    )?;
    csvio::write_boxplot(create(&box_path)?, &scored.observations, &scored.predicted)?;
    m.output(&eval_path);
    m.output(&box_path);
    m.finish(&out)?;
    Ok(())
}

fn prior_stats(
    bundle: &ModelBundle,
    stats: &Option<PathBuf>,
    m: &mut ManifestBuilder,
) -> Result<BTreeMap<String, PlayerSeasonStats>> {
    match stats {
        Some(p) => {
            m.input(p)?;
            Ok(stats_map(csvio::read_player_stats(open(p)?)?))
        }
        None => Ok(bundle.player_map()),
    }
}

#[derive(Serialize)]
struct TeamSummary {
    team: String,
    evaluated: usize,
    elite_count: usize,
    skipped_players: Vec<anc_core::rosterlab::RosterPlayer>,
    excluded_lineups: u64,
}

#[derive(Serialize)]
struct PredictSummary {
    evaluated: usize,
    elite: usize,
    teams: Vec<TeamSummary>,
    elite_position_balance: Option<anc_core::rosterlab::PositionBalance>,
    pace: Option<Vec<anc_core::rosterlab::PaceRow>>,
}

fn predict(ctx: &Ctx, a: PredictArgs) -> Result<()> {
    let model_path = ctx.path(&a.model, "model.json");
    let out = ctx.out_dir(&a.out)?;
    let mut m = ManifestBuilder::new("predict", None);
    m.input(&model_path)?;
    m.input(&a.roster)?;
    let bundle = ModelBundle::load(&model_path)?;
    let stats = prior_stats(&bundle, &a.stats, &mut m)?;
    let rosters = csvio::read_rosters(open(&a.roster)?)?;
    let mut predictions = Vec::new();
    for (team, ids) in &rosters {
        let roster = Roster::new(team, ids.iter().cloned(), &stats);
        let p = predict_roster(&bundle.model, &roster, &stats)?;
        println!(
            "{team}: evaluated {} lineups, {} elite, {} players skipped",
            p.lineups.len(),
            p.elite_count,
            p.skipped_players.len()
        );
        predictions.push(p);
    }
    let evaluated: usize = predictions.iter().map(|p| p.lineups.len()).sum();
    let elite: usize = predictions.iter().map(|p| p.elite_count).sum();
    println!("evaluated lineups: {evaluated}; elite: {elite}");

    let elite_position_balance = match &a.positions {
        Some(path) => {
            m.input(path)?;
            let map = csvio::read_positions(open(path)?)?;
            let lineups: Vec<_> = predictions
                .iter()
                .flat_map(|p| {
                    p.lineups
                        .iter()
                        .filter(|v| v.label == Label::Elite)
                        .map(|v| v.lineup.clone())
                })
                .collect();
            if lineups.is_empty() {
                None
            } else {
                Some(position_balance(&lineups, &map)?)
            }
        }
        None => None,
    };
    let pace = match &a.pace {
        Some(path) => {
            m.input(path)?;
            let table = csvio::read_pace(open(path)?)?;
            let counts: Vec<(String, usize)> = predictions
                .iter()
                .map(|p| (p.team.clone(), p.elite_count))
                .collect();
            Some(join_pace(&counts, &table)?)
        }
        None => None,
    };
    let summary = PredictSummary {
        evaluated,
        elite,
        teams: predictions
            .iter()
            .map(|p| TeamSummary {
                team: p.team.clone(),
                evaluated: p.lineups.len(),
                elite_count: p.elite_count,
                skipped_players: p.skipped_players.clone(),
                excluded_lineups: p.excluded_lineups,
            })
            .collect(),
        elite_position_balance,
        pace,
    };
    let (pred_path, sum_path) = (
        out.join("predictions.csv"),
        out.join("predict-summary.json"),
    );
    csvio::write_predictions(create(&pred_path)?, &predictions)?;
    write_json(&sum_path, &summary)?;
    m.output(&pred_path);
    m.output(&sum_path);
    m.finish(&out)?;
    Ok(())
}

#[derive(Serialize)]
struct ProbeRow {
    position: String,
    pool: usize,
    samples: usize,
    elite: Option<usize>,
    error: Option<String>,
}

fn probe(ctx: &Ctx, a: ProbeArgs) -> Result<()> {
    let model_path = ctx.path(&a.model, "model.json");
    let out = ctx.out_dir(&a.out)?;
    let mut m = ManifestBuilder::new("probe", Some(a.seed));
    m.input(&model_path)?;
    m.input(&a.positions)?;
    let bundle = ModelBundle::load(&model_path)?;
    let stats = prior_stats(&bundle, &a.stats, &mut m)?;
    let map = csvio::read_positions(open(&a.positions)?)?;
    let mut rows = Vec::new();
    for (pos, pool) in players_by_position(&map) {
        // Only players with statistics can be scored.
        let pool: Vec<String> = pool.into_iter().filter(|p| stats.contains_key(p)).collect();
        let r = single_position_probe(&bundle.model, &pool, &stats, a.samples, a.seed);
        let row = ProbeRow {
            position: pos.as_str().into(),
            pool: pool.len(),
            samples: a.samples,
            elite: r.as_ref().ok().map(|r| r.elite),
            error: r.err().map(|e| e.to_string()),
        };
        match (&row.elite, &row.error) {
            (Some(e), _) => println!(
                "{}: {} of {} sampled lineups elite",
                row.position, e, a.samples
            ),
            (None, Some(err)) => println!("{}: {}", row.position, err),
            _ => {}
        }
        rows.push(row);
    }
    let path = out.join("probe.json");
    write_json(&path, &rows)?;
    m.output(&path);
    m.finish(&out)?;
    Ok(())
}

fn serve(ctx: &Ctx, a: ServeArgs) -> Result<()> {
    let model_path = ctx.path(&a.model, "model.json");
    let bundle = ModelBundle::load(&model_path)?;
    let mut m = ManifestBuilder::new("serve", None);
    m.input(&model_path)?;
    m.finish(
        model_path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new(".")),
    )?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(crate::service::serve(bundle, &a.bind))?;
    Ok(())
}
