use std::path::Path;
use std::process::{Command, Output};

use anc::manifest::{sha256_hex, RunManifest};
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_lineup-anc"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap();
    out
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn manifest(dir: &Path, command: &str) -> RunManifest {
    serde_json::from_str(
        &std::fs::read_to_string(dir.join(format!("manifest-{command}.json"))).unwrap(),
    )
    .unwrap()
}

#[test]
fn full_pipeline_through_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--seed", "3", "--games", "120"]);
    for f in ["pbp.csv", "players.csv", "truth.json"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let m = manifest(d, "synth");
    assert_eq!(m.seed, Some(3));
    assert_eq!(m.outputs.len(), 3);

    ok(d, &["ingest"]);
    let m = manifest(d, "ingest");
    let pbp = std::fs::read(d.join("pbp.csv")).unwrap();
    assert_eq!(m.inputs[0].sha256, sha256_hex(&pbp));
    let features = std::fs::read_to_string(d.join("features.csv")).unwrap();
    assert_eq!(features.lines().next().unwrap().split(',').count(), 143);

    let tune = ok(d, &["tune", "--folds", "5"]);
    assert!(tune.contains("112"), "{tune}");
    let report = std::fs::read_to_string(d.join("tuning.csv")).unwrap();
    assert_eq!(report.lines().count(), 113);

    // train echoes the configuration it read.
    let train = ok(d, &["train"]);
    let config: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("config.json")).unwrap()).unwrap();
    let echoed_end = train.find("\n}\n").expect("pretty JSON echo") + 2;
    let echoed: Value = serde_json::from_str(&train[..echoed_end]).unwrap();
    assert_eq!(echoed, config);
    assert_eq!(
        manifest(d, "train").config_path,
        Some(d.join("config.json"))
    );

    let eval = ok(d, &["evaluate", "--reference", "test"]);
    assert!(eval.contains("deviation from published 0.867"), "{eval}");
    let e: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("evaluation.json")).unwrap()).unwrap();
    assert!(e.is_object());

    // Fifteen eligible players give every one of the C(15, 5) lineups.
    let players = std::fs::read_to_string(d.join("players.csv")).unwrap();
    let eligible: Vec<&str> = players
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap() >= 50.0)
        .map(|l| l.split(',').next().unwrap())
        .take(15)
        .collect();
    assert_eq!(eligible.len(), 15);
    let roster: String = std::iter::once("team,player".to_string())
        .chain(eligible.iter().map(|p| format!("mix,{p}")))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(d.join("roster.csv"), roster).unwrap();
    let predict = ok(
        d,
        &[
            "predict",
            "--roster",
            d.join("roster.csv").to_str().unwrap(),
        ],
    );
    assert!(predict.contains("evaluated lineups: 3003;"), "{predict}");
    let rows = std::fs::read_to_string(d.join("predictions.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3004);
    assert_eq!(manifest(d, "predict").command, "predict");
}

#[test]
fn same_seed_gives_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        ok(d, &["synth", "--seed", "5", "--games", "40"]);
    }
    for f in ["pbp.csv", "players.csv", "truth.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = run(d, &["evaluate", "--model", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    std::fs::write(d.join("pbp.csv"), "game_id,elapsed_seconds\n").unwrap();
    std::fs::write(d.join("players.csv"), "player\n").unwrap();
    let out = run(d, &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing column"));

    assert_eq!(run(d, &["tune", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(d, &["tune", "--policy", "best"]).status.code(), Some(2));
}
