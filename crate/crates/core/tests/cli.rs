// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn radar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radar"))
        .args(args)
        .env_remove("RADAR_CONFIG")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(&o));
    o
}

/// Synthetic train split, its feature table, and a model trained on it.
struct Trained {
    dir: TempDir,
}

impl Trained {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let traces = dir.path().join("traces");
        ok(radar(&[
            "-q",
            "synth",
            "--out",
            s(&traces),
            "--split",
            "train",
            "--seed",
            "1",
        ]));
        let csv = dir.path().join("train.csv");
        ok(radar(&["-q", "features", "--traces", s(&traces), "--out", s(&csv)]));
        let model = dir.path().join("m.radar-model.json");
        ok(radar(&[
            "-q",
            "train",
            "--features",
            s(&csv),
            "--out",
            s(&model),
            "--seed",
            "1",
        ]));
        Trained { dir }
    }

    fn csv(&self) -> PathBuf {
        self.dir.path().join("train.csv")
    }

    fn model(&self) -> PathBuf {
        self.dir.path().join("m.radar-model.json")
    }
}

fn predict(model: &Path, trace: &Path) -> serde_json::Value {
    let o = ok(radar(&["predict", "--model", s(model), "--trace", s(trace)]));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn features_from_fixture_traces() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("in");
    fs::create_dir(&traces).unwrap();
    for name in [
        "handmade-two-layer.radar.json",
        "recall-archetype.radar.json",
        "reasoning-archetype.radar.json.gz",
    ] {
        fs::copy(fixtures().join(name), traces.join(name)).unwrap();
    }
    fs::write(traces.join("notes.txt"), "ignored").unwrap();
    let out = dir.path().join("f.csv");
    ok(radar(&["features", "--traces", s(&traces), "--out", s(&out)]));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 40);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let mut ids: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    let sorted = {
        let mut v = ids.clone();
        v.sort();
        v
    };
    assert_eq!(ids, sorted);
    ids.dedup();
    assert_eq!(ids.len(), 3);
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("f.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 3);
}

#[test]
fn empty_directory_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = radar(&[
        "features",
        "--traces",
        s(dir.path()),
        "--out",
        s(&dir.path().join("f.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no traces found"), "{}", stderr(&o));
}

#[test]
fn corrupt_trace_is_skipped_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("in");
    fs::create_dir(&traces).unwrap();
    fs::copy(
        fixtures().join("handmade-uniform.radar.json"),
        traces.join("a.radar.json"),
    )
    .unwrap();
    fs::copy(
        fixtures().join("recall-archetype.radar.json"),
        traces.join("b.radar.json"),
    )
    .unwrap();
    fs::write(traces.join("c.radar.json"), "{\"radar_trace_version\": 1").unwrap();
    let out = dir.path().join("f.csv");
    let o = ok(radar(&["features", "--traces", s(&traces), "--out", s(&out)]));
    assert!(stderr(&o).contains("warning: skipping"), "{}", stderr(&o));
    assert!(stderr(&o).contains("c.radar.json"));
    assert_eq!(csv::Reader::from_path(&out).unwrap().records().count(), 2);
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("f.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["skipped"], serde_json::json!(["c.radar.json"]));
}

#[test]
fn training_is_byte_reproducible_and_predicts_archetypes() {
    let t = Trained::new();
    let again = t.dir.path().join("again.radar-model.json");
    let o = ok(radar(&[
        "train",
        "--features",
        s(&t.csv()),
        "--out",
        s(&again),
        "--seed",
        "1",
    ]));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("fold 5:"), "{stdout}");
    assert!(stdout.contains("mean cv accuracy: 1.0000"), "{stdout}");
    assert_eq!(fs::read(t.model()).unwrap(), fs::read(&again).unwrap());

    let recall = predict(&t.model(), &fixtures().join("recall-archetype.radar.json"));
    assert_eq!(recall["label"], "recall");
    assert!(recall["confidence"].as_f64().unwrap() > 0.5);
    assert_eq!(recall["members"].as_array().unwrap().len(), 4);
    assert_eq!(recall["features"].as_object().unwrap().len(), 37);
    let reasoning = predict(&t.model(), &fixtures().join("reasoning-archetype.radar.json.gz"));
    assert_eq!(reasoning["label"], "reasoning");

    let out = t.dir.path().join("p.json");
    let trace = fixtures().join("recall-archetype.radar.json");
    ok(radar(&[
        "predict",
        "--model",
        s(&t.model()),
        "--trace",
        s(&trace),
        "--out",
        s(&out),
    ]));
    let written: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(written, recall);

    let mut doc: serde_json::Value = serde_json::from_slice(&fs::read(t.model()).unwrap()).unwrap();
    doc["feature_names"].as_array_mut().unwrap().swap(3, 4);
    let bad = t.dir.path().join("bad.radar-model.json");
    fs::write(&bad, serde_json::to_vec(&doc).unwrap()).unwrap();
    let o = radar(&["predict", "--model", s(&bad), "--trace", s(&trace)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("feature-name mismatch"), "{}", stderr(&o));

    let evaluation = t.dir.path().join("eval.json");
    let o = ok(radar(&[
        "evaluate",
        "--model",
        s(&t.model()),
        "--features",
        s(&t.csv()),
        "--out",
        s(&evaluation),
    ]));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("RADAR Performance Results\n"));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&evaluation).unwrap()).unwrap();
    assert_eq!(report["overall"]["total"], 60);
    let table = fs::read_to_string(evaluation.with_extension("txt")).unwrap();
    assert!(table.contains("Category-wise Performance"));
    let mut preds = csv::Reader::from_path(evaluation.with_extension("csv")).unwrap();
    assert_eq!(preds.headers().unwrap().len(), 47);
    assert_eq!(preds.records().count(), 60);
}

#[test]
fn too_many_folds_is_an_error() {
    let t = Trained::new();
    let text = fs::read_to_string(t.csv()).unwrap();
    let small: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
    let path = t.dir.path().join("small.csv");
    fs::write(&path, small).unwrap();
    let o = radar(&["cv", "--features", s(&path), "--folds", "10"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("radar.toml");
    fs::write(&cfg, "[analysis]\nspecialization_threshold = -1.0\n").unwrap();
    let traces = fixtures();
    let out = dir.path().join("f.csv");
    let o = radar(&[
        "--config",
        s(&cfg),
        "features",
        "--traces",
        s(&traces),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    fs::write(&cfg, "[analysis]\nno_such_key = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radar"))
        .args(["features", "--traces", s(&traces), "--out", s(&out)])
        .env("RADAR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    fs::write(&cfg, "[analysis]\nspecialization_threshold = 2.0\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radar"))
        .args(["-q", "features", "--traces", s(&traces), "--out", s(&out)])
        .env("RADAR_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("f.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["analysis"]["specialization_threshold"], 2.0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(radar(&["train"]).status.code(), Some(1));
    assert_eq!(radar(&["bogus"]).status.code(), Some(1));
    assert_eq!(radar(&["synth", "--out", "x", "--seed", "0"]).status.code(), Some(1));
    assert_eq!(radar(&["--help"]).status.code(), Some(0));
}
