use std::fs;
use std::path::Path;
use std::process::Command;

use tin::config::parse_config;
use tin::manifest::read_manifest;
use tin::pipeline::{self, manifest_path, Split};
use tin_core::data::evaluate;
use tin_core::suppression::{lis_p, LisParams};

const TINY: &str = "seed = 5\n[train]\nepochs = 2\n[synth]\ntrain_images = 30\ntest_images = 12\n";

fn tin(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_tin")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "tin {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn setup() -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    (dir, cfg)
}

#[test]
fn synth_is_deterministic() {
    let (dir, cfg) = setup();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        tin(&["synth", "--config", s(&cfg), "--out", s(d), "--d-train", "A,B", "--c-train", "B", "--mode", "transfer"]);
    }
    for name in ["A_train.jsonl", "A_test.jsonl", "B_train.jsonl", "B_test.jsonl"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = dir.path().join("c");
    tin(&["synth", "--config", s(&cfg), "--out", s(&c), "--seed", "6"]);
    assert_ne!(fs::read(a.join("A_train.jsonl")).unwrap(), fs::read(c.join("A_train.jsonl")).unwrap());
}

#[test]
fn pipeline_outputs_agree_with_the_library() {
    let (dir, cfg) = setup();
    let run = dir.path().join("run");
    let c = ["--config", s(&cfg), "--out", s(&run)];
    for cmd in ["synth", "train", "infer", "eval"] {
        tin(&[&[cmd][..], &c[..]].concat());
    }
    for f in ["model.ckpt", "loss.csv", "config.toml", "predictions.jsonl", "d_scores.json", "suppression.txt", "eval.txt"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let losses = fs::read_to_string(run.join("loss.csv")).unwrap();
    assert_eq!(losses.lines().count(), 3);

    let rc = parse_config(TINY).unwrap().to_run_config().unwrap();
    let test = read_manifest(&manifest_path(&run, "A", Split::Test)).unwrap();
    let model = pipeline::load_model(&rc, &test, &run).unwrap();
    let preds = pipeline::infer_model(&rc, &model, &test).unwrap();
    let direct = evaluate(&test, &preds, rc.infer.iou_min);

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("eval.json")).unwrap()).unwrap();
    assert_eq!(report["map"].as_f64().unwrap(), direct.role.mean);
    assert_eq!(report["interactiveness_ap"].as_f64().unwrap(), direct.interactiveness_ap);
    let per = report["per_category"].as_array().unwrap();
    assert_eq!(per.len(), direct.role.per_category.len());
    for entry in per {
        let id = entry["id"].as_u64().unwrap() as u32;
        assert_eq!(entry["ap"].as_f64().unwrap(), direct.role.per_category[&id]);
    }

    let dumped = fs::read_to_string(run.join("predictions.jsonl")).unwrap();
    assert_eq!(dumped.lines().count(), preds.len());
    let first: serde_json::Value = serde_json::from_str(dumped.lines().next().unwrap()).unwrap();
    for key in ["image_id", "h", "o", "s_inst", "s_lis", "scores"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    let scores: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("d_scores.json")).unwrap()).unwrap();
    assert_eq!(scores[0]["s_part"].as_array().unwrap().len(), 10);

    tin(&["inspect", "--config", s(&cfg), "--out", s(&run)]);
    let patterns = fs::read_to_string(run.join("patterns.txt")).unwrap();
    assert!(patterns.starts_with("category"));
}

#[test]
fn inspect_writes_the_closed_form_curve() {
    let (dir, cfg) = setup();
    let run = dir.path().join("lis");
    tin(&["inspect", "--config", s(&cfg), "--out", s(&run)]);
    let mut r = csv::Reader::from_path(run.join("lis_curve.csv")).unwrap();
    let p = LisParams::default();
    let mut n = 0;
    for row in r.records() {
        let row = row.unwrap();
        let x: f64 = row[0].parse().unwrap();
        let y: f64 = row[1].parse().unwrap();
        assert!((y - lis_p(x, &p)).abs() <= 1e-12);
        n += 1;
    }
    assert_eq!(n, pipeline::LIS_POINTS);
    assert!(!run.join("patterns.txt").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let (dir, cfg) = setup();
    let out = Command::new(env!("CARGO_BIN_EXE_tin"))
        .args(["eval", "--config", s(&cfg), "--out", s(&dir.path().join("missing"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = Command::new(env!("CARGO_BIN_EXE_tin"))
        .args(["synth", "--mode", "sideways"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_tin"))
        .args(["synth", "--c-train", "C", "--d-train", "C", "--out", s(&dir.path().join("c"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
