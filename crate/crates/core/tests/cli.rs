use std::path::Path;
use std::process::{Command, Output};

use gazeconf::report::ReviewReport;
use gazeconf::synth::screen_layout;
use tempfile::TempDir;

fn gazeconf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gazeconf")).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = gazeconf(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    out
}

#[test]
fn pipeline_runs_from_synthesis_to_report() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["synth", "--out", "log.jsonl", "--participants", "3", "--questions", "40", "--seed", "9"]);
    ok(dir, &["detect", "--input", "log.jsonl", "--out", "events.json"]);
    let events: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("events.json")).unwrap()).unwrap();
    assert_eq!(events.as_array().unwrap().len(), 120);

    ok(dir, &["extract", "--input", "log.jsonl", "--out", "features.csv"]);
    let csv = std::fs::read_to_string(dir.join("features.csv")).unwrap();
    assert!(csv.starts_with("f1,f2,"));
    ok(dir, &["train", "--input", "features.csv", "--out", "model.json"]);
    let eval = ok(dir, &["eval", "--input", "log.jsonl", "--out", "eval.json", "--features", "all"]);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("confidence"));
    ok(dir, &["eval", "--input", "features.csv", "--out", "eval_csv.json", "--eval", "pooled"]);
    ok(dir, &["correlate", "--input", "features.csv", "--out", "r.csv"]);
    assert_eq!(std::fs::read_to_string(dir.join("r.csv")).unwrap().lines().count(), 31);

    ok(dir, &["synth", "--out", "one.jsonl", "--participants", "1", "--questions", "20", "--seed", "11"]);
    ok(dir, &[
        "report", "--model", "model.json", "--input", "one.jsonl", "--out", "report.json",
        "--markdown", "report.md", "--eval-report", "eval.json",
    ]);
    let report = ReviewReport::load(dir.join("report.json")).unwrap();
    assert_eq!(report.summary.participant.as_deref(), Some("p01"));
    assert!(report.summary.evaluation.is_some());
    assert_eq!(report.summary.group_counts.iter().sum::<usize>(), report.summary.answers);
    assert!(std::fs::read_to_string(dir.join("report.md")).unwrap().starts_with('#'));

    let claim = ["claim", "--input", "one.jsonl", "--log", "claims.jsonl", "--estimated", "confident", "--corrected", "unconfident", "--timestamp", "5"];
    ok(dir, &[&claim[..], &["--question", "q003"]].concat());
    let missing = gazeconf(dir, &[&claim[..], &["--question", "nope"]].concat());
    assert_eq!(code(&missing), 2);
    assert_eq!(std::fs::read_to_string(dir.join("claims.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn absolute_mode_uses_the_layout_file() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("layout.json"), serde_json::to_string(&screen_layout()).unwrap()).unwrap();
    ok(dir, &["synth", "--out", "log.jsonl", "--participants", "2", "--questions", "15"]);
    ok(dir, &["extract", "--input", "log.jsonl", "--out", "abs.csv", "--aoi-mode", "absolute", "--layout", "layout.json"]);
    let missing = gazeconf(dir, &["extract", "--input", "log.jsonl", "--out", "x.csv", "--aoi-mode", "absolute"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("layout"));
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&gazeconf(dir, &["eval", "--bogus"])), 1);
    assert_eq!(code(&gazeconf(dir, &[])), 1);
    assert_eq!(code(&gazeconf(dir, &["--help"])), 0);
    assert_eq!(code(&gazeconf(dir, &["extract", "--input", "absent.jsonl", "--out", "x.csv"])), 2);

    ok(dir, &["synth", "--out", "one.jsonl", "--participants", "1", "--questions", "30"]);
    let lopo = gazeconf(dir, &["eval", "--input", "one.jsonl", "--out", "e.json"]);
    assert_eq!(code(&lopo), 2);
    assert!(stderr(&lopo).contains("participant"), "{}", stderr(&lopo));

    ok(dir, &["extract", "--input", "one.jsonl", "--out", "f.csv"]);
    let text = std::fs::read_to_string(dir.join("f.csv")).unwrap();
    let single: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { l.to_string() } else { l.replacen(",0,p01,", ",1,p01,", 1) })
        .collect();
    std::fs::write(dir.join("single.csv"), single.join("\n") + "\n").unwrap();
    assert_eq!(code(&gazeconf(dir, &["train", "--input", "single.csv", "--out", "m.json"])), 2);

    std::fs::write(dir.join("tight.toml"), "[svm]\nmax_passes = 1\n").unwrap();
    let stuck = gazeconf(dir, &["train", "--input", "f.csv", "--out", "m.json", "--features", "all", "--config", "tight.toml"]);
    assert_eq!(code(&stuck), 3, "{}", stderr(&stuck));
}

#[test]
fn profile_round_trips_through_synth() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["profile", "--out", "profile.toml"]);
    ok(dir, &["synth", "--profile", "profile.toml", "--out", "a.jsonl", "--participants", "2", "--questions", "5"]);
    ok(dir, &["synth", "--out", "b.jsonl", "--participants", "2", "--questions", "5"]);
    assert_eq!(std::fs::read(dir.join("a.jsonl")).unwrap(), std::fs::read(dir.join("b.jsonl")).unwrap());
    std::fs::write(dir.join("bad.toml"), "class_prior = 2.0\n").unwrap();
    assert_eq!(code(&gazeconf(dir, &["synth", "--profile", "bad.toml", "--out", "c.jsonl"])), 2);
}
