use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rankjoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankjoint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = rankjoint(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn flagged_ids(report: &Path) -> Vec<String> {
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    v["flagged"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["case_id"].as_str().unwrap().to_owned())
        .collect()
}

#[test]
fn staged_commands_reproduce_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");
    ok(&[
        "synth", "--cases", "400", "--codes", "40", "--days", "7", "--anomaly-fraction", "0.03",
        "--seed", "3", "--out", s(&data),
    ]);
    let events = data.join("events.csv");
    let consumption = data.join("consumption.csv");
    let full = d.join("full");
    ok(&[
        "pipeline", "--events", s(&events), "--consumption", s(&consumption), "--out", s(&full),
    ]);

    let ce = d.join("ce");
    let cc = d.join("cc");
    ok(&["code-events", "--input", s(&events), "--out", s(&ce)]);
    ok(&["code-consumption", "--input", s(&consumption), "--out", s(&cc)]);
    let oe = d.join("oe");
    let oc = d.join("oc");
    ok(&[
        "ordinate", "--input", s(&ce.join("coded_events.csv")), "--method", "ca", "--double-log",
        "--out", s(&oe),
    ]);
    ok(&[
        "ordinate", "--input", s(&cc.join("coded_consumption.csv")), "--method", "pca", "--out",
        s(&oc),
    ]);
    for o in [&oe, &oc] {
        ok(&[
            "distances", "--coordinates", s(&o.join("coordinates.csv")), "--scree",
            s(&o.join("scree.csv")), "--out", s(o),
        ]);
    }
    let j = d.join("joint");
    ok(&[
        "joint", "--a", s(&oe.join("distances.csv")), "--b", s(&oc.join("distances.csv")),
        "--out", s(&j),
    ]);
    ok(&["detect", "--joint", s(&j.join("joint.csv")), "--out", s(&j)]);

    assert_eq!(
        fs::read(full.join("joint.csv")).unwrap(),
        fs::read(j.join("joint.csv")).unwrap()
    );
    assert_eq!(
        flagged_ids(&full.join("report.json")),
        flagged_ids(&j.join("report.json"))
    );
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let bad_config = d.join("bad.json");
    fs::write(&bad_config, "{\"threshold\": \"high\"}").unwrap();
    let out = rankjoint(&["pipeline", "--config", s(&bad_config)]);
    assert_eq!(out.status.code(), Some(2));

    let out = rankjoint(&["pipeline", "--threshold", "nope"]);
    assert_eq!(out.status.code(), Some(2));

    let events = d.join("events.csv");
    let consumption = d.join("consumption.csv");
    fs::write(&events, "case_id,timestamp,code\nm1,not-a-date,E1\n").unwrap();
    fs::write(&consumption, "case_id,date\n").unwrap();
    let out = rankjoint(&[
        "pipeline", "--events", s(&events), "--consumption", s(&consumption), "--out",
        s(&d.join("run")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "bench", "--sizes", "200,400", "--cols", "10", "--repeats", "3", "--out",
        s(dir.path()),
    ]);
    let text = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));
}
