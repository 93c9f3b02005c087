use std::path::Path;
use std::process::{Command, Output};

use daa_waitmap::cli::{RunManifest, ToolConfig};
use daa_waitmap::sim::{BatchReport, Group};

fn tool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daa-waitmap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = tool(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn print_config_emits_the_defaults_and_reads_them_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["--print-config"]);
    let cfg: ToolConfig = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg, ToolConfig::default());
    std::fs::write(dir.path().join("cfg.json"), &out.stdout).unwrap();
    let again = ok(dir.path(), &["--config", "cfg.json", "--print-config"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn encounter_generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen-encounters", "--count", "200", "--seed", "7", "--out", "a.csv"]);
    ok(dir.path(), &["gen-encounters", "--count", "200", "--seed", "7", "--out", "b.csv"]);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 201);

    ok(dir.path(), &["gen-encounters", "--count", "0", "--seed", "7", "--out", "empty.csv"]);
    let empty = std::fs::read_to_string(dir.path().join("empty.csv")).unwrap();
    assert_eq!(empty.lines().count(), 1);
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| tool(dir.path(), args).status.code();
    assert_eq!(code(&["build-map", "--out", "m.json", "--grid", "coarse", "--gamma", "1.0"]), Some(2));
    assert_eq!(code(&["build-map", "--out", "m.json", "--grid", "coarse", "--max-sweeps", "2"]), Some(4));
    ok(dir.path(), &["gen-encounters", "--count", "3", "--seed", "1", "--out", "e.csv"]);
    assert_eq!(code(&["run", "--group", "ID-2", "--encounters", "e.csv", "--out", "r"]), Some(2));
    assert_eq!(code(&["run", "--group", "B-1", "--encounters", "missing.csv", "--out", "r"]), Some(3));
    std::fs::write(dir.path().join("bad.csv"), "seed,speed\n1,2\n").unwrap();
    assert_eq!(code(&["run", "--group", "B-1", "--encounters", "bad.csv", "--out", "r"]), Some(3));
    assert_eq!(code(&["run", "--group", "Z-9", "--encounters", "e.csv", "--out", "r"]), Some(2));
}

#[test]
fn run_report_and_rerun_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["build-map", "--out", "map.json", "--grid", "coarse"]);
    ok(d, &["gen-encounters", "--count", "25", "--seed", "4", "--out", "enc.csv"]);
    ok(d, &["run", "--group", "all", "--encounters", "enc.csv", "--map", "map.json", "--seed", "2", "--out", "r1", "--dump-traces"]);
    for name in ["report.json", "manifest.json", "waiting_status.csv", "risk_per_flight_hour.csv"] {
        assert!(d.join("r1").join(name).exists(), "{name}");
    }
    let traces = std::fs::read_dir(d.join("r1/traces/ID-2")).unwrap().count();
    assert_eq!(traces, 25);

    let report = BatchReport::load_json(d.join("r1/report.json")).unwrap();
    assert_eq!(report.groups.iter().map(|g| g.group).collect::<Vec<_>>(), Group::ALL);
    let manifest: RunManifest = serde_json::from_slice(&std::fs::read(d.join("r1/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.params.seed, 2);

    ok(d, &["run", "--manifest", "r1/manifest.json", "--out", "r2", "--threads", "2"]);
    assert_eq!(
        std::fs::read(d.join("r1/report.json")).unwrap(),
        std::fs::read(d.join("r2/report.json")).unwrap()
    );

    ok(d, &["run", "--group", "B-2", "--encounters", "enc.csv", "--out", "rb"]);
    ok(d, &["run", "--group", "ID-2", "--encounters", "enc.csv", "--map", "map.json", "--out", "ri"]);
    let merged = ok(d, &["report", "rb/report.json", "ri/report.json", "--out", "m"]);
    let text = String::from_utf8(merged.stdout).unwrap();
    assert!(text.contains("B-2,0,"), "{text}");
    let table = std::fs::read_to_string(d.join("m/waiting_status.csv")).unwrap();
    assert!(table.lines().nth(1).unwrap().ends_with(",0.00"));
    assert_eq!(table.lines().count(), 3);

    ok(d, &["gen-encounters", "--count", "5", "--seed", "5", "--out", "other.csv"]);
    ok(d, &["run", "--group", "B-1", "--encounters", "other.csv", "--out", "ro"]);
    let unpaired = tool(d, &["report", "rb/report.json", "ro/report.json", "--out", "x"]);
    assert_eq!(unpaired.status.code(), Some(5));
}
