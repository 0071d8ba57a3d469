use std::path::Path;
use std::process::Command;

use slabperc::cli::{self, FrozenTable};
use slabperc::manifest::RunManifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slabperc"));
    c.env_remove(cli::SEED_ENV);
    c
}

fn run(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

fn out(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn crossing_writes_one_row_and_a_manifest() {
    let d = tempfile::tempdir().unwrap();
    let o = out(d.path());
    let code = run(&[
        "--out", &o, "crossing", "--k", "1", "--n", "8", "--u", "2", "--alpha", "0", "--beta", "8", "--p", "0.55", "--samples",
        "2000", "--seed", "7",
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(d.path().join("crossing.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], slabperc::io::CSV_HEADER);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("crossing,1,8,2,0,8,0.55,2000,"));
    let m = RunManifest::read(&d.path().join("manifest.json")).unwrap();
    assert_eq!((m.subcommand.as_str(), m.seed), ("crossing", Some(7)));
    assert_eq!(m.outputs, ["crossing.csv"]);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let o = out(d.path());
    assert_eq!(run(&["crossing", "--no-such-flag"]), 64);
    assert_eq!(run(&["no-such-command"]), 64);
    assert_eq!(run(&["--help"]), 0);
    // p outside [0, 1] is an error, not a usage problem
    assert_eq!(run(&["--out", &o, "sample", "--p", "1.5"]), 1);
    // no seed radius reaches the target: flagged fallback
    let flagged = run(&["--out", &o, "sequences", "--k", "0", "--scales", "4", "--p", "0.2", "--target", "0.99", "--samples", "500"]);
    assert_eq!(flagged, 2);
    assert_eq!(run(&["--out", &o, "sample", "--p", "0.5", "--n", "2"]), 0);
}

#[test]
fn environment_overrides_seed() {
    let d = tempfile::tempdir().unwrap();
    let o = out(d.path());
    let st = bin()
        .env(cli::SEED_ENV, "99")
        .args(["--out", &o, "sample", "--p", "0.5", "--n", "1", "--seed", "3"])
        .status()
        .unwrap();
    assert!(st.success());
    let m = RunManifest::read(&d.path().join("manifest.json")).unwrap();
    assert_eq!(m.seed, Some(99));
    assert_eq!(m.params["seed"], 99);
    assert!(std::fs::read_to_string(d.path().join("configs.json")).unwrap().contains("\"seed\": 99"));
}

#[test]
fn replay_detects_tampering() {
    let d = tempfile::tempdir().unwrap();
    let run_dir = d.path().join("run");
    let o = out(&run_dir);
    assert_eq!(run(&["--out", &o, "--workers", "1", "sample", "--p", "0.3", "--count", "3"]), 0);
    let manifest = out(&run_dir.join("manifest.json"));
    assert_eq!(run(&["--workers", "8", "--out", &out(&d.path().join("a")), "replay", &manifest]), 0);
    std::fs::write(run_dir.join("configs.json"), "[]\n").unwrap();
    assert_eq!(run(&["--out", &out(&d.path().join("b")), "replay", &manifest]), 1);
}

#[test]
fn oracle_freeze_reproduces_checked_in_table() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--out", &out(d.path()), "oracle-freeze"]), 0);
    let fresh = std::fs::read(d.path().join("frozen_events.json")).unwrap();
    let checked = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/frozen_events.json")).unwrap();
    assert_eq!(fresh, checked);
    let t: FrozenTable = serde_json::from_slice(&fresh).unwrap();
    assert!(t.events.len() >= 10);
}

#[test]
fn glue_audit_tiny_is_clean() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--out", &out(d.path()), "glue-audit", "--k", "1", "--window", "tiny", "--p", "1/2"]), 0);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("glue_audit.json")).unwrap()).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_grid_is_rejected() {
    assert!(cli::parse_grid("0.4:0.6").is_err());
    assert!(cli::parse_grid("0.6:0.4:0.1").is_err());
    assert_eq!(cli::parse_grid("0.4:0.6:0.1").unwrap().len(), 3);
}
