//! The binary end to end: exit codes, files, the JSON envelope and CSV.

use std::path::Path;
use std::process::{Command, Output};

use meetwalk::output::Envelope;

fn meetwalk(args: &[&str], capacity: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_meetwalk"));
    cmd.args(args).env_remove("MEETWALK_CAPACITY");
    if let Some(c) = capacity {
        cmd.env("MEETWALK_CAPACITY", c);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_envelope(path: &Path) -> Envelope {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_then_collide_exact() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("k5.chain");
    let json = dir.path().join("k5.json");
    let o = meetwalk(&["gen", "--family", "complete", "--n", "5", "-o", chain.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&chain).unwrap().contains("family complete"));

    let o = meetwalk(
        &[
            "collide",
            chain.to_str().unwrap(),
            "--lx",
            "1",
            "--ly",
            "1",
            "--lz",
            "0",
            "--method",
            "exact",
            "--json",
            json.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let env = read_envelope(&json);
    assert!(env.tool_version.starts_with("meetwalk "));
    assert_eq!(env.config["capacity_source"], "default");
    let p = env.artifacts[0].data.as_ref().unwrap()["probability"].as_f64().unwrap();
    // K_5 at (1,1,0): exactly 2/5
    assert!((p - 0.4).abs() < 1e-12, "{p}");
    // no stray temporary files next to the outputs
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn usage_errors_exit_two() {
    let o = meetwalk(&["collide", "cycle", "--n", "4", "--ly", "-1"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--ly"));
    assert_eq!(meetwalk(&["collide", "nowhere.chain"], None).status.code(), Some(2));
    assert_eq!(meetwalk(&["verify", "everything"], None).status.code(), Some(2));
    assert_eq!(meetwalk(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(meetwalk(&["--help"], None).status.code(), Some(0));
}

#[test]
fn capacity_variable_is_honored_and_echoed() {
    let o = meetwalk(&["collide", "complete", "--n", "5", "--method", "exact", "--format", "json"], Some("64"));
    assert_eq!(o.status.code(), Some(2), "125 product states exceed 64");
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));

    let o = meetwalk(
        &["collide", "complete", "--n", "5", "--samples", "500", "--seed", "9", "--format", "json"],
        Some("64"),
    );
    assert_eq!(o.status.code(), Some(0));
    let env: Envelope = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(env.config["capacity"], 64);
    assert_eq!(env.config["capacity_source"], "MEETWALK_CAPACITY");
    assert_eq!(env.artifacts[0].kind, "mc-estimate");
    assert_eq!(env.artifacts[0].data.as_ref().unwrap()["seed"], 9);
}

#[test]
fn mc_csv_echoes_seed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trap.csv");
    let o = meetwalk(
        &[
            "mc",
            "trap",
            "--n",
            "6",
            "--c",
            "12",
            "--lx",
            "1",
            "--ly",
            "0",
            "--lz",
            "1",
            "--samples",
            "2000",
            "--seed",
            "7",
            "--csv",
            csv.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("seed: 7"));
    let mut r = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["label", "value", "std_err", "n_samples", "method"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][3], "2000");
}

#[test]
fn analyze_writes_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cdf.csv");
    let o = meetwalk(
        &["analyze", "cycle", "--n", "6", "--hitting-cdf", "0,3", "--points", "9", "--csv", csv.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value,err_bound"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn verify_exit_codes() {
    let o = meetwalk(&["verify", "thm1", "--families", "cycle:3..5,complete:2..4"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("transitive: 6 passed, 0 failed, 0 skipped"));

    // identical sizes cannot show a decreasing trend, so a check fails
    let o = meetwalk(&["verify", "nonreversible", "--n-list", "5,5", "--samples", "500", "--format", "json"], None);
    assert_eq!(o.status.code(), Some(1));
    let env: Envelope = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(env.checks.iter().any(|c| c.is_failure()));
    assert_eq!(env.config["command"]["seed"], 0);
}
