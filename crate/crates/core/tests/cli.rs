use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qcapwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcapwit")).args(args).output().unwrap()
}

fn tables() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tables")
}

#[test]
fn theory_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcapwit(&[
        "--out-dir",
        dir.path().to_str().unwrap(),
        "theory",
        "--channel",
        "ad",
        "--grid",
        "0:1:0.05",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("theory_ad.dat")).unwrap();
    assert_eq!(text.lines().count(), 22);
    assert_eq!(text.lines().nth(1).unwrap(), "0 1 1 1 1");
    assert!(text.lines().last().unwrap().starts_with("1 0 0 0 0"));
}

#[test]
fn reproduce_pd_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = tables().join("pd.csv");
    let out = qcapwit(&[
        "--out-dir",
        dir.path().to_str().unwrap(),
        "reproduce",
        "--table",
        table.to_str().unwrap(),
        "--draws",
        "500",
        "--format",
        "jsonl",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records =
        qcapwit::io::read_report(dir.path().join("reproduce_pd.jsonl"), qcapwit::io::ReportFormat::Jsonl).unwrap();
    assert_eq!(records.len(), 21);
    assert!(records[20].x_c < 0.01);
    assert!(records.iter().all(|r| r.z_c_std.is_some()));
    assert!(dir.path().join("compare_pd.csv").exists());
    assert!(dir.path().join("pd_theory.dat").exists());
}

#[test]
fn oracle_check_prints_deviations() {
    let out = qcapwit(&["oracle-check", "--samples", "200"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("max |C_B - brute force|"));
}

#[test]
fn simulate_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "channel = ad\ngrid = 0.2:0.6:0.2\ntrials = 16\nformat = jsonl\nout_dir = {}\n",
            dir.path().join("res").display()
        ),
    )
    .unwrap();
    let out = qcapwit(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = qcapwit::io::read_report(
        dir.path().join("res/simulate_ad.jsonl"),
        qcapwit::io::ReportFormat::Jsonl,
    )
    .unwrap();
    assert_eq!(recs.len(), 3);
    // Waveplate-angle error bar on η.
    assert!(recs.iter().all(|r| r.param_std.unwrap() > 0.0));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qcapwit"))
        .args(["theory", "--channel", "pd"])
        .env("QCAPWIT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("theory_pd.dat")).unwrap();
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn exit_codes() {
    assert_eq!(qcapwit(&[]).status.code(), Some(1));
    assert_eq!(qcapwit(&["simulate", "--fidelity", "0.25"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("d.csv");
    std::fs::write(&bad, "param,Qz00\n").unwrap();
    let out = qcapwit(&[
        "--out-dir",
        dir.path().to_str().unwrap(),
        "reproduce",
        "--table",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("header"));
}
