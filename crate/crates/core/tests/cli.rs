//! The `jl-sparse` binary end to end.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jl-sparse"))
}

#[test]
fn sweep_s_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let status = bin()
        .args([
            "sweep-s",
            "--n",
            "100",
            "--d",
            "200",
            "--k",
            "50",
            "--s",
            "1,2,4,8,16",
            "--t",
            "5",
            "--trials",
            "3",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "construction,input_family,axis_name,axis_value,probe,mean,std,trials"
    );
    // 2 families x 3 constructions x 5 s values x 2 probes
    assert_eq!(lines.count(), 60);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["n"], 100);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["started_at"].is_string());
}

#[test]
fn required_k_prints_value() {
    let out = bin()
        .args(["required-k", "--n", "5000", "--eps", "0.2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let expected = (12.0 * (3.0 * 5000f64.ln() + 2f64.ln()) / 0.04).ceil() as u64;
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        expected.to_string()
    );
    assert_eq!(expected, 7874);
}

#[test]
fn invalid_arguments_exit_2() {
    let out = bin().args(["sweep-s", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = bin()
        .args(["required-k", "--n", "10", "--eps", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep-s", "--k", "10", "--s", "20", "--out"])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .env("JL_THREADS", "zero")
        .args(["required-k", "--n", "10", "--eps", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cdf_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cdf.csv");
    let status = bin()
        .args([
            "cdf",
            "--n",
            "50",
            "--d",
            "100",
            "--k",
            "20",
            "--s",
            "2,8",
            "--t",
            "3",
            "--trials",
            "2",
            "--grid-points",
            "11",
            "--tail-points",
            "5",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let cdf = std::fs::read_to_string(&out).unwrap();
    assert!(cdf.starts_with("construction,grid,cdf\n"));
    // dense, ach, sparse-s2, sparse-s8
    assert_eq!(cdf.lines().count(), 1 + 4 * 11);
    let tail = std::fs::read_to_string(dir.path().join("cdf.tail.csv")).unwrap();
    assert!(tail.starts_with("construction,threshold,tail\n"));
    assert_eq!(tail.lines().count(), 1 + 4 * 5);
    assert!(dir.path().join("cdf.manifest.json").exists());
}

#[test]
fn sweep_t_and_k_run() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, axis) in [
        ("sweep-t", ["--t", "1,2,5"]),
        ("sweep-k", ["--k", "16,32,64"]),
    ] {
        let out = dir.path().join(format!("{cmd}.csv"));
        let status = bin()
            .args([cmd, "--n", "50", "--d", "100", "--trials", "2"])
            .args(axis)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{cmd}");
        assert!(std::fs::read_to_string(&out).unwrap().lines().count() > 1);
    }
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", "--seed", "7", "--out"])
        .arg(dir.path().join("verify.csv"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{stdout}\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    assert!(stdout.lines().count() >= 15);
}
