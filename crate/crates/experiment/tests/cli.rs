use std::fs;
use std::process::Command;

fn nhbraid() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nhbraid"))
}

const SMALL: [&str; 6] = ["--set", "chain1.n_sites=30", "--set", "chain2.n_sites=30", "--set", "drive.duration=10"];

#[test]
fn simulate_and_replay_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let status = nhbraid()
        .args(["simulate", "fig3b", "--set", "ensemble.realizations=3", "--seed", "7", "--out"])
        .arg(&a)
        .args(SMALL)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let b = dir.path().join("b");
    let status = nhbraid()
        .arg("replay")
        .arg(a.join("run.json"))
        .arg("--out")
        .arg(&b)
        .args(["--threads", "2"])
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    for f in ["summary.csv", "aggregate.csv", "run.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest = fs::read_to_string(a.join("run.json")).unwrap();
    assert!(manifest.contains("\"seed\": 7"));
}

#[test]
fn config_file_and_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "chain1.n_sites = 30\nchain2.n_sites = 30\ndrive.rwa = true # rotating frame\n").unwrap();
    let status = nhbraid()
        .args(["simulate", "fig2a", "--config"])
        .arg(&cfg)
        .env("NHBRAID_OUT_DIR", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let summary = fs::read_to_string(dir.path().join("fig2a").join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(dir.path().join("fig2a").join("series_fig2a.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| nhbraid().args(args).arg("--out").arg(dir.path()).output().unwrap().status.code();
    assert_eq!(code(&["simulate", "fig2a", "--set", "nope=1"]), Some(2));
    assert_eq!(code(&["simulate", "fig9"]), Some(2));
    assert_eq!(code(&["scan", "fig2a"]), Some(2));
    assert_eq!(code(&["simulate", "fig2a", "--config", "/nonexistent/cfg"]), Some(2));
    // Too coarse a tolerance for the norm check is a numerical failure.
    let mut args = vec!["simulate", "fig2a", "--set", "integrator.tolerance=1e-18"];
    args.extend(SMALL);
    assert_eq!(code(&args), Some(3));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"scenario\": 3}").unwrap();
    assert_eq!(nhbraid().arg("replay").arg(&bad).output().unwrap().status.code(), Some(2));
}

#[test]
fn calibrate_prints_the_factor() {
    let out = nhbraid().args(["calibrate", "fig2a"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("calibration factor 1.99999999"), "{text}");
    let out = nhbraid().args(["calibrate", "fig3c", "--set", "sweep.grid=0.01, 0.02"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}
