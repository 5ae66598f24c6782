use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ymh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ymh")).args(args).env("YMH_THREADS", "1").output().expect("binary runs")
}

fn run_in(dir: &Path, exp: &str, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", exp, "--out", out];
    args.extend_from_slice(extra);
    ymh(&args)
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn list_names_every_experiment() {
    let out = ymh(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["bps-energy", "quantization", "plateau", "liminf-cells", "theta-monopole"] {
        assert!(text.lines().any(|l| l == name), "{name} missing from {text}");
    }
}

#[test]
fn small_bps_energy_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "bps-energy", &["--set", "h=0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
    for f in ["config.txt", "results.jsonl"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn outputs_carry_the_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), "quantization", &[]).status.success());
    let jsonl = fs::read_to_string(dir.path().join("results.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    let hash = first["config_hash"].as_str().unwrap().to_string();
    assert!(!hash.is_empty());
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["config_hash"], hash.as_str());
    }
    for (name, bytes) in artifacts(dir.path()) {
        if name.ends_with(".csv") {
            assert!(String::from_utf8(bytes).unwrap().starts_with(&format!("# experiment=quantization config_hash={hash}")));
        }
    }

    let other = tempfile::tempdir().unwrap();
    assert!(run_in(other.path(), "quantization", &["--set", "seed=7"]).status.success());
    let jsonl = fs::read_to_string(other.path().join("results.jsonl")).unwrap();
    assert!(!jsonl.contains(&hash));
}

#[test]
fn reruns_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert!(run_in(dir.path(), "quantization", &[]).status.success());
    }
    assert_eq!(artifacts(a.path()), artifacts(b.path()));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nexperiment = bps-energy\nh = 0.5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = ymh(&["run", "bps-energy", "--config", cfg.to_str().unwrap(), "--set", "h=0.25", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(out_dir.join("config.txt")).unwrap().contains("0.25"));

    fs::write(&cfg, "experiment = plateau\n").unwrap();
    let out = ymh(&["run", "bps-energy", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), "recovery-gamma", &["--set", "eps=0.1,0.2"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), "bps-energy", &["--set", "no_such_key=1"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), "bps-energy", &["--set", "h"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), "no-such-experiment", &[]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), "bps-energy", &["--set", "h=-1"]).status.code(), Some(2));
}
