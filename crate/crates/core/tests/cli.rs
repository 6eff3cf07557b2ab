use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env("DISPERSION_LAB_OUT", out)
        .output()
        .unwrap()
}

#[test]
fn list_prints_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["--list"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().all(|l| l.contains(": ")));
}

#[test]
fn unknown_experiment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["--experiment", "no_such_thing"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_thing"));
}

#[test]
fn missing_experiment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&[], dir.path()).status.code(), Some(2));
}

#[test]
fn zero_trials_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["--experiment", "kdv_paired_divergence", "--trials", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn overflowing_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "experiment = kdv_second_iterate_validate\nalpha = -400\nn_ladder = 16\ntrials = 2\n").unwrap();
    let out = lab(&["--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["--experiment", "kdv_paired_divergence", "--trials", "20", "--seed", "5"];
    for (d, threads) in [(&a, "1"), (&b, "3")] {
        let mut full = args.to_vec();
        full.extend(["--threads", threads, "--out-dir", d.to_str().unwrap()]);
        let out = lab(&full, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let files = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v
    };
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 2);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn out_dir_env_is_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["--experiment", "kdv_paired_divergence", "--trials", "4"], dir.path());
    assert!(out.status.success());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".csv")) && names.iter().any(|n| n.ends_with(".json")));
}
