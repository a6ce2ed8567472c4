use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use msl_unmix::io::{read_checkpoint, read_endmembers, write_endmembers};
use msl_unmix::EndmemberLibrary;

fn msl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msl")).current_dir(dir).env_remove("MSL_WORKERS").args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Simulates a small scene into `dir/sim`.
fn small_scene(dir: &Path, budget: &str) {
    ok(&msl(dir, &["simulate", "--out", "sim", "--budget", budget, "--seed", "7", "--set", "n_row=12", "--set", "n_col=12", "--set", "n_band=4", "--set", "n_endmember=3"]));
}

const INPUTS: [&str; 6] = ["--cube", "sim/cube.txt", "--endmembers", "sim/endmembers.csv", "--irf", "sim/irf.txt"];

fn unmix_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut a = vec!["unmix"];
    a.extend_from_slice(&INPUTS);
    a.extend_from_slice(&["--out", out, "--iters", "40", "--burnin", "15", "--tv", "--seed", "3"]);
    a.extend_from_slice(extra);
    a
}

fn read_dir_sorted(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "pgm"))
        .map(|p| (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        ok(&msl(d, &["simulate", "--out", "sim", "--budget", "1", "--seed", "7", "--set", "n_row=16", "--set", "n_col=16"]));
    }
    let cube = |d: &Path| fs::read(d.join("sim/cube.txt")).unwrap();
    assert_eq!(cube(a.path()), cube(b.path()));
    assert!(String::from_utf8(cube(a.path())).unwrap().starts_with("MSLCUBE 1 16 16 8 160 2\n"));
}

#[test]
fn eval_of_identical_maps_is_zero() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "2");
    let stdout = ok(&msl(d.path(), &["eval", "--est", "sim/truth", "--ref", "sim/truth"]));
    assert!(stdout.contains("depth_rmse_mm 0.000"), "{stdout}");
    assert!(stdout.contains("label_f1 1.000"), "{stdout}");
}

#[test]
fn unmix_defaults_are_documented_values() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "2");
    let mut args = vec!["unmix"];
    args.extend_from_slice(&INPUTS);
    args.extend_from_slice(&["--out", "est", "--stop-after", "1"]);
    ok(&msl(d.path(), &args));
    let ck = read_checkpoint(&d.path().join("est/checkpoint.json")).unwrap();
    let s = &ck.checkpoint.config;
    assert_eq!((s.n_mc, s.n_bi), (5000, 2000));
    assert_eq!((s.initial.alpha, s.initial.nu), (1.0, 0.05));
    assert!(!s.tv);
    assert_eq!(ck.checkpoint.state.sweep, 1);
}

#[test]
fn unmix_writes_every_map() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "3");
    let stdout = ok(&msl(d.path(), &unmix_args("est", &[])));
    assert!(stdout.contains("40 sweeps done"), "{stdout}");
    for f in ["depth_mm.csv", "depth_mm.pgm", "confidence.csv", "abundance_3.pgm", "anomaly_log_intensity.csv", "labels.csv"] {
        assert!(d.path().join("est").join(f).exists(), "{f}");
    }
    let stdout = ok(&msl(d.path(), &["eval", "--est", "est", "--ref", "sim/truth"]));
    let rmse: f64 = stdout.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(rmse < 1.5, "{stdout}");
}

#[test]
fn interrupted_and_resumed_run_matches_uninterrupted() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "3");
    ok(&msl(d.path(), &unmix_args("full", &["--workers", "1"])));
    let stop = msl(d.path(), &unmix_args("split", &["--workers", "2", "--stop-after", "22", "--checkpoint-every", "10"]));
    ok(&stop);
    assert!(!d.path().join("split/depth_mm.csv").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_msl"))
        .current_dir(d.path())
        .env("MSL_WORKERS", "3")
        .args(["resume", "--checkpoint", "split/checkpoint.json"])
        .output()
        .unwrap();
    ok(&out);
    assert_eq!(read_dir_sorted(&d.path().join("full")), read_dir_sorted(&d.path().join("split")));
}

#[test]
fn ml_depth_band_and_joint() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "3");
    ok(&msl(d.path(), &["ml-depth", "--cube", "sim/cube.txt", "--irf", "sim/irf.txt", "--out", "joint", "--joint"]));
    ok(&msl(d.path(), &["ml-depth", "--cube", "sim/cube.txt", "--irf", "sim/irf.txt", "--out", "b2", "--band", "2"]));
    let e = |dir: &str| -> f64 {
        let s = ok(&msl(d.path(), &["eval", "--est", dir, "--ref", "sim/truth"]));
        s.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!(e("joint") < e("b2"));
    let bad = msl(d.path(), &["ml-depth", "--cube", "sim/cube.txt", "--irf", "sim/irf.txt", "--out", "x", "--band", "5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn band_count_mismatch_exits_with_validation_code() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "1");
    let lib = read_endmembers(&d.path().join("sim/endmembers.csv")).unwrap();
    let three = EndmemberLibrary::from_matrix(3, lib.n_endmember(), lib.matrix()[..3 * lib.n_endmember()].to_vec()).unwrap();
    write_endmembers(&d.path().join("sim/endmembers.csv"), &three).unwrap();
    let out = msl(d.path(), &unmix_args("est", &[]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("band-count mismatch"));
}

#[test]
fn unknown_config_key_exits_with_validation_code() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("run.cfg"), "iters = 10\nwibble = 3\n").unwrap();
    let out = msl(d.path(), &["unmix", "--config", "run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.cfg:2"));
    assert_eq!(msl(d.path(), &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_failure() {
    let d = tempfile::tempdir().unwrap();
    let out = msl(d.path(), &["ml-depth", "--cube", "absent.txt", "--irf", "absent.irf"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn pfa_refuses_truncated_support_unless_forced() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "3");
    let mut args = vec!["pfa"];
    args.extend_from_slice(&INPUTS);
    args.extend_from_slice(&["--out", "pfa", "--iters", "20", "--burnin", "5", "--t-min", "1"]);
    assert_eq!(msl(d.path(), &args).status.code(), Some(2));
    args.push("--force");
    ok(&msl(d.path(), &args));
    assert!(d.path().join("pfa/abundance_1.csv").exists());
}

#[test]
fn config_file_and_overrides() {
    let d = tempfile::tempdir().unwrap();
    small_scene(d.path(), "2");
    fs::write(
        d.path().join("run.cfg"),
        "cube = sim/cube.txt\nendmembers = sim/endmembers.csv\nirf = sim/irf.txt\nout = cfg\niters = 30\nburnin = 10\n",
    )
    .unwrap();
    ok(&msl(d.path(), &["unmix", "--config", "run.cfg", "--set", "iters=12", "--iters", "18", "--stop-after", "3"]));
    let ck = read_checkpoint(&d.path().join("cfg/checkpoint.json")).unwrap();
    assert_eq!(ck.checkpoint.config.n_mc, 18);
    assert_eq!(ck.run.cube, Some(PathBuf::from("sim/cube.txt")));
}
