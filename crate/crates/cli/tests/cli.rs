use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hybridlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridlab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("HYBRIDLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hybridlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    hybridlab(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: [&str; 8] = ["--L", "8", "--T", "12", "--p", "0.5", "--trajectories", "6"];

#[test]
fn minimal_run_writes_one_row_per_observable() {
    let stdout = ok(&[&["run", "--seed", "1"][..], &SMALL].concat());
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "spec_hash,L,T,T_scr,p_m,p,alpha,observable,mean,stderr,n_traj");
    let observables: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(7).unwrap()).collect();
    assert_eq!(observables, ["S_AB", "I_AB", "E_N"]);
    assert!(lines[1..].iter().all(|l| l.ends_with(",6")));
}

#[test]
fn output_is_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, workers) in ["1", "1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.csv"));
        ok(&[&["--workers", workers, "run", "--seed", "7", "--encoding", "initial-bell", "--out", p(&out)][..], &SMALL].concat());
        files.push(fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
    let manifest = fs::read_to_string(dir.path().join("r0.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"spec_hash\""));
}

#[test]
fn results_are_appended_under_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let args = |seed: &'static str| [&["run", "--seed", seed, "--observables", "I_AB", "--out", p(&out)][..], &SMALL].concat();
    ok(&args("1"));
    ok(&args("2"));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.matches("spec_hash").count(), 1);
    ok(&[&args("3")[..], &["--overwrite"]].concat());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 2);
}

#[test]
fn sweep_dry_run_lists_points() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    fs::write(&spec, r#"{"base": {"L": 8, "seed": 1}, "sweep": {"L": [8, 12], "p": [0.1, 0.2, 0.3]}}"#).unwrap();
    let stdout = ok(&["sweep", p(&spec), "--dry-run"]);
    assert!(stdout.starts_with("6 points"));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("L=12 T=48")).count(), 3);
}

#[test]
fn exit_codes_separate_config_io_and_fit_errors() {
    // Odd L is a configuration error.
    assert_eq!(code(&["run", "--seed", "1", "--L", "7"]), 2);
    // So is a missing mandatory seed (reported by the argument parser).
    assert_eq!(code(&["run", "--L", "8"]), 2);
    assert_eq!(code(&["sweep", "/nonexistent/spec.json"]), 3);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one_size.csv");
    ok(&["run", "--seed", "1", "--L", "8", "--T", "8", "--trajectories", "2", "--observables", "I_AB", "--out", p(&out)]);
    assert_eq!(code(&["collapse", p(&out), "--observable", "I_AB"]), 4);
    assert_eq!(code(&["collapse", p(&out), "--observable", "nonsense"]), 2);
}

#[test]
fn oracle_without_noise_prefers_all_c() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = dir.path().join("empty.csv");
    fs::write(&pattern, "x,t\n").unwrap();
    let stdout = ok(&["oracle", "--L", "16", "--pattern", p(&pattern)]);
    assert!(stdout.contains("\"dominant\": \"all_C\""), "{stdout}");
    let boundary = ok(&["oracle", "--L", "16", "--T", "64", "--p", "0.5", "--alpha", "0", "--noise-placement", "left-boundary", "--boundary", "open"]);
    assert!(boundary.contains("\"dominant\": \"wall\""), "{boundary}");
    assert!(boundary.contains("\"critical_point\": 0.25"), "{boundary}");
}

#[test]
fn collapse_recovers_synthetic_critical_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("synthetic.csv");
    let mut text = String::from("spec_hash,L,T,T_scr,p_m,p,alpha,observable,mean,stderr,n_traj\n");
    for l in [16usize, 32, 64, 128] {
        for i in 0..11 {
            let pv = 0.02 + 0.01 * i as f64;
            let y = (-(pv - 0.07) * (l as f64).powf(0.5)).tanh() + 1.0;
            writeln!(text, "x,{l},{},0,0.2,{pv},1.0,I_ABR,{y},0.01,100", 4 * l).unwrap();
        }
    }
    fs::write(&csv, text).unwrap();
    let report = ok(&["collapse", p(&csv), "--observable", "I_ABR"]);
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!((v["p_c"].as_f64().unwrap() - 0.07).abs() < 0.005, "{report}");
    assert!((v["nu"].as_f64().unwrap() - 2.0).abs() < 0.2, "{report}");
}
