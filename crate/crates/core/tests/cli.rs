use std::path::Path;
use std::process::{Command, Output};

use harmonic_ball::harmonics::HarmonicMap;
use harmonic_ball::polynomial::text::parse_exact_map;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_harmonic-ball"));
    c.env_remove("HARMONIC_BALL_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn harmonic-ball")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let v = run(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["volumes", "--n-max", "ten"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["decay"]).status.code(), Some(2));
    let o = run(&["integrate", "--poly", "x1^"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn failed_check_exits_one_and_names_it() {
    // E(r) = c r^2 cannot decay like r^5
    let o = run(&["decay", "--map", "zonal", "--n", "2", "--k", "1", "--beta", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"bound_holds\":false"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bound holds: false"));
}

#[test]
fn reports_embed_config_version_and_seed() {
    let o = run(&["--seed", "11", "decay", "--map", "random", "--n", "3", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with(&format!("# harmonic-ball {}\n# seed: 11\n# config: ", env!("CARGO_PKG_VERSION"))));
    assert!(s.lines().any(|l| l == "r,E,log_E"));
    assert!(s.lines().last().unwrap().starts_with("# verdict: "));

    let j = run(&["--format", "json", "--seed", "11", "integrate", "--poly", "x1^2", "--n", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["config"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["params"]["domain"], "ball");
    let want = 4.0 * std::f64::consts::PI / 15.0;
    assert!((v["result"]["value"].as_f64().unwrap() - want).abs() < 1e-14 * want);
}

#[test]
fn output_is_independent_of_worker_count() {
    let args = |w: &'static str| ["--workers", w, "--format", "json", "--seed", "5", "identities", "--suite", "quick"];
    let a = run(&args("1"));
    let b = run(&args("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("workers"));
}

#[test]
fn monte_carlo_runs_repeat_exactly() {
    let args = [
        "--seed",
        "7",
        "integrate",
        "--poly",
        "x1^2*x3^4",
        "--domain",
        "sphere",
        "--method",
        "monte-carlo",
        "--samples",
        "200000",
    ];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 3\n\n[volumes]\nn_max = 7\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let s = stdout(&run(&["--config", cfg, "volumes"]));
    assert!(s.contains("# seed: 3"));
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 1 + 7);

    let s = stdout(&run(&["--config", cfg, "--seed", "4", "volumes", "--n-max", "9"]));
    assert!(s.contains("# seed: 4"));
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);

    std::fs::write(dir.path().join("bad.toml"), "[volumes]\nnmax = 7\n").unwrap();
    let o = run(&["--config", dir.path().join("bad.toml").to_str().unwrap(), "volumes"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("bad_decay.toml"), "[decay]\nn = 3\nbogus = 1\n").unwrap();
    let o = run(&["--config", dir.path().join("bad_decay.toml").to_str().unwrap(), "decay"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().env("HARMONIC_BALL_OUT_DIR", dir.path()).args(["volumes", "--n-max", "6"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let body = std::fs::read_to_string(dir.path().join("volumes.csv")).unwrap();
    assert!(body.contains("# verdict: {\"argmax_n\":5}"));

    // an explicit --output wins over the environment
    let file = dir.path().join("sub").join("v.json");
    let o = bin()
        .env("HARMONIC_BALL_OUT_DIR", dir.path())
        .args(["--format", "json", "--output", file.to_str().unwrap(), "volumes", "--n-max", "6"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(Path::new(&file).exists());
    assert!(!dir.path().join("volumes.json").exists());
}

#[test]
fn make_harmonic_text_parses_back_to_a_harmonic_map() {
    for kind in ["identity", "zonal", "random"] {
        let o = run(&["--seed", "9", "make-harmonic", "--map", kind, "--n", "4", "--k", "3"]);
        assert_eq!(o.status.code(), Some(0), "{kind}");
        let body = parse_exact_map(stdout(&o).trim(), 4).unwrap();
        assert!(HarmonicMap::from_map(body, harmonic_ball::harmonics::MapKind::Custom).certified());
    }
}

#[test]
fn mollify_reads_points_and_flags_non_harmonic_input() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "0.1,0.2\n-0.3,0.25\n0.0,0.0\n").unwrap();
    let pts = pts.to_str().unwrap();

    let o = run(&["mollify", "--map", "zonal", "--k", "3", "--h", "0.0078125", "--points", pts]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "x1,x2,u,mollified,error"));
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let o = run(&["mollify", "--map", "poly", "--poly", "x1^2 + x2^2", "--points", pts]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("NOT-A-COUNTEREXAMPLE"));
}
