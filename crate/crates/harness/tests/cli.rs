use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conebessel"));
    c.env_remove("CONEBESSEL_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn write_identity(dir: &Path, name: &str, q: usize) -> String {
    let mut text = format!("{q} 1\n");
    for i in 0..q {
        for j in 0..q {
            text.push_str(if i == j { "1\n" } else { "0\n" });
        }
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn eval_bessel_at_zero_is_one() {
    let out = run(&["eval-bessel", "--q", "2", "--d", "2", "--mu", "4"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["estimates"], 1.0);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["workers"], 1);
    assert_eq!(v["params"]["q"], 2);
    assert!(v["version"].is_string());
}

#[test]
fn eval_bessel_rank_one_matches_sine() {
    // q = 1, d = 1, μ = 3/2: 𝒥(x²/4) = sin x / x.
    let x = 2.0f64;
    let arg = format!("{}", x * x / 4.0);
    let out = run(&["eval-bessel", "--q", "1", "--d", "1", "--mu", "1.5", "--eigenvalues", &arg, "--tol", "1e-14"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout)["estimates"].as_f64().unwrap();
    assert!((v - x.sin() / x).abs() < 1e-12);
}

#[test]
fn conv_csv_records_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let r = write_identity(dir.path(), "r.txt", 2);
    let csv = dir.path().join("out.csv");
    let report = dir.path().join("report.json");
    let out = run(&[
        "conv", "--q", "2", "--d", "1", "--mu", "3", "--r", &r, "--s", &r, "--n", "2000", "--seed", "11",
        "--output", csv.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let first = text.lines().next().unwrap();
    for key in ["q=2", "d=1", "mu=3", "seed=11", "version="] {
        assert!(first.contains(key), "{first}");
    }
    assert_eq!(text.lines().count(), 2 + 2000);
    let v = json(&std::fs::read(&report).unwrap());
    assert_eq!(v["verdicts"]["norm_bound"], true);
    assert_eq!(v["seed"], 11);
}

#[test]
fn output_is_reproducible_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let r = write_identity(dir.path(), "r.txt", 2);
    let once = |workers: &str| {
        run(&["conv", "--q", "2", "--d", "2", "--mu", "4", "--r", &r, "--s", &r, "--n", "3000", "--workers", workers])
            .stdout
    };
    let a = once("1");
    assert!(!a.is_empty());
    assert_eq!(a, once("1"));
    assert_eq!(a, once("3"));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let r = write_identity(dir.path(), "r.txt", 1);
    let args = ["conv", "--q", "1", "--d", "1", "--mu", "2", "--r", &r, "--s", &r, "--n", "10"];
    let with_env = bin().args(args).env("CONEBESSEL_SEED", "99").output().unwrap();
    assert!(String::from_utf8_lossy(&with_env.stdout).starts_with("# q=1,d=1,mu=2,seed=99,"));
    let flag_wins = bin().args(args).args(["--seed", "5"]).env("CONEBESSEL_SEED", "99").output().unwrap();
    assert!(String::from_utf8_lossy(&flag_wins.stdout).contains("seed=5,"));
    let default = run(&args);
    assert!(String::from_utf8_lossy(&default.stdout).contains("seed=7,"));
}

#[test]
fn mu_below_hypergroup_range_is_rejected() {
    let out = run(&["conv", "--q", "2", "--d", "1", "--mu", "1.5", "--r", "x", "--s", "x"]);
    assert_eq!(out.status.code(), Some(1));
    let err = json(&out.stderr);
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("rho - 1"));
}

#[test]
fn wishart_accepts_mu_below_hypergroup_range() {
    // μ = 1.5 > (d/2)(q − 1) = 0.5 is a valid Wishart shape though not a hypergroup.
    let out = run(&["wishart", "--q", "2", "--d", "1", "--mu", "1.5", "--n", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unsupported_field_is_rejected() {
    let out = run(&["eval-bessel", "--q", "2", "--d", "4", "--mu", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out.stderr)["message"].as_str().unwrap().contains("unsupported field"));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(run(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    let missing = run(&["conv", "--q", "1", "--d", "1", "--mu", "2", "--r", "/nonexistent", "--s", "/nonexistent"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(json(&missing.stderr)["message"].as_str().unwrap().contains("/nonexistent"));
}

#[test]
fn config_file_with_defaults_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# minimal\ncommand = eval-bessel\nq = 1\nd = 1\nmu = 2\n").unwrap();
    let loaded = conebessel_cli::load_config(&cfg).unwrap();
    assert_eq!(loaded.n_samples, 100_000);
    assert_eq!(loaded.tol, 1e-8);
    assert_eq!(loaded.workers, 1);

    let out = run(&["--config", cfg.to_str().unwrap(), "--seed", "3"]);
    assert!(out.status.success());
    assert_eq!(json(&out.stdout)["seed"], 3);

    // Flags beat the file.
    let out = run(&["--config", cfg.to_str().unwrap(), "--d", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "command = conv\nq = 2\nd = 1\nmu = 1.0\n").unwrap();
    let err = conebessel_cli::load_config(&cfg).unwrap_err().to_string();
    assert!(err.contains("bad.cfg:4") && err.contains("rho - 1"), "{err}");
    std::fs::write(&cfg, "command = conv\nq = two\n").unwrap();
    let err = conebessel_cli::load_config(&cfg).unwrap_err().to_string();
    assert!(err.contains("bad.cfg:2"), "{err}");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert!(conebessel_cli::load_config(&cfg).is_err());
}

#[test]
fn check_at_rank_one_on_cheap_criteria() {
    let out = run(&["check", "--q", "1", "--d", "1", "--mu", "2", "--criteria", "1,2,8,12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    assert_eq!(v["details"]["passed"], true);
    let lines = String::from_utf8_lossy(&out.stderr);
    assert_eq!(lines.lines().filter(|l| l.starts_with("[PASS]")).count(), 4);
}

#[test]
fn check_rejects_unknown_criterion() {
    assert_eq!(run(&["check", "--criteria", "18"]).status.code(), Some(1));
}
