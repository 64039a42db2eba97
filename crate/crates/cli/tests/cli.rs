use std::path::Path;
use std::process::{Command, Output};

fn banditlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_banditlab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const PRIOR: &str = "point 0.3 0.5 0.5\npoint 0.9 0.5 0.5\n";

#[test]
fn run_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.cfg",
        "run.horizon = 100\nrun.seeds = 0..3\nenv.kind = bernoulli\nenv.means = 0.4 0.6\nagent.kind = ucb1\n",
    );
    let out = dir.path().join("out");
    let o = banditlab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read_to_string(out.join("seed_0.csv")).unwrap();
    assert!(first.starts_with("seed,t,arm,reward,cum_reward,regret\n"));
    assert_eq!(first.lines().count(), 101);
    assert!(out.join("summary.csv").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "run.horizon = 10\nrun.seeds = 0\nenv.kind = nope\nagent.kind = ucb1\n");
    let o = banditlab(&["run", "--config", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("env.kind"));
    assert_eq!(code(&banditlab(&["run", "--config", "/nonexistent/x.cfg"])), 2);
    assert_eq!(code(&banditlab(&["suite", "--name", "nope"])), 2);
    assert_eq!(code(&banditlab(&["frobnicate"])), 2);
}

#[test]
fn suite_passes() {
    let o = banditlab(&["suite", "--name", "incentives"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn verify_bic_pass_and_violation() {
    let dir = tempfile::tempdir().unwrap();
    let prior = write(dir.path(), "prior.txt", PRIOR);
    let ok = banditlab(&["verify-bic", "--prior", &prior, "--n0", "1", "--eps", "0.016", "--T", "4"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("BIC: pass"));
    let bad = banditlab(&["verify-bic", "--prior", &prior, "--n0", "1", "--eps", "0.9", "--T", "4"]);
    assert_eq!(code(&bad), 3);
    let capped = banditlab(&["verify-bic", "--prior", &prior, "--n0", "1", "--eps", "0.016", "--T", "12", "--cap", "10"]);
    assert_eq!(code(&capped), 2);
    let missing = write(dir.path(), "broken.txt", "point 0.3\n");
    assert_eq!(code(&banditlab(&["verify-bic", "--prior", &missing, "--n0", "1", "--eps", "0.01", "--T", "2"])), 2);
}
