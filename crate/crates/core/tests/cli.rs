use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-deploy"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const SMALL: &str = r#"
seed = 4
trials = 20
methods = ["heuristic", "random"]

[scenario]
kind = "one_hotspot"

[system]
Nt = 16
Nr_x = 2
Nr_y = 2
M = 2
K = 2

[geometry]
r = 120.0

[optimizer]
samples = 30
orientation_grid = 72

[sweep]
variable = "power_dbm"
values = [10.0, 20.0]

[phase]
optimize = true
max_iters = 5
"#;

#[test]
fn parse_error_exits_with_two() {
    let cfg = write("broken.toml", "trials = [oops\n");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn unknown_key_is_a_parse_error() {
    let cfg = write("unknown.toml", "[system]\nNt = 8\nbogus = 1\n");
    assert_eq!(run(&["deploy", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_values_exit_with_one() {
    let cfg = write("invalid.toml", "[system]\nNt = 2\nK = 4\n");
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_and_succeeds() {
    let cfg = write("small.toml", SMALL);
    let out = scratch("small.csv");
    let status = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,sweep_variable,sweep_value,sum_rate_bps_hz,std_error,iterations,d0,phi0,h0,phiR,seed");
    assert_eq!(lines.len(), 5);
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let cfg = write("threads.toml", SMALL);
    let a = scratch("threads1.csv");
    let b = scratch("threads4.csv");
    for (out, n) in [(&a, "1"), (&b, "4")] {
        let s = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--parallel", n]).status;
        assert!(s.success());
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn seed_and_trials_flags_override_the_config() {
    let cfg = write("override.toml", SMALL);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "99", "--trials", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",99")));
}

#[test]
fn deploy_writes_a_trace() {
    let cfg = write("deploy.toml", SMALL);
    let out = run(&["deploy", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("method,iteration,objective,served_count,d0,phi0,h0,phiR\n"));
    assert!(text.lines().any(|l| l.starts_with("heuristic,1,")));
    assert!(text.lines().any(|l| l.starts_with("random,0,")));
}

#[test]
fn phase_opt_trace_is_nondecreasing() {
    let cfg = write("phase.toml", SMALL);
    let out = run(&["phase-opt", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rates: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(!rates.is_empty());
    assert!(rates.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn validate_passes_with_a_modest_budget() {
    let out = run(&["validate", "--trials", "20000", "--seed", "3"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}
