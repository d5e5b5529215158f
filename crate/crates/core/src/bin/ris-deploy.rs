use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ris_deploy::channel::LinkLayout;
use ris_deploy::error::Error;
use ris_deploy::harness::{self, ExperimentSpec};
use ris_deploy::phase::{optimize_phases, PhaseConfig, PhaseSettings};
use ris_deploy::rng::stream;

#[derive(Parser)]
#[command(name = "ris-deploy", version, about = "RIS placement optimization for wideband mmWave MIMO cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deploy the RIS with every configured method and write the optimization traces.
    Deploy(Common),
    /// Run the full experiment sweep and write the results CSV.
    Sweep(Common),
    /// Run the oracle suite (and check the config, when given).
    Validate(Common),
    /// Optimize phase shifts for one channel draw at the heuristic pose.
    PhaseOpt(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment spec (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overrides the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte-Carlo trials, overrides the spec.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    parallel: Option<usize>,
}

fn load(c: &Common) -> Result<ExperimentSpec, Error> {
    let text = match &c.config {
        Some(p) => fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut spec = harness::parse_config(&text)?;
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    if let Some(t) = c.trials {
        spec.trials = t;
    }
    spec.validate()?;
    Ok(spec)
}

fn write_out(c: &Common, text: &str) -> Result<(), Error> {
    match &c.out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn deploy(c: &Common) -> Result<bool, Error> {
    let spec = load(c)?;
    let spec = harness::apply_sweep(&spec, spec.sweep.values[0])?;
    let mut out = String::from("method,iteration,objective,served_count,d0,phi0,h0,phiR\n");
    for (i, m) in spec.methods.iter().enumerate() {
        let r = harness::deploy_method(&spec, i)?;
        let p = r.pose;
        if r.objective_trace.is_empty() {
            out += &format!("{m},0,,,{:.8e},{:.8e},{:.8e},{:.8e}\n", p.d0, p.phi0, p.h0, p.phi_r);
        }
        for (it, (obj, served)) in r.objective_trace.iter().zip(&r.served_count_trace).enumerate() {
            out += &format!("{m},{},{obj:.8e},{served},{:.8e},{:.8e},{:.8e},{:.8e}\n", it + 1, p.d0, p.phi0, p.h0, p.phi_r);
        }
    }
    write_out(c, &out)?;
    Ok(true)
}

fn sweep(c: &Common) -> Result<bool, Error> {
    let spec = load(c)?;
    let rows = harness::run_experiment(&spec);
    for r in rows.iter().filter(|r| r.failure.is_some()) {
        eprintln!("row {} @ {} failed: {}", r.method, r.sweep_value, r.failure.as_deref().unwrap_or(""));
    }
    write_out(c, &harness::emit_csv_string(&rows))?;
    Ok(rows.iter().all(|r| r.failure.is_none()))
}

fn validate(c: &Common) -> Result<bool, Error> {
    let (trials, seed) = if c.config.is_some() {
        let spec = load(c)?;
        (c.trials.unwrap_or(100_000), spec.seed)
    } else {
        (c.trials.unwrap_or(100_000), c.seed.unwrap_or(0))
    };
    let reports = harness::run_oracle_suite(trials, seed)?;
    let mut out = String::new();
    for r in &reports {
        out += &format!("{} {}: worst {:.3e} (tolerance {:.1e})\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.worst, r.tolerance);
    }
    write_out(c, &out)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn phase_opt(c: &Common) -> Result<bool, Error> {
    let spec = load(c)?;
    let spec = harness::apply_sweep(&spec, spec.sweep.values[0])?;
    let idx = spec.methods.iter().position(|m| *m == ris_deploy::Method::Heuristic).unwrap_or(0);
    let dep = harness::deploy_method(&spec, idx)?;
    let cfg = &spec.system;
    let mut rng = stream(spec.seed, &[2]);
    let users = spec.scenario.sample(cfg.users, &mut rng);
    let real = LinkLayout::new(cfg, &spec.geometry, &dep.pose, &users)?.sample(&mut rng);
    let settings = PhaseSettings { max_iters: spec.phase.max_iters, ..PhaseSettings::default() };
    let init = PhaseConfig::identity(cfg.nr()).with_bits(spec.phase.bits);
    let res = optimize_phases(&real, cfg, &init, &settings)?;
    let mut out = String::from("iteration,sum_rate_bps_hz\n");
    for (i, g) in res.trace.iter().enumerate() {
        out += &format!("{i},{g:.8e}\n");
    }
    if let Some(bits) = spec.phase.bits {
        eprintln!("{bits}-bit quantized sum-rate {:.6}", res.final_rate);
    }
    write_out(c, &out)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Deploy(c) | Command::Sweep(c) | Command::Validate(c) | Command::PhaseOpt(c) => c,
    };
    if let Some(n) = common.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Deploy(c) => deploy(c),
        Command::Sweep(c) => sweep(c),
        Command::Validate(c) => validate(c),
        Command::PhaseOpt(c) => phase_opt(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Parse { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
