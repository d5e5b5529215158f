use crate::channel::{effective_channel, LinkLayout, SystemConfig};
use crate::deployment::{deploy, DeploymentResult, Method};
use crate::error::{Error, Result};
use crate::geometry::RisPose;
use crate::numeric::dbm_to_watts;
use crate::phase::{optimize_phases, PhaseConfig, PhaseSettings};
use crate::rate::{aggregate_trials, zf_rates, RateSummary};
use crate::rng::stream;

use super::config::{ExperimentSpec, SweepVariable};

/// One `(sweep value, method)` outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub sum_rate: f64,
    pub std_error: f64,
    pub iterations: usize,
    pub pose: RisPose,
    pub seed: u64,
    /// Why the row could not be evaluated; its numbers are NaN then.
    pub failure: Option<String>,
}

/// Stream labels: deployment draws use `(seed, 0, method)`, channel trials use
/// `(seed, 1, method, trial)`. The sweep index is deliberately not part of the
/// label so every sweep point sees the same random numbers.
const DEPLOY_STREAM: u64 = 0;
const TRIAL_STREAM: u64 = 1;

/// Apply a sweep value to a copy of the spec.
pub fn apply_sweep(spec: &ExperimentSpec, value: f64) -> Result<ExperimentSpec> {
    let mut s = spec.clone();
    match spec.sweep.variable {
        SweepVariable::PowerDbm => {
            s.power_dbm = value;
            s.system.max_power_w = dbm_to_watts(value);
        }
        SweepVariable::Nr => {
            let n = value as usize;
            let side = (n as f64).sqrt().round() as usize;
            (s.system.nr_x, s.system.nr_y) = if side * side == n { (side, side) } else { (n, 1) };
        }
        SweepVariable::Nt => s.system.nt = value as usize,
        SweepVariable::Users => s.system.users = value as usize,
        SweepVariable::Samples => s.settings.samples = value as usize,
        SweepVariable::D0 | SweepVariable::PhiR => {}
    }
    s.validate()?;
    Ok(s)
}

fn override_pose(spec: &ExperimentSpec, value: f64, pose: RisPose) -> RisPose {
    match spec.sweep.variable {
        SweepVariable::D0 => RisPose { d0: value, ..pose },
        SweepVariable::PhiR => RisPose::new(pose.d0, pose.phi0, pose.h0, value),
        _ => pose,
    }
}

/// Deploy with `method` on the spec's scenario using the spec's seed.
pub fn deploy_method(spec: &ExperimentSpec, method_index: usize) -> Result<DeploymentResult> {
    let method = spec.methods[method_index];
    let mut rng = stream(spec.seed, &[DEPLOY_STREAM, method_index as u64]);
    deploy(method, &spec.scenario, &spec.settings, &spec.geometry, &spec.system, &mut rng)
}

/// Monte-Carlo sum-rate of a pose: each trial draws `K` users from the
/// scenario and one fading realization, optionally optimizes the phases for it,
/// and evaluates ZF rates.
pub fn evaluate_pose(spec: &ExperimentSpec, pose: &RisPose, method_index: usize) -> Result<RateSummary> {
    let cfg: &SystemConfig = &spec.system;
    let phase_settings = PhaseSettings { max_iters: spec.phase.max_iters, ..PhaseSettings::default() };
    aggregate_trials(spec.trials, |t| {
        let mut rng = stream(spec.seed, &[TRIAL_STREAM, method_index as u64, t as u64]);
        let users = spec.scenario.sample(cfg.users, &mut rng);
        let layout = LinkLayout::new(cfg, &spec.geometry, pose, &users)?;
        let real = layout.sample(&mut rng);
        let init = PhaseConfig::identity(cfg.nr()).with_bits(spec.phase.bits);
        let theta = if spec.phase.optimize {
            optimize_phases(&real, cfg, &init, &phase_settings)?.config.theta
        } else {
            init.theta
        };
        zf_rates(&effective_channel(&real, &theta)?, cfg)
    })
}

fn run_row(spec: &ExperimentSpec, value: f64, method_index: usize) -> Result<(RateSummary, DeploymentResult, RisPose)> {
    let s = apply_sweep(spec, value)?;
    let dep = deploy_method(&s, method_index)?;
    let pose = override_pose(&s, value, dep.pose);
    let summary = evaluate_pose(&s, &pose, method_index)?;
    Ok((summary, dep, pose))
}

/// Every sweep value times every method, sweep-major. Failing rows are kept
/// with NaN results and the error message.
pub fn run_experiment(spec: &ExperimentSpec) -> Vec<ResultRow> {
    let mut rows = Vec::with_capacity(spec.sweep.values.len() * spec.methods.len());
    for &value in &spec.sweep.values {
        for (mi, &method) in spec.methods.iter().enumerate() {
            let base = ResultRow {
                method,
                sweep_variable: spec.sweep.variable,
                sweep_value: value,
                sum_rate: f64::NAN,
                std_error: f64::NAN,
                iterations: 0,
                pose: RisPose { d0: f64::NAN, phi0: f64::NAN, h0: f64::NAN, phi_r: f64::NAN },
                seed: spec.seed,
                failure: None,
            };
            rows.push(match run_row(spec, value, mi) {
                Ok((summary, dep, pose)) => ResultRow {
                    sum_rate: summary.sum_rate,
                    std_error: summary.sum_std_error,
                    iterations: dep.iterations,
                    pose,
                    ..base
                },
                Err(e) => ResultRow { failure: Some(e.to_string()), ..base },
            });
        }
    }
    rows
}

/// First failure of a batch of rows, if any.
pub fn first_failure(rows: &[ResultRow]) -> Option<Error> {
    rows.iter().find_map(|r| r.failure.clone().map(Error::Validation))
}
