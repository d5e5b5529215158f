//! Runtime oracle checks: Monte Carlo against the covariance model, dense
//! inverses against Sherman-Morrison, and a dense grid against the azimuth
//! closed form.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{cn01, LinkLayout, SystemConfig, C64};
use crate::deployment::{azimuth_coefficients, azimuth_objective, optimize_azimuth, optimize_orientation};
use crate::error::Result;
use crate::geometry::{CellGeometry, RisPose, UserLocation};
use crate::numeric::{compensated_sum, wrap_pi, TWO_PI};
use crate::rate::{covariance_entry, sigma_hat_inv_entry, ClosedFormContext};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error in the check's own units.
    pub worst: f64,
    pub tolerance: f64,
}

/// Scaled cell with three users spread in angle and away from the RIS azimuth,
/// panel orientation chosen to serve all of them.
pub fn separated_layout(cfg: &SystemConfig) -> Result<LinkLayout> {
    let geom = CellGeometry::scaled();
    let users = [UserLocation::new(50.0, 0.9), UserLocation::new(70.0, 1.7), UserLocation::new(60.0, 2.6)];
    let mut pose = RisPose::new(10.0, 0.0, 9.0, 0.0);
    pose.phi_r = optimize_orientation(&pose, &users, 360, &geom);
    LinkLayout::new(cfg, &geom, &pose, &users[..cfg.users.min(3)])
}

/// Mean of `‖h_k^eff‖²` per `(k, m)` against the covariance model.
pub fn lemma1_check(trials: usize, seed: u64) -> Result<CheckReport> {
    let cfg = SystemConfig::scaled();
    let layout = separated_layout(&cfg)?;
    let mut prng = stream(seed, &[u64::MAX]);
    let theta: Vec<C64> = (0..cfg.nr()).map(|_| C64::from_polar(1.0, prng.random_range(0.0..TWO_PI))).collect();
    let (k_users, big_m) = (layout.users(), cfg.subcarriers);
    let draws: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let real = layout.sample(&mut stream(seed, &[t as u64]));
            (0..k_users).flat_map(|k| (0..big_m).map(move |m| (k, m))).map(|(k, m)| real.effective_vector(k, m, &theta).norm_squared()).collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for k in 0..k_users {
        for m in 0..big_m {
            let mc = compensated_sum(draws.iter().map(|d| d[k * big_m + m])) / trials as f64;
            let model = covariance_entry(k, k, m, &layout, &theta).re;
            worst = worst.max((mc - model).abs() / model);
        }
    }
    Ok(CheckReport { name: "covariance model vs Monte Carlo", passed: worst <= 0.02, worst, tolerance: 0.02 })
}

/// Sherman-Morrison diagonal against a dense inverse on random instances.
pub fn lemma2_check(instances: usize, seed: u64) -> CheckReport {
    let mut rng = stream(seed, &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let k = rng.random_range(1..=5);
        let kappa: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..5.0)).collect();
        let xi = vec![(0..k).map(|_| cn01(&mut rng) * 3.0).collect::<Vec<_>>()];
        let ctx = ClosedFormContext::from_parts(kappa, rng.random_range(0.0..3.0), xi, 1.0);
        let inv: DMatrix<C64> = ctx.sigma_hat[0].clone().try_inverse().expect("positive definite");
        for i in 0..k {
            let scale = inv[(i, i)].re.abs().max(1.0);
            worst = worst.max((sigma_hat_inv_entry(i, 0, &ctx) - inv[(i, i)].re).abs() / scale);
        }
    }
    CheckReport { name: "Sherman-Morrison vs dense inverse", passed: worst <= 1e-10, worst, tolerance: 1e-10 }
}

/// Closed-form azimuth against a dense grid argmin, error in grid steps.
pub fn azimuth_check(sets: usize, grid: usize, seed: u64) -> CheckReport {
    let geom = CellGeometry::scaled();
    let step = TWO_PI / grid as f64;
    let worst = (0..sets)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, &[s as u64]);
            let pose = RisPose::new(10.0, rng.random_range(0.0..TWO_PI), 5.0, rng.random_range(0.0..TWO_PI));
            let n = rng.random_range(1..40);
            let samples: Vec<UserLocation> =
                (0..n).map(|_| UserLocation::new(rng.random_range(1.0..120.0), rng.random_range(0.0..TWO_PI))).collect();
            let (a1, a2) = azimuth_coefficients(&pose, &samples, &geom, true);
            let phi = optimize_azimuth(&pose, &samples, &geom, true);
            let best = (0..grid)
                .map(|i| i as f64 * step)
                .min_by(|x, y| azimuth_objective(*x, a1, a2).total_cmp(&azimuth_objective(*y, a1, a2)))
                .unwrap_or(0.0);
            wrap_pi(phi - best).abs() / step
        })
        .reduce(|| 0.0, f64::max);
    CheckReport { name: "azimuth closed form vs grid", passed: worst <= 1.0, worst, tolerance: 1.0 }
}

/// All checks with the given Monte-Carlo budget.
pub fn run_oracle_suite(trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![lemma1_check(trials, seed)?, lemma2_check(100, seed), azimuth_check(1000, 100_000, seed)])
}
