use rand::Rng;
use rayon::prelude::*;

use super::heuristic::heuristic_deploy_with_samples;
use super::objective::saa_lower_bound;
use super::{DeploymentResult, GridSettings, Method, OptimizerSettings, UserDistribution};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::geometry::{covered_count, CellGeometry, RisPose, UserLocation};
use crate::numeric::TWO_PI;

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn angle_axis(step: f64) -> Vec<f64> {
    let n = (TWO_PI / step - 1e-9).ceil() as usize;
    (0..n).map(|i| i as f64 * step).collect()
}

/// Every pose of the exhaustive grid, in `(d0, h0, φ0, φR)` lexicographic order.
pub fn grid_points(grid: &GridSettings, geom: &CellGeometry) -> Result<Vec<RisPose>> {
    let d = axis(geom.r_min, geom.r_max, grid.d0_step);
    let h = axis(geom.h_min, geom.h_max, grid.h0_step);
    let p = angle_axis(grid.phi0_step);
    let r = angle_axis(grid.phi_r_step);
    let points = d.len() * h.len() * p.len() * r.len();
    if points > grid.max_points {
        return Err(Error::GridTooLarge { points, budget: grid.max_points });
    }
    let mut out = Vec::with_capacity(points);
    for &d0 in &d {
        for &h0 in &h {
            for &phi0 in &p {
                for &phi_r in &r {
                    out.push(RisPose { d0, phi0, h0, phi_r });
                }
            }
        }
    }
    Ok(out)
}

/// Grid argmax of an arbitrary pose objective. Ties go to the earliest grid point.
pub fn exhaustive_deploy_with<F>(candidates: &[RisPose], evaluator: F) -> Option<(RisPose, f64)>
where
    F: Fn(&RisPose) -> f64 + Sync,
{
    let vals: Vec<f64> = candidates.par_iter().map(&evaluator).collect();
    let mut best: Option<usize> = None;
    for (i, v) in vals.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b| *v > vals[b]) {
            best = Some(i);
        }
    }
    best.map(|i| (candidates[i], vals[i]))
}

/// Exhaustive search of the SAA lower-bound sum-rate over the configured grid.
pub fn exhaustive_deploy<R: Rng + ?Sized>(
    dist: &UserDistribution,
    settings: &OptimizerSettings,
    geom: &CellGeometry,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<DeploymentResult> {
    let samples = dist.sample(settings.samples, rng);
    let candidates = grid_points(&settings.grid, geom)?;
    let (pose, obj) = exhaustive_deploy_with(&candidates, |p| saa_lower_bound(p, &samples, geom, cfg).unwrap_or(f64::NEG_INFINITY))
        .ok_or(Error::DegenerateGeometry("no grid point has a finite objective"))?;
    Ok(DeploymentResult {
        pose,
        objective_trace: vec![obj],
        served_count_trace: vec![covered_count(&pose, &samples, geom)],
        iterations: 1,
        method: Method::Exhaustive,
    })
}

/// Stochastic finite-difference ascent on `(d0, h0)` with grid-searched angles,
/// one fresh snapshot of `K` users per iteration.
pub fn sgd_deploy<R: Rng + ?Sized>(
    dist: &UserDistribution,
    settings: &OptimizerSettings,
    geom: &CellGeometry,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<DeploymentResult> {
    let sgd = &settings.sgd;
    let mut pose = settings
        .initial_pose
        .unwrap_or_else(|| RisPose::new(0.5 * (geom.r_min + geom.r_max), 0.0, 0.5 * (geom.h_min + geom.h_max), 0.0));
    let angles: Vec<f64> = (0..sgd.angle_grid).map(|i| TWO_PI * i as f64 / sgd.angle_grid as f64).collect();
    let pairs: Vec<(f64, f64)> = angles.iter().flat_map(|a| angles.iter().map(move |b| (*a, *b))).collect();
    let d_delta = 1e-3 * geom.r_max;
    let h_delta = 1e-3 * geom.h_max.max(1.0);
    let mut objective_trace = Vec::with_capacity(sgd.iterations);
    let mut served_count_trace = Vec::with_capacity(sgd.iterations);
    for _ in 0..sgd.iterations {
        let sample = dist.sample(cfg.users, rng);
        let f = |p: &RisPose| saa_lower_bound(p, &sample, geom, cfg);
        let cands: Vec<RisPose> = pairs.iter().map(|&(phi0, phi_r)| RisPose { phi0, phi_r, ..pose }).collect();
        if let Some((best, _)) = exhaustive_deploy_with(&cands, |p| f(p).unwrap_or(f64::NEG_INFINITY)) {
            pose = best;
        }
        let central = |lo: RisPose, hi: RisPose, width: f64| -> Result<f64> {
            if width <= 0.0 {
                return Ok(0.0);
            }
            Ok((f(&hi)? - f(&lo)?) / width)
        };
        let (dl, dh) = (geom.clamp_distance(pose.d0 - d_delta), geom.clamp_distance(pose.d0 + d_delta));
        let gd = central(RisPose { d0: dl, ..pose }, RisPose { d0: dh, ..pose }, dh - dl)?;
        let (hl, hh) = (geom.clamp_height(pose.h0 - h_delta), geom.clamp_height(pose.h0 + h_delta));
        let gh = central(RisPose { h0: hl, ..pose }, RisPose { h0: hh, ..pose }, hh - hl)?;
        pose.d0 = geom.clamp_distance(pose.d0 + sgd.step_d0 * gd);
        pose.h0 = geom.clamp_height(pose.h0 + sgd.step_h0 * gh);
        objective_trace.push(f(&pose)?);
        served_count_trace.push(covered_count(&pose, &sample, geom));
    }
    Ok(DeploymentResult { pose, objective_trace, served_count_trace, iterations: sgd.iterations, method: Method::Sgd })
}

/// Uniformly random pose inside the placement box.
pub fn random_deploy<R: Rng + ?Sized>(geom: &CellGeometry, rng: &mut R) -> DeploymentResult {
    let mut uni = |lo: f64, hi: f64| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let d0 = uni(geom.r_min, geom.r_max);
    let h0 = uni(geom.h_min, geom.h_max);
    let phi0 = uni(0.0, TWO_PI);
    let phi_r = uni(0.0, TWO_PI);
    DeploymentResult {
        pose: RisPose::new(d0, phi0, h0, phi_r),
        objective_trace: Vec::new(),
        served_count_trace: Vec::new(),
        iterations: 0,
        method: Method::Random,
    }
}

/// The heuristic fed with a single snapshot of `K` user locations.
pub fn one_sample_deploy<R: Rng + ?Sized>(
    dist: &UserDistribution,
    settings: &OptimizerSettings,
    geom: &CellGeometry,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<DeploymentResult> {
    let samples: Vec<UserLocation> = dist.sample(cfg.users, rng);
    heuristic_deploy_with_samples(&samples, settings, geom, cfg, Method::OneSample)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::objective::saa_lower_bound;
    use crate::deployment::SgdSettings;
    use crate::rng::stream;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn two_point_grid_picks_better() {
        let g = CellGeometry::scaled();
        let cfg = SystemConfig::scaled();
        let s = UserDistribution::one_hotspot(120.0).sample(50, &mut stream(1, &[]));
        let a = RisPose::new(10.0, FRAC_PI_4, 9.0, 0.0);
        let b = RisPose::new(10.0, FRAC_PI_4, 9.0, std::f64::consts::PI);
        let f = |p: &RisPose| saa_lower_bound(p, &s, &g, &cfg).unwrap();
        let (best, v) = exhaustive_deploy_with(&[a, b], f).unwrap();
        assert_eq!(v, f(&a).max(f(&b)));
        assert_eq!(best, if f(&a) >= f(&b) { a } else { b });
    }

    #[test]
    fn grid_budget_enforced() {
        let g = CellGeometry::scaled();
        let grid = GridSettings { max_points: 10, ..GridSettings::default() };
        assert!(matches!(grid_points(&grid, &g), Err(Error::GridTooLarge { .. })));
        let coarse = GridSettings { d0_step: 110.0, h0_step: 9.0, phi0_step: TWO_PI, phi_r_step: TWO_PI, max_points: 10 };
        let pts = grid_points(&coarse, &g).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[3], RisPose { d0: 120.0, h0: 10.0, phi0: 0.0, phi_r: 0.0 });
    }

    #[test]
    fn sgd_zero_iterations_returns_initial() {
        let g = CellGeometry::scaled();
        let cfg = SystemConfig::scaled();
        let init = RisPose::new(30.0, 1.0, 4.0, 2.0);
        let settings = OptimizerSettings { initial_pose: Some(init), sgd: SgdSettings { iterations: 0, ..SgdSettings::default() }, ..Default::default() };
        let r = sgd_deploy(&UserDistribution::one_hotspot(120.0), &settings, &g, &cfg, &mut stream(2, &[])).unwrap();
        assert_eq!(r.pose, init);
    }

    #[test]
    fn sgd_zero_step_moves_only_angles() {
        let g = CellGeometry::scaled();
        let cfg = SystemConfig::scaled();
        let init = RisPose::new(30.0, 1.0, 4.0, 2.0);
        let sgd = SgdSettings { iterations: 5, step_d0: 0.0, step_h0: 0.0, angle_grid: 12 };
        let settings = OptimizerSettings { initial_pose: Some(init), sgd, ..Default::default() };
        let r = sgd_deploy(&UserDistribution::one_hotspot(120.0), &settings, &g, &cfg, &mut stream(3, &[])).unwrap();
        assert_eq!((r.pose.d0, r.pose.h0), (init.d0, init.h0));
        assert_eq!(r.objective_trace.len(), 5);
    }

    #[test]
    fn random_pose_reproducible_and_uniform() {
        let g = CellGeometry::scaled();
        assert_eq!(random_deploy(&g, &mut stream(4, &[])).pose, random_deploy(&g, &mut stream(4, &[])).pose);
        let mut rng = stream(5, &[]);
        let n = 10_000;
        let mean = (0..n).map(|_| random_deploy(&g, &mut rng).pose.d0).sum::<f64>() / n as f64;
        assert!((mean / 65.0 - 1.0).abs() < 0.02);
        let fixed = CellGeometry { r_min: 40.0, r_max: 40.0, ..g };
        assert_eq!(random_deploy(&fixed, &mut rng).pose.d0, 40.0);
    }

    #[test]
    fn exhaustive_dominates_heuristic_on_shared_grid() {
        let g = CellGeometry::scaled();
        let cfg = SystemConfig::scaled();
        let s = UserDistribution::one_hotspot(120.0).sample(60, &mut stream(6, &[]));
        let settings = OptimizerSettings::default();
        let h = heuristic_deploy_with_samples(&s, &settings, &g, &cfg, Method::Heuristic).unwrap();
        let mut cands = grid_points(&GridSettings { d0_step: 20.0, h0_step: 3.0, phi0_step: 0.5, phi_r_step: 0.5, max_points: 1_000_000 }, &g).unwrap();
        cands.push(h.pose);
        let f = |p: &RisPose| saa_lower_bound(p, &s, &g, &cfg).unwrap();
        let (_, best) = exhaustive_deploy_with(&cands, f).unwrap();
        assert!(best >= f(&h.pose));
    }
}
