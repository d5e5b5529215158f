use rand::Rng;
use rayon::prelude::*;

use super::objective::kappa_sum;
use super::{DeploymentResult, Method, OptimizerSettings, UserDistribution};
use crate::channel::SystemConfig;
use crate::error::Result;
use crate::geometry::{coverage_indicator, covered_count, ris_user_distance, CellGeometry, RisPose, UserLocation};
use crate::numeric::{wrap_2pi, TWO_PI};

/// Orientation `φR = 2πi/N` serving the most samples; ties go to the smallest `i`.
pub fn optimize_orientation(pose: &RisPose, samples: &[UserLocation], n: usize, geom: &CellGeometry) -> f64 {
    let counts: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = RisPose { phi_r: TWO_PI * i as f64 / n as f64, ..*pose };
            samples.iter().filter(|u| coverage_indicator(&p, u, geom)).count()
        })
        .collect();
    let mut best = 0;
    for (i, c) in counts.iter().enumerate() {
        if *c > counts[best] {
            best = i;
        }
    }
    TWO_PI * best as f64 / n as f64
}

/// The RIS-side gain decreases with distance from the BS, so the closest allowed point wins.
pub fn optimize_radial_distance(geom: &CellGeometry) -> f64 {
    geom.r_min
}

/// Height sub-problem in Dinkelbach form.
///
/// `F(h) = q1 (d0² + (h - hB)²)^(-α0/2) / (q2 + T (h - hu)²)^(α2/2)` is the
/// ratio being maximized; `value(h) = q1 A(h) - λ B(h)` is the parametric
/// objective for the current `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightObjective {
    pub q1: f64,
    pub q2: f64,
    pub count: f64,
    pub d0: f64,
    pub bs_height: f64,
    pub user_height: f64,
    pub alpha0: f64,
    pub alpha2: f64,
    pub lambda: f64,
}

impl HeightObjective {
    fn a(&self, h: f64) -> f64 {
        (self.d0 * self.d0 + (h - self.bs_height).powi(2)).powf(-self.alpha0 / 2.0)
    }

    fn b(&self, h: f64) -> f64 {
        (self.q2 + self.count * (h - self.user_height).powi(2)).powf(self.alpha2 / 2.0)
    }

    pub fn ratio(&self, h: f64) -> f64 {
        self.q1 * self.a(h) / self.b(h)
    }

    pub fn value(&self, h: f64) -> f64 {
        self.q1 * self.a(h) - self.lambda * self.b(h)
    }

    /// The two terms of `∂value/∂h`; their sum is the derivative.
    pub fn derivative_terms(&self, h: f64) -> (f64, f64) {
        let dh = h - self.bs_height;
        let first = -self.alpha0 * self.q1 * dh * (self.d0 * self.d0 + dh * dh).powf(-self.alpha0 / 2.0 - 1.0);
        let du = h - self.user_height;
        let second = -self.lambda * self.alpha2 * self.count * du * (self.q2 + self.count * du * du).powf(self.alpha2 / 2.0 - 1.0);
        (first, second)
    }

    pub fn derivative(&self, h: f64) -> f64 {
        let (a, b) = self.derivative_terms(h);
        a + b
    }

    /// Root of the derivative in `(hu, hB)` by bisection down to machine precision.
    fn stationary_point(&self) -> f64 {
        let (mut lo, mut hi) = (self.user_height, self.bs_height);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.derivative(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Dinkelbach iterations from `start`; returns the unclamped maximizer and
    /// leaves `lambda` at the value used for the final stationary point.
    pub fn solve(&mut self, start: f64) -> f64 {
        let mut h = start.clamp(self.user_height, self.bs_height);
        for _ in 0..100 {
            self.lambda = self.ratio(h);
            let next = self.stationary_point();
            let done = (next - h).abs() <= 1e-12 * self.bs_height.abs().max(1.0);
            h = next;
            if done {
                break;
            }
        }
        h
    }
}

/// Height objective for the current pose; `d_t^r` come from `pose` as given.
pub fn height_objective(pose: &RisPose, samples: &[UserLocation], geom: &CellGeometry, cfg: &SystemConfig) -> HeightObjective {
    let served = samples.iter().filter(|u| coverage_indicator(pose, u, geom)).count() as f64;
    let q2 = samples.iter().map(|u| ris_user_distance(pose, u).powi(2)).sum();
    HeightObjective {
        q1: cfg.c0 * cfg.c0 * served,
        q2,
        count: samples.len() as f64,
        d0: pose.d0,
        bs_height: geom.bs_height,
        user_height: geom.user_height,
        alpha0: cfg.alpha0,
        alpha2: cfg.alpha2,
        lambda: 0.0,
    }
}

pub fn optimize_height(pose: &RisPose, samples: &[UserLocation], geom: &CellGeometry, cfg: &SystemConfig) -> f64 {
    if samples.is_empty() {
        return pose.h0;
    }
    let mut obj = height_objective(pose, samples, geom, cfg);
    if obj.q1 == 0.0 {
        return geom.clamp_height(geom.user_height);
    }
    geom.clamp_height(obj.solve(pose.h0))
}

/// Coefficients `(a1, a2)` of `y3(φ) = a1 cos φ + a2 sin φ`.
pub fn azimuth_coefficients(pose: &RisPose, samples: &[UserLocation], geom: &CellGeometry, unweighted: bool) -> (f64, f64) {
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    for u in samples {
        if unweighted || coverage_indicator(pose, u, geom) {
            a1 -= 2.0 * pose.d0 * u.dk * u.phik.cos();
            a2 -= 2.0 * pose.d0 * u.dk * u.phik.sin();
        }
    }
    (a1, a2)
}

pub fn azimuth_objective(phi: f64, a1: f64, a2: f64) -> f64 {
    a1 * phi.cos() + a2 * phi.sin()
}

/// Azimuth minimizing the summed squared RIS-user distance of the served samples.
pub fn optimize_azimuth(pose: &RisPose, samples: &[UserLocation], geom: &CellGeometry, unweighted: bool) -> f64 {
    let (a1, a2) = azimuth_coefficients(pose, samples, geom, unweighted);
    if a1 == 0.0 && a2 == 0.0 {
        return 0.0;
    }
    wrap_2pi(a2.atan2(a1) + std::f64::consts::PI)
}

/// Move the RIS to the closed-form azimuth and re-aim the panel there; the
/// move is kept only if it does not lower `Σκ_t`, since a bare azimuth change
/// can turn the BS out of the panel's frontal half-plane.
fn keep_if_not_worse(old: RisPose, new: RisPose, samples: &[UserLocation], geom: &CellGeometry, cfg: &SystemConfig) -> Result<RisPose> {
    let (before, _) = kappa_sum(&old, samples, geom, cfg)?;
    let (after, _) = kappa_sum(&new, samples, geom, cfg)?;
    Ok(if after >= before { new } else { old })
}

/// Grid orientation, taken when it serves more samples or does not lower `Σκ_t`.
fn orientation_step(pose: &RisPose, samples: &[UserLocation], settings: &OptimizerSettings, geom: &CellGeometry, cfg: &SystemConfig) -> Result<RisPose> {
    let cand = RisPose { phi_r: optimize_orientation(pose, samples, settings.orientation_grid, geom), ..*pose };
    if covered_count(&cand, samples, geom) > covered_count(pose, samples, geom) {
        return Ok(cand);
    }
    keep_if_not_worse(*pose, cand, samples, geom, cfg)
}

fn azimuth_step(pose: &RisPose, samples: &[UserLocation], settings: &OptimizerSettings, geom: &CellGeometry, cfg: &SystemConfig) -> Result<RisPose> {
    let phi0 = optimize_azimuth(pose, samples, geom, settings.unweighted_azimuth_sum);
    let mut cand = RisPose { phi0, ..*pose };
    cand.phi_r = optimize_orientation(&cand, samples, settings.orientation_grid, geom);
    keep_if_not_worse(*pose, cand, samples, geom, cfg)
}

pub fn heuristic_deploy<R: Rng + ?Sized>(
    dist: &UserDistribution,
    settings: &OptimizerSettings,
    geom: &CellGeometry,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<DeploymentResult> {
    let samples = dist.sample(settings.samples, rng);
    heuristic_deploy_with_samples(&samples, settings, geom, cfg, Method::Heuristic)
}

/// Coordinate descent on a fixed sample set.
pub fn heuristic_deploy_with_samples(
    samples: &[UserLocation],
    settings: &OptimizerSettings,
    geom: &CellGeometry,
    cfg: &SystemConfig,
    method: Method,
) -> Result<DeploymentResult> {
    let mut pose = settings.start_pose(geom);
    let (mut prev, _) = kappa_sum(&pose, samples, geom, cfg)?;
    let mut objective_trace = Vec::new();
    let mut served_count_trace = Vec::new();
    for _ in 0..settings.max_outer_iters.max(1) {
        pose = orientation_step(&pose, samples, settings, geom, cfg)?;
        pose.d0 = optimize_radial_distance(geom);
        let h0 = optimize_height(&pose, samples, geom, cfg);
        pose = keep_if_not_worse(pose, RisPose { h0, ..pose }, samples, geom, cfg)?;
        pose = azimuth_step(&pose, samples, settings, geom, cfg)?;
        let (obj, served) = kappa_sum(&pose, samples, geom, cfg)?;
        objective_trace.push(obj);
        served_count_trace.push(served);
        let converged = (obj - prev).abs() < settings.tol * prev.abs();
        prev = obj;
        if converged {
            break;
        }
    }
    let iterations = objective_trace.len();
    Ok(DeploymentResult { pose, objective_trace, served_count_trace, iterations, method })
}
