//! RIS placement optimizers and user-location samplers.
//!
//! The heuristic runs coordinate descent over orientation, distance, height and
//! azimuth on a fixed sample-average approximation (SAA) of the user
//! distribution. Exhaustive grid search, finite-difference SGD, random
//! placement and a one-snapshot variant of the heuristic serve as baselines.

mod baselines;
mod heuristic;
pub mod objective;

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::geometry::{CellGeometry, RisPose, UserLocation};
use crate::numeric::TWO_PI;

pub use objective::{kappa_sum, kappa_sum_bound, radial_objective, saa_lower_bound, sample_kappa};
pub use baselines::{exhaustive_deploy, exhaustive_deploy_with, grid_points, one_sample_deploy, random_deploy, sgd_deploy};
pub use heuristic::{
    azimuth_coefficients, azimuth_objective, heuristic_deploy, heuristic_deploy_with_samples, height_objective, optimize_azimuth,
    optimize_height, optimize_orientation, optimize_radial_distance, HeightObjective,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    UniformDisc,
    OneHotspot,
    MultiHotspot,
    CustomCenters,
}

/// Where users appear in the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDistribution {
    pub kind: DistributionKind,
    /// Hotspot centers as `(distance, azimuth)`; ignored for the uniform disc.
    pub centers: Vec<(f64, f64)>,
    pub hotspot_radius: f64,
    pub cell_radius: f64,
}

pub const DEFAULT_HOTSPOT_RADIUS: f64 = 10.0;

impl UserDistribution {
    pub fn uniform_disc(cell_radius: f64) -> Self {
        Self { kind: DistributionKind::UniformDisc, centers: Vec::new(), hotspot_radius: DEFAULT_HOTSPOT_RADIUS, cell_radius }
    }

    /// Single hotspot centered at `(50 m, π/4)`.
    pub fn one_hotspot(cell_radius: f64) -> Self {
        Self { kind: DistributionKind::OneHotspot, centers: vec![(50.0, FRAC_PI_4)], hotspot_radius: DEFAULT_HOTSPOT_RADIUS, cell_radius }
    }

    /// Four hotspots at `(50, π/4)`, `(100, 3π/4)`, `(50, -3π/4)`, `(100, -π/4)`.
    pub fn multi_hotspot(cell_radius: f64) -> Self {
        let centers = vec![(50.0, FRAC_PI_4), (100.0, 3.0 * FRAC_PI_4), (50.0, -3.0 * FRAC_PI_4), (100.0, -FRAC_PI_4)];
        Self { kind: DistributionKind::MultiHotspot, centers, hotspot_radius: DEFAULT_HOTSPOT_RADIUS, cell_radius }
    }

    pub fn custom(centers: Vec<(f64, f64)>, hotspot_radius: f64, cell_radius: f64) -> Self {
        Self { kind: DistributionKind::CustomCenters, centers, hotspot_radius, cell_radius }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_radius > 0.0) {
            return Err(Error::Validation("cell radius must be positive".into()));
        }
        if self.kind == DistributionKind::UniformDisc {
            return Ok(());
        }
        if self.centers.is_empty() {
            return Err(Error::Validation("hotspot distribution needs at least one center".into()));
        }
        if !(self.hotspot_radius >= 0.0) {
            return Err(Error::Validation("hotspot radius must be nonnegative".into()));
        }
        if self.centers.iter().any(|(d, _)| *d < 0.0 || d + self.hotspot_radius > self.cell_radius + 1e-9) {
            return Err(Error::Validation("hotspot discs must lie inside the cell".into()));
        }
        Ok(())
    }

    /// Draw `t` user locations.
    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Vec<UserLocation> {
        (0..t).map(|_| self.sample_one(rng)).collect()
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> UserLocation {
        let disc = |rng: &mut R, radius: f64| {
            let r = radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..TWO_PI);
            (r * a.cos(), r * a.sin())
        };
        match self.kind {
            DistributionKind::UniformDisc => {
                let (x, y) = disc(rng, self.cell_radius);
                UserLocation::from_cartesian(x, y)
            }
            _ => {
                let (cd, ca) = self.centers[rng.random_range(0..self.centers.len())];
                let (dx, dy) = disc(rng, self.hotspot_radius);
                UserLocation::from_cartesian(cd * ca.cos() + dx, cd * ca.sin() + dy)
            }
        }
    }
}

pub fn sample_user_locations<R: Rng + ?Sized>(dist: &UserDistribution, t: usize, rng: &mut R) -> Vec<UserLocation> {
    dist.sample(t, rng)
}

/// Deployment strategy tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Heuristic,
    Exhaustive,
    Sgd,
    Random,
    OneSample,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Heuristic, Method::Exhaustive, Method::Sgd, Method::Random, Method::OneSample];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::Exhaustive => "exhaustive",
            Method::Sgd => "sgd",
            Method::Random => "random",
            Method::OneSample => "one_sample",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown method `{s}`")))
    }
}

/// Step sizes of the exhaustive 4-D grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    pub d0_step: f64,
    pub h0_step: f64,
    pub phi0_step: f64,
    pub phi_r_step: f64,
    /// Refuse grids with more points than this.
    pub max_points: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { d0_step: 10.0, h0_step: 1.0, phi0_step: PI / 18.0, phi_r_step: PI / 18.0, max_points: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdSettings {
    pub iterations: usize,
    /// Gradient step for `d0` (m per unit gradient).
    pub step_d0: f64,
    /// Gradient step for `h0` (m per unit gradient).
    pub step_h0: f64,
    /// Points per axis of the `(φ0, φR)` grid searched every iteration.
    pub angle_grid: usize,
}

impl Default for SgdSettings {
    fn default() -> Self {
        Self { iterations: 200, step_d0: 1.0, step_h0: 1.0, angle_grid: 36 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    /// SAA sample size T.
    pub samples: usize,
    /// Orientation grid size N.
    pub orientation_grid: usize,
    pub max_outer_iters: usize,
    /// Relative convergence tolerance on `Σκ_t`.
    pub tol: f64,
    /// Drop the coverage weights in the azimuth step.
    pub unweighted_azimuth_sum: bool,
    pub grid: GridSettings,
    pub sgd: SgdSettings,
    pub initial_pose: Option<RisPose>,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            samples: 100,
            orientation_grid: 360,
            max_outer_iters: 20,
            tol: 1e-6,
            unweighted_azimuth_sum: false,
            grid: GridSettings::default(),
            sgd: SgdSettings::default(),
            initial_pose: None,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Validation("T >= 1 required".into()));
        }
        if self.orientation_grid < 4 {
            return Err(Error::Validation("orientation grid needs at least 4 points".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation("tol > 0 required".into()));
        }
        let g = &self.grid;
        if [g.d0_step, g.h0_step, g.phi0_step, g.phi_r_step].iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Validation("grid steps must be positive".into()));
        }
        if self.sgd.angle_grid < 1 || !(self.sgd.step_d0 >= 0.0 && self.sgd.step_h0 >= 0.0) {
            return Err(Error::Validation("SGD needs a nonempty angle grid and nonnegative steps".into()));
        }
        Ok(())
    }

    fn start_pose(&self, geom: &CellGeometry) -> RisPose {
        self.initial_pose.unwrap_or_else(|| RisPose::new(geom.r_min, 0.0, geom.h_max, 0.0))
    }
}

/// Outcome of a placement run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentResult {
    pub pose: RisPose,
    /// Objective after every iteration (`Σκ_t` for the heuristic, the SAA
    /// lower-bound sum-rate for grid and SGD searches).
    pub objective_trace: Vec<f64>,
    /// Served samples `T′` after every iteration.
    pub served_count_trace: Vec<usize>,
    pub iterations: usize,
    pub method: Method,
}

/// Run any of the placement strategies.
pub fn deploy<R: Rng + ?Sized>(
    method: Method,
    dist: &UserDistribution,
    settings: &OptimizerSettings,
    geom: &CellGeometry,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<DeploymentResult> {
    match method {
        Method::Heuristic => heuristic_deploy(dist, settings, geom, cfg, rng),
        Method::Exhaustive => exhaustive_deploy(dist, settings, geom, cfg, rng),
        Method::Sgd => sgd_deploy(dist, settings, geom, cfg, rng),
        Method::Random => Ok(random_deploy(geom, rng)),
        Method::OneSample => one_sample_deploy(dist, settings, geom, cfg, rng),
    }
}
