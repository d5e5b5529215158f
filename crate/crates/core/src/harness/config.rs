//! TOML experiment specification.
//!
//! ```toml
//! seed = 7
//! trials = 500
//! methods = ["heuristic", "random"]
//!
//! [scenario]
//! kind = "one_hotspot"        # uniform_disc | one_hotspot | multi_hotspot | custom_centers
//!
//! [system]
//! Nt = 32
//! Nr_x = 4
//! Nr_y = 4
//! M = 4
//! K = 3
//! pmax_dbm = 30.0
//!
//! [geometry]
//! r = 120.0
//!
//! [sweep]
//! variable = "power_dbm"
//! values = [0.0, 10.0, 20.0, 30.0]
//! ```
//!
//! Angles are radians, powers dBm, distances meters. Omitted keys take the
//! full-size defaults (Nt = 128, 10x10 RIS, M = 16, K = 4, 28 GHz carrier,
//! 4 GHz bandwidth, hB = 10 m, hu = 1.5 m, r = 200 m, 30 dBm, -104 dBm noise).

use serde::{Deserialize, Serialize};

use crate::channel::{friis_constant, half_wavelength, SystemConfig};
use crate::deployment::{DistributionKind, GridSettings, Method, OptimizerSettings, SgdSettings, UserDistribution};
use crate::error::{Error, Result};
use crate::geometry::{CellGeometry, RisPose};
use crate::numeric::dbm_to_watts;

/// Parameter varied across the rows of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "power_dbm")]
    PowerDbm,
    #[serde(rename = "nr")]
    Nr,
    #[serde(rename = "nt")]
    Nt,
    #[serde(rename = "users")]
    Users,
    #[serde(rename = "d0")]
    D0,
    #[serde(rename = "phiR")]
    PhiR,
    #[serde(rename = "samples")]
    Samples,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::PowerDbm => "power_dbm",
            SweepVariable::Nr => "nr",
            SweepVariable::Nt => "nt",
            SweepVariable::Users => "users",
            SweepVariable::D0 => "d0",
            SweepVariable::PhiR => "phiR",
            SweepVariable::Samples => "samples",
        }
    }

    fn integral(&self) -> bool {
        matches!(self, SweepVariable::Nr | SweepVariable::Nt | SweepVariable::Users | SweepVariable::Samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Per-realization phase handling during evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpec {
    pub optimize: bool,
    pub bits: Option<u32>,
    pub max_iters: usize,
}

/// Fully-resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: UserDistribution,
    pub system: SystemConfig,
    pub geometry: CellGeometry,
    pub settings: OptimizerSettings,
    pub methods: Vec<Method>,
    pub sweep: Sweep,
    pub phase: PhaseSpec,
    pub trials: usize,
    pub seed: u64,
    /// Transmit power as given in the document; `system.max_power_w` is derived from it.
    pub power_dbm: f64,
    /// Noise power as given in the document; `system.noise_power_w` is derived from it.
    pub noise_dbm: f64,
}

impl ExperimentSpec {
    /// Spec with every default, i.e. the result of parsing an empty document.
    pub fn table_iii() -> Self {
        parse_config("").expect("defaults are valid")
    }

    /// Desk-scale preset: Nt = 32, 4x4 RIS, M = 4, K = 3, r = 120 m, 500 trials.
    pub fn scaled() -> Self {
        parse_config(SCALED_PRESET).expect("preset is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.geometry.validate()?;
        self.settings.validate()?;
        self.scenario.validate()?;
        if self.scenario.cell_radius > self.geometry.radius + 1e-9 {
            return Err(Error::Validation("user distribution exceeds the cell".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Validation("at least one method required".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Validation("sweep values must be nonempty".into()));
        }
        if self.trials < 1 {
            return Err(Error::Validation("trials >= 1 required".into()));
        }
        if self.sweep.variable.integral() && self.sweep.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(Error::Validation(format!("{} sweep values must be positive integers", self.sweep.variable.as_str())));
        }
        if self.phase.bits == Some(0) {
            return Err(Error::Validation("phase bits >= 1 required".into()));
        }
        Ok(())
    }
}

pub const SCALED_PRESET: &str = r#"
trials = 500

[scenario]
kind = "one_hotspot"

[system]
Nt = 32
Nr_x = 4
Nr_y = 4
M = 4
K = 3

[geometry]
r = 120.0
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSpec {
    seed: u64,
    trials: usize,
    methods: Vec<String>,
    scenario: RawScenario,
    system: RawSystem,
    geometry: RawGeometry,
    optimizer: RawOptimizer,
    sweep: RawSweep,
    phase: RawPhase,
}

impl Default for RawSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 500,
            methods: vec!["heuristic".into()],
            scenario: RawScenario::default(),
            system: RawSystem::default(),
            geometry: RawGeometry::default(),
            optimizer: RawOptimizer::default(),
            sweep: RawSweep::default(),
            phase: RawPhase::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawScenario {
    kind: DistributionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<(f64, f64)>>,
    hotspot_radius: f64,
}

impl Default for RawScenario {
    fn default() -> Self {
        Self { kind: DistributionKind::UniformDisc, centers: None, hotspot_radius: crate::deployment::DEFAULT_HOTSPOT_RADIUS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawSystem {
    Nt: usize,
    Nr_x: usize,
    Nr_y: usize,
    M: usize,
    K: usize,
    fc_hz: f64,
    bandwidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_spacing: Option<f64>,
    pmax_dbm: f64,
    sigma2_dbm: f64,
    K0: f64,
    K1: f64,
    K2: f64,
    C0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    C1: Option<f64>,
    alpha0: f64,
    alpha1: f64,
    alpha2: f64,
    los_only: bool,
}

impl Default for RawSystem {
    fn default() -> Self {
        let c = SystemConfig::table_iii();
        Self {
            Nt: c.nt,
            Nr_x: c.nr_x,
            Nr_y: c.nr_y,
            M: c.subcarriers,
            K: c.users,
            fc_hz: c.carrier_hz,
            bandwidth_hz: c.bandwidth_hz,
            d_spacing: None,
            pmax_dbm: 30.0,
            sigma2_dbm: -104.0,
            K0: c.k0,
            K1: c.k1,
            K2: c.k2,
            C0: c.c0,
            C1: None,
            alpha0: c.alpha0,
            alpha1: c.alpha1,
            alpha2: c.alpha2,
            los_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawGeometry {
    r: f64,
    h_B: f64,
    h_u: f64,
    r_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    h_min: f64,
    h_max: f64,
}

impl Default for RawGeometry {
    fn default() -> Self {
        let g = CellGeometry::table_iii();
        Self { r: g.radius, h_B: g.bs_height, h_u: g.user_height, r_min: g.r_min, r_max: None, h_min: g.h_min, h_max: g.h_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawOptimizer {
    samples: usize,
    orientation_grid: usize,
    max_outer_iters: usize,
    tol: f64,
    unweighted_azimuth_sum: bool,
    grid: GridSettings,
    sgd: SgdSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_pose: Option<RisPose>,
}

impl Default for RawOptimizer {
    fn default() -> Self {
        let s = OptimizerSettings::default();
        Self {
            samples: s.samples,
            orientation_grid: s.orientation_grid,
            max_outer_iters: s.max_outer_iters,
            tol: s.tol,
            unweighted_azimuth_sum: s.unweighted_azimuth_sum,
            grid: s.grid,
            sgd: s.sgd,
            initial_pose: s.initial_pose,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSweep {
    variable: SweepVariable,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

impl Default for RawSweep {
    fn default() -> Self {
        Self { variable: SweepVariable::PowerDbm, values: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawPhase {
    optimize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bits: Option<u32>,
    max_iters: usize,
}

impl Default for RawPhase {
    fn default() -> Self {
        Self { optimize: true, bits: None, max_iters: 20 }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Parse a TOML experiment document. Missing keys take defaults.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let spec = from_raw(raw)?;
    spec.validate()?;
    Ok(spec)
}

fn from_raw(raw: RawSpec) -> Result<ExperimentSpec> {
    let s = &raw.system;
    let system = SystemConfig {
        nt: s.Nt,
        nr_x: s.Nr_x,
        nr_y: s.Nr_y,
        subcarriers: s.M,
        users: s.K,
        carrier_hz: s.fc_hz,
        bandwidth_hz: s.bandwidth_hz,
        antenna_spacing: s.d_spacing.unwrap_or_else(|| half_wavelength(s.fc_hz)),
        max_power_w: dbm_to_watts(s.pmax_dbm),
        noise_power_w: dbm_to_watts(s.sigma2_dbm),
        k0: s.K0,
        k1: s.K1,
        k2: s.K2,
        c0: s.C0,
        c1: s.C1.unwrap_or_else(|| friis_constant(s.fc_hz)),
        alpha0: s.alpha0,
        alpha1: s.alpha1,
        alpha2: s.alpha2,
        los_only: s.los_only,
    };
    let g = &raw.geometry;
    let geometry = CellGeometry {
        radius: g.r,
        bs_height: g.h_B,
        user_height: g.h_u,
        r_min: g.r_min,
        r_max: g.r_max.unwrap_or(g.r),
        h_min: g.h_min,
        h_max: g.h_max,
    };
    let sc = &raw.scenario;
    let mut scenario = match sc.kind {
        DistributionKind::UniformDisc => UserDistribution::uniform_disc(g.r),
        DistributionKind::OneHotspot => UserDistribution::one_hotspot(g.r),
        DistributionKind::MultiHotspot => UserDistribution::multi_hotspot(g.r),
        DistributionKind::CustomCenters => UserDistribution::custom(Vec::new(), sc.hotspot_radius, g.r),
    };
    scenario.hotspot_radius = sc.hotspot_radius;
    if let Some(c) = &sc.centers {
        scenario.centers = c.clone();
    }
    let o = &raw.optimizer;
    let settings = OptimizerSettings {
        samples: o.samples,
        orientation_grid: o.orientation_grid,
        max_outer_iters: o.max_outer_iters,
        tol: o.tol,
        unweighted_azimuth_sum: o.unweighted_azimuth_sum,
        grid: o.grid,
        sgd: o.sgd,
        initial_pose: o.initial_pose,
    };
    let methods = raw.methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>()?;
    let sweep = Sweep { variable: raw.sweep.variable, values: raw.sweep.values.clone().unwrap_or_else(|| vec![s.pmax_dbm]) };
    Ok(ExperimentSpec {
        scenario,
        system,
        geometry,
        settings,
        methods,
        sweep,
        phase: PhaseSpec { optimize: raw.phase.optimize, bits: raw.phase.bits, max_iters: raw.phase.max_iters },
        trials: raw.trials,
        seed: raw.seed,
        power_dbm: s.pmax_dbm,
        noise_dbm: s.sigma2_dbm,
    })
}

/// Serialize a spec as a complete TOML document that parses back to the same spec.
pub fn emit_config(spec: &ExperimentSpec) -> String {
    let c = &spec.system;
    let g = &spec.geometry;
    let o = &spec.settings;
    let raw = RawSpec {
        seed: spec.seed,
        trials: spec.trials,
        methods: spec.methods.iter().map(|m| m.as_str().to_string()).collect(),
        scenario: RawScenario {
            kind: spec.scenario.kind,
            centers: Some(spec.scenario.centers.clone()),
            hotspot_radius: spec.scenario.hotspot_radius,
        },
        system: RawSystem {
            Nt: c.nt,
            Nr_x: c.nr_x,
            Nr_y: c.nr_y,
            M: c.subcarriers,
            K: c.users,
            fc_hz: c.carrier_hz,
            bandwidth_hz: c.bandwidth_hz,
            d_spacing: Some(c.antenna_spacing),
            pmax_dbm: spec.power_dbm,
            sigma2_dbm: spec.noise_dbm,
            K0: c.k0,
            K1: c.k1,
            K2: c.k2,
            C0: c.c0,
            C1: Some(c.c1),
            alpha0: c.alpha0,
            alpha1: c.alpha1,
            alpha2: c.alpha2,
            los_only: c.los_only,
        },
        geometry: RawGeometry { r: g.radius, h_B: g.bs_height, h_u: g.user_height, r_min: g.r_min, r_max: Some(g.r_max), h_min: g.h_min, h_max: g.h_max },
        optimizer: RawOptimizer {
            samples: o.samples,
            orientation_grid: o.orientation_grid,
            max_outer_iters: o.max_outer_iters,
            tol: o.tol,
            unweighted_azimuth_sum: o.unweighted_azimuth_sum,
            grid: o.grid,
            sgd: o.sgd,
            initial_pose: o.initial_pose,
        },
        sweep: RawSweep { variable: spec.sweep.variable, values: Some(spec.sweep.values.clone()) },
        phase: RawPhase { optimize: spec.phase.optimize, bits: spec.phase.bits, max_iters: spec.phase.max_iters },
    };
    toml::to_string(&raw).expect("spec serializes")
}
