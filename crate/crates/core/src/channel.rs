//! Wideband Rician channel model.
//!
//! Per subcarrier `m` the BS-RIS channel `G_m` (Nt x Nr), the direct channels
//! `d_{k,m}` (Nt) and the RIS-user channels `h_{k,m}` (Nr) are a Rician mix of a
//! deterministic line-of-sight part and i.i.d. CN(0,1) scattering:
//!
//! `G = sqrt(β0 K0/(K0+1)) Ḡ + sqrt(β0/(K0+1)) G̃`, likewise for `d` and `h`.
//!
//! Line-of-sight parts have unit-modulus entries (`Ḡ = sqrt(Nt Nr) b aᴴ`,
//! `d̄ = sqrt(Nt) b`, `h̄ = sqrt(Nr) a` with unit-norm steering vectors `a`, `b`),
//! so LoS and scattered components carry the same average power per antenna
//! element.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::geometry::{bs_ris_angles, coverage_indicator, link_angles, CellGeometry, RisPose, UserLocation};

pub type C64 = Complex64;

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Link-level system parameters. Powers are linear watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// BS antennas.
    pub nt: usize,
    /// RIS elements along x.
    pub nr_x: usize,
    /// RIS elements along y.
    pub nr_y: usize,
    /// Number of subcarriers M.
    pub subcarriers: usize,
    /// Number of simultaneously served users K.
    pub users: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Element spacing of both arrays (m).
    pub antenna_spacing: f64,
    /// Total transmit power (W).
    pub max_power_w: f64,
    /// Noise power per subcarrier (W).
    pub noise_power_w: f64,
    /// Rician factor of the BS-RIS link.
    pub k0: f64,
    /// Rician factor of the BS-user links.
    pub k1: f64,
    /// Rician factor of the RIS-user links.
    pub k2: f64,
    /// Reference gain of the BS-RIS and RIS-user links.
    pub c0: f64,
    /// Reference gain of the BS-user links.
    pub c1: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Drop all scattered components (infinite Rician factors).
    pub los_only: bool,
}

impl SystemConfig {
    /// Full-size parameters: Nt = 128, 10x10 RIS, M = 16, K = 4, 28 GHz, 4 GHz,
    /// 30 dBm transmit power, -104 dBm noise.
    pub fn table_iii() -> Self {
        let fc = 28e9;
        Self {
            nt: 128,
            nr_x: 10,
            nr_y: 10,
            subcarriers: 16,
            users: 4,
            carrier_hz: fc,
            bandwidth_hz: 4e9,
            antenna_spacing: half_wavelength(fc),
            max_power_w: crate::numeric::dbm_to_watts(30.0),
            noise_power_w: crate::numeric::dbm_to_watts(-104.0),
            k0: 15.0,
            k1: 10.0,
            k2: 15.0,
            c0: 1e-3,
            c1: friis_constant(fc),
            alpha0: 2.2,
            alpha1: 4.0,
            alpha2: 2.8,
            los_only: false,
        }
    }

    /// Desk-scale parameters: Nt = 32, 4x4 RIS, M = 4, K = 3.
    pub fn scaled() -> Self {
        Self { nt: 32, nr_x: 4, nr_y: 4, subcarriers: 4, users: 3, ..Self::table_iii() }
    }

    pub fn nr(&self) -> usize {
        self.nr_x * self.nr_y
    }

    /// Equal power split over users and subcarriers.
    pub fn power_per_stream(&self) -> f64 {
        self.max_power_w / (self.users * self.subcarriers) as f64
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(m.to_string()));
        if self.users < 1 {
            return bad("K >= 1 required");
        }
        if self.nt <= self.users {
            return bad("Nt > K required");
        }
        if self.nr_x < 1 || self.nr_y < 1 {
            return bad("RIS needs at least one element per axis");
        }
        if self.subcarriers < 1 {
            return bad("M >= 1 required");
        }
        let positive = [self.carrier_hz, self.bandwidth_hz, self.antenna_spacing, self.max_power_w, self.noise_power_w, self.c0, self.c1];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return bad("frequencies, spacing, powers and reference gains must be positive");
        }
        if [self.k0, self.k1, self.k2].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("Rician factors must be nonnegative");
        }
        if [self.alpha0, self.alpha1, self.alpha2].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("path-loss exponents must be nonnegative");
        }
        if self.bandwidth_hz >= 2.0 * self.carrier_hz {
            return bad("bandwidth must keep every subcarrier frequency positive");
        }
        Ok(())
    }

    /// LoS and scattered amplitude weights for a Rician factor.
    pub fn rician_weights(&self, k: f64) -> (f64, f64) {
        if self.los_only {
            (1.0, 0.0)
        } else {
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        }
    }
}

pub fn half_wavelength(fc: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * fc)
}

/// Free-space reference gain `λ²/(16π²)` at carrier `fc`.
pub fn friis_constant(fc: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / fc;
    lambda * lambda / (16.0 * PI * PI)
}

/// Frequency of subcarrier `m` (1-based).
pub fn subcarrier_frequency(m: usize, cfg: &SystemConfig) -> Result<f64> {
    let big_m = cfg.subcarriers;
    if m < 1 || m > big_m {
        return Err(Error::IndexOutOfRange { index: m, len: big_m });
    }
    let offset = (m - 1) as f64 - (big_m - 1) as f64 / 2.0;
    Ok(cfg.carrier_hz + cfg.bandwidth_hz / big_m as f64 * offset)
}

/// All subcarrier frequencies, 0-based storage order.
pub fn subcarrier_frequencies(cfg: &SystemConfig) -> Vec<f64> {
    (1..=cfg.subcarriers).map(|m| subcarrier_frequency(m, cfg).expect("in range")).collect()
}

pub fn spatial_direction(f: f64, angle: f64, cfg: &SystemConfig) -> f64 {
    f / SPEED_OF_LIGHT * cfg.antenna_spacing * angle.sin()
}

/// Unit-norm ULA response, entry `n` is `exp(j 2π n ϑ)/sqrt(N)`.
pub fn steering_ula(n: usize, dir: f64) -> DVector<C64> {
    let s = 1.0 / (n as f64).sqrt();
    DVector::from_fn(n, |i, _| C64::from_polar(s, 2.0 * PI * i as f64 * dir))
}

/// Unit-norm UPA response, element `(ix, iy)` stored at `ix * ny + iy`.
pub fn steering_upa(nx: usize, ny: usize, dir_a: f64, dir_e: f64) -> DVector<C64> {
    let s = 1.0 / ((nx * ny) as f64).sqrt();
    DVector::from_fn(nx * ny, |i, _| {
        let (ix, iy) = (i / ny, i % ny);
        C64::from_polar(s, 2.0 * PI * (ix as f64 * dir_a + iy as f64 * dir_e))
    })
}

/// Which link a path-loss evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    /// Horizontal distance `d0` and RIS height `h0`.
    BsRis { d0: f64, h0: f64 },
    /// Horizontal BS-user distance.
    BsUser { dk: f64 },
    /// Horizontal RIS-user distance and RIS height.
    RisUser { dr: f64, h0: f64 },
}

/// Large-scale gain of a link (linear).
pub fn path_loss(link: Link, geom: &CellGeometry, cfg: &SystemConfig) -> Result<f64> {
    let (dist, c, alpha) = match link {
        Link::BsRis { d0, h0 } => ((d0 * d0 + (h0 - geom.bs_height).powi(2)).sqrt(), cfg.c0, cfg.alpha0),
        Link::BsUser { dk } => (dk, cfg.c1, cfg.alpha1),
        Link::RisUser { dr, h0 } => ((dr * dr + (h0 - geom.user_height).powi(2)).sqrt(), cfg.c0, cfg.alpha2),
    };
    if !(dist > 0.0) {
        return Err(Error::DegenerateGeometry("zero link distance"));
    }
    Ok(c * dist.powf(-alpha))
}

/// Large-scale gains `β0`, `β1,k`, `β2,k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleGains {
    pub bs_ris: f64,
    pub bs_user: Vec<f64>,
    /// Zero for users the RIS does not serve.
    pub ris_user: Vec<f64>,
}

/// Deterministic part of the channel for a fixed pose and user drop: coverage,
/// large-scale gains and unit-norm LoS steering vectors per subcarrier.
#[derive(Debug, Clone)]
pub struct LinkLayout {
    pub cfg: SystemConfig,
    pub omega: Vec<bool>,
    pub gains: LargeScaleGains,
    /// `b(φ0, m)`, BS side of the BS-RIS link, per subcarrier.
    pub bs_ris_tx: Vec<DVector<C64>>,
    /// `a(θ0, m)`, RIS side of the BS-RIS link, per subcarrier.
    pub bs_ris_rx: Vec<DVector<C64>>,
    /// `b(φk, m)` indexed `[k][m]`.
    pub bs_user: Vec<Vec<DVector<C64>>>,
    /// `a(θ2k, m)` indexed `[k][m]`; zero vectors for unserved users.
    pub ris_user: Vec<Vec<DVector<C64>>>,
}

impl LinkLayout {
    pub fn new(cfg: &SystemConfig, geom: &CellGeometry, pose: &RisPose, users: &[UserLocation]) -> Result<Self> {
        let nt = cfg.nt;
        let (nx, ny) = (cfg.nr_x, cfg.nr_y);
        let freqs = subcarrier_frequencies(cfg);
        let dir = |f: f64, angle: f64| spatial_direction(f, angle, cfg);

        let (az0, el0) = bs_ris_angles(pose, geom)?;
        let bs_ris_tx = freqs.iter().map(|&f| steering_ula(nt, dir(f, pose.phi0))).collect();
        let bs_ris_rx = freqs.iter().map(|&f| steering_upa(nx, ny, dir(f, az0), dir(f, el0))).collect();
        let beta0 = path_loss(Link::BsRis { d0: pose.d0, h0: pose.h0 }, geom, cfg)?;

        let mut omega = Vec::with_capacity(users.len());
        let mut bs_user = Vec::with_capacity(users.len());
        let mut ris_user = Vec::with_capacity(users.len());
        let mut beta1 = Vec::with_capacity(users.len());
        let mut beta2 = Vec::with_capacity(users.len());
        for u in users {
            beta1.push(path_loss(Link::BsUser { dk: u.dk }, geom, cfg)?);
            bs_user.push(freqs.iter().map(|&f| steering_ula(nt, dir(f, u.phik))).collect());
            let served = coverage_indicator(pose, u, geom);
            if served {
                let a = link_angles(pose, u, geom)?;
                beta2.push(path_loss(Link::RisUser { dr: a.ris_user_distance, h0: pose.h0 }, geom, cfg)?);
                ris_user.push(
                    freqs
                        .iter()
                        .map(|&f| steering_upa(nx, ny, dir(f, a.ris_user_azimuth), dir(f, a.ris_user_elevation)))
                        .collect(),
                );
            } else {
                beta2.push(0.0);
                ris_user.push(vec![DVector::zeros(nx * ny); freqs.len()]);
            }
            omega.push(served);
        }
        Ok(Self {
            cfg: cfg.clone(),
            omega,
            gains: LargeScaleGains { bs_ris: beta0, bs_user: beta1, ris_user: beta2 },
            bs_ris_tx,
            bs_ris_rx,
            bs_user,
            ris_user,
        })
    }

    pub fn users(&self) -> usize {
        self.omega.len()
    }

    pub fn omega_f64(&self, k: usize) -> f64 {
        if self.omega[k] {
            1.0
        } else {
            0.0
        }
    }

    /// `a(θ0,m)ᴴ diag(θ) a(θ2k,m)` with unit-norm responses.
    pub fn cascade_alignment(&self, k: usize, m: usize, theta: &[C64]) -> C64 {
        let a0 = &self.bs_ris_rx[m];
        let a2 = &self.ris_user[k][m];
        a0.iter().zip(theta).zip(a2.iter()).map(|((x, t), y)| x.conj() * t * y).sum()
    }

    /// Draw one small-scale fading realization.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let cfg = &self.cfg;
        let (nt, nr) = (cfg.nt, cfg.nr());
        let big_m = cfg.subcarriers;
        let (w0l, w0n) = cfg.rician_weights(cfg.k0);
        let (w1l, w1n) = cfg.rician_weights(cfg.k1);
        let (w2l, w2n) = cfg.rician_weights(cfg.k2);
        let sb0 = self.gains.bs_ris.sqrt();

        let g = (0..big_m)
            .map(|m| {
                let los_scale = sb0 * w0l * ((nt * nr) as f64).sqrt();
                let b = &self.bs_ris_tx[m];
                let a = &self.bs_ris_rx[m];
                DMatrix::from_fn(nt, nr, |i, j| los_scale * b[i] * a[j].conj() + sb0 * w0n * cn01(rng))
            })
            .collect();
        let mut d = Vec::with_capacity(self.users());
        let mut h = Vec::with_capacity(self.users());
        for k in 0..self.users() {
            let sb1 = self.gains.bs_user[k].sqrt();
            let sb2 = self.gains.ris_user[k].sqrt();
            d.push(
                (0..big_m)
                    .map(|m| {
                        let b = &self.bs_user[k][m];
                        let s = sb1 * w1l * (nt as f64).sqrt();
                        DVector::from_fn(nt, |i, _| s * b[i] + sb1 * w1n * cn01(rng))
                    })
                    .collect(),
            );
            h.push(
                (0..big_m)
                    .map(|m| {
                        let a = &self.ris_user[k][m];
                        let s = sb2 * w2l * (nr as f64).sqrt();
                        DVector::from_fn(nr, |i, _| s * a[i] + sb2 * w2n * cn01(rng))
                    })
                    .collect(),
            );
        }
        ChannelRealization { g, d, h, gains: self.gains.clone(), omega: self.omega.clone() }
    }
}

/// Standard circularly-symmetric complex Gaussian sample.
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// One draw of every channel in the cell.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `G_m`, Nt x Nr.
    pub g: Vec<DMatrix<C64>>,
    /// `d_{k,m}` indexed `[k][m]`.
    pub d: Vec<Vec<DVector<C64>>>,
    /// `h_{k,m}` indexed `[k][m]`.
    pub h: Vec<Vec<DVector<C64>>>,
    pub gains: LargeScaleGains,
    pub omega: Vec<bool>,
}

impl ChannelRealization {
    pub fn users(&self) -> usize {
        self.d.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.g.len()
    }

    pub fn nr(&self) -> usize {
        self.g.first().map_or(0, |g| g.ncols())
    }

    /// Effective channel `d + ω G diag(θ) h` of user `k` on subcarrier `m` (column vector).
    pub fn effective_vector(&self, k: usize, m: usize, theta: &[C64]) -> DVector<C64> {
        let mut v = self.d[k][m].clone();
        if self.omega[k] {
            let reflected = DVector::from_iterator(theta.len(), theta.iter().zip(self.h[k][m].iter()).map(|(t, x)| t * x));
            v += &self.g[m] * reflected;
        }
        v
    }
}

/// Sample a realization directly from pose and users.
pub fn sample_channel_realization<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    geom: &CellGeometry,
    pose: &RisPose,
    users: &[UserLocation],
    rng: &mut R,
) -> Result<ChannelRealization> {
    Ok(LinkLayout::new(cfg, geom, pose, users)?.sample(rng))
}

/// Per-subcarrier K x Nt effective channels, row `k` is `(d_{k,m} + ω_k G_m Φ h_{k,m})ᴴ`.
pub fn effective_channel(real: &ChannelRealization, theta: &[C64]) -> Result<Vec<DMatrix<C64>>> {
    if theta.len() != real.nr() {
        return Err(Error::DimensionMismatch { expected: real.nr(), found: theta.len() });
    }
    let k_users = real.users();
    Ok((0..real.subcarriers())
        .map(|m| {
            let nt = real.g[m].nrows();
            let mut h = DMatrix::zeros(k_users, nt);
            for k in 0..k_users {
                let v = real.effective_vector(k, m, theta);
                for i in 0..nt {
                    h[(k, i)] = v[i].conj();
                }
            }
            h
        })
        .collect())
}
