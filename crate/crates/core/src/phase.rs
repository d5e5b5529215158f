//! Phase-shift optimization for a fixed deployment and channel draw.
//!
//! Alternates a quadratic-transform auxiliary update with a closed-form,
//! element-wise phase update, refreshing the ZF precoders in between. Because
//! the precoder refresh can undo part of the gain, each candidate update is
//! backtracked toward the current phases until the true sum-rate does not
//! drop.

use rand::Rng;

use crate::channel::{effective_channel, ChannelRealization, SystemConfig, C64};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, wrap_2pi, TWO_PI};
use crate::rate::{zf_precoder, zf_rates, Precoder};

/// RIS phase vector with an optional discrete resolution (`2^bits` levels).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub theta: Vec<C64>,
    pub resolution_bits: Option<u32>,
}

impl PhaseConfig {
    /// All elements at phase zero.
    pub fn identity(nr: usize) -> Self {
        Self { theta: vec![C64::new(1.0, 0.0); nr], resolution_bits: None }
    }

    pub fn random<R: Rng + ?Sized>(nr: usize, rng: &mut R) -> Self {
        let theta = (0..nr).map(|_| C64::from_polar(1.0, rng.random_range(0.0..TWO_PI))).collect();
        Self { theta, resolution_bits: None }
    }

    pub fn with_bits(mut self, bits: Option<u32>) -> Self {
        self.resolution_bits = bits;
        self
    }

    pub fn max_modulus_error(&self) -> f64 {
        self.theta.iter().map(|t| (t.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// `γ_{k,m} = (h_{k,m}^eff)ᴴ f_{k,m} p/σ²`, indexed `[k][m]`.
pub fn update_auxiliary(real: &ChannelRealization, theta: &[C64], precoders: &[Precoder], cfg: &SystemConfig) -> Result<Vec<Vec<C64>>> {
    let h = effective_channel(real, theta)?;
    let snr = cfg.power_per_stream() / cfg.noise_power_w;
    Ok((0..real.users())
        .map(|k| {
            (0..real.subcarriers())
                .map(|m| (h[m].row(k) * precoders[m].directions.column(k))[(0, 0)] * snr)
                .collect()
        })
        .collect())
}

/// `ν = Σ_{k,m} γ*_{k,m} v_{k,m}` with `v_{k,m} = diag(ω_k h_{k,m}ᴴ) G_mᴴ f_{k,m}`.
pub fn phase_direction(real: &ChannelRealization, gammas: &[Vec<C64>], precoders: &[Precoder]) -> Vec<C64> {
    let mut nu = vec![C64::new(0.0, 0.0); real.nr()];
    for m in 0..real.subcarriers() {
        for k in 0..real.users() {
            if !real.omega[k] {
                continue;
            }
            let ghf = real.g[m].ad_mul(&precoders[m].directions.column(k));
            let w = gammas[k][m].conj();
            for (n, acc) in nu.iter_mut().enumerate() {
                *acc += w * real.h[k][m][n].conj() * ghf[n];
            }
        }
    }
    nu
}

/// Normalize `ν` element-wise onto the unit circle; zero entries keep `prev`.
pub fn project_unit_modulus(nu: &[C64], prev: &[C64]) -> Vec<C64> {
    nu.iter()
        .zip(prev)
        .map(|(v, p)| {
            let a = v.norm();
            if a > 0.0 && a.is_finite() {
                v / a
            } else {
                *p
            }
        })
        .collect()
}

/// Closed-form phase update from the auxiliary variables.
pub fn update_phases(real: &ChannelRealization, gammas: &[Vec<C64>], precoders: &[Precoder], prev: &[C64]) -> Vec<C64> {
    project_unit_modulus(&phase_direction(real, gammas, precoders), prev)
}

/// Map each phase to the nearest of `2^bits` uniformly spaced levels; ties go to the lower angle.
pub fn quantize_phases(theta: &[C64], bits: u32) -> Vec<C64> {
    let levels = 1usize << bits;
    let step = TWO_PI / levels as f64;
    theta
        .iter()
        .map(|t| {
            let ang = wrap_2pi(t.arg());
            let lo = (ang / step).floor();
            let frac = ang - lo * step;
            let idx = if frac > step - frac { lo as usize + 1 } else { lo as usize } % levels;
            C64::from_polar(1.0, idx as f64 * step)
        })
        .collect()
}

/// Sum over users and subcarriers of ZF rates, also returning the precoders.
pub fn zf_sum_rate(real: &ChannelRealization, theta: &[C64], cfg: &SystemConfig) -> Result<(f64, Vec<Precoder>)> {
    let h = effective_channel(real, theta)?;
    let pre = h.iter().map(zf_precoder).collect::<Result<Vec<_>>>()?;
    let rates = zf_rates(&h, cfg)?;
    Ok((compensated_sum(rates.into_iter().flatten()), pre))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSettings {
    pub max_iters: usize,
    /// Stop once an accepted update improves the sum-rate by less than this (bps/Hz).
    pub tol: f64,
    /// Halvings tried before an update is rejected.
    pub max_backtracks: usize,
}

impl Default for PhaseSettings {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-6, max_backtracks: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOptimization {
    /// Final phases, quantized when `resolution_bits` was requested.
    pub config: PhaseConfig,
    /// Continuous phases before quantization.
    pub continuous: Vec<C64>,
    /// Sum-rate at the initial phases and after every accepted update.
    pub trace: Vec<f64>,
    /// Sum-rate at `config`.
    pub final_rate: f64,
    pub iterations: usize,
    /// Candidate updates that lowered the sum-rate at every backtracking step.
    pub rejected_updates: usize,
}

pub fn optimize_phases(real: &ChannelRealization, cfg: &SystemConfig, init: &PhaseConfig, settings: &PhaseSettings) -> Result<PhaseOptimization> {
    if init.theta.len() != real.nr() {
        return Err(Error::DimensionMismatch { expected: real.nr(), found: init.theta.len() });
    }
    let mut theta = init.theta.clone();
    let (mut g, mut pre) = zf_sum_rate(real, &theta, cfg)?;
    let mut trace = vec![g];
    let mut rejected = 0;
    let mut iterations = 0;
    for _ in 0..settings.max_iters.max(1) {
        iterations += 1;
        let gammas = update_auxiliary(real, &theta, &pre, cfg)?;
        let cand = update_phases(real, &gammas, &pre, &theta);
        let mut eta = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_backtracks {
            let mixed: Vec<C64> = theta.iter().zip(&cand).map(|(o, c)| o + (c - o) * eta).collect();
            let trial = project_unit_modulus(&mixed, &theta);
            match zf_sum_rate(real, &trial, cfg) {
                Ok((gt, pt)) if gt >= g => {
                    accepted = Some((trial, gt, pt));
                    break;
                }
                Ok(_) | Err(Error::SingularChannel { .. }) => eta *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((t, gt, pt)) = accepted else {
            rejected += 1;
            break;
        };
        let delta = gt - g;
        theta = t;
        g = gt;
        pre = pt;
        trace.push(g);
        if delta.abs() < settings.tol {
            break;
        }
    }
    let (config, final_rate) = match init.resolution_bits {
        Some(bits) => {
            let q = quantize_phases(&theta, bits);
            let (r, _) = zf_sum_rate(real, &q, cfg)?;
            (PhaseConfig { theta: q, resolution_bits: Some(bits) }, r)
        }
        None => (PhaseConfig { theta: theta.clone(), resolution_bits: None }, g),
    };
    Ok(PhaseOptimization { config, continuous: theta, trace, final_rate, iterations, rejected_updates: rejected })
}
