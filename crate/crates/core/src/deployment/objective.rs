//! Pose-only objectives evaluated over a set of sampled user locations.

use crate::channel::{path_loss, Link, SystemConfig};
use crate::error::Result;
use crate::geometry::{coverage_indicator, ris_user_distance, CellGeometry, RisPose, UserLocation};
use crate::numeric::compensated_sum;
use crate::rate::closed_form::{rician_ratios, wishart_gain};

/// `κ` of one sampled user and whether the RIS serves it.
pub fn sample_kappa(pose: &RisPose, user: &UserLocation, geom: &CellGeometry, cfg: &SystemConfig) -> Result<(f64, bool)> {
    let (diffuse, _, los_direct) = rician_ratios(cfg);
    let b1 = path_loss(Link::BsUser { dk: user.dk }, geom, cfg)?;
    let mut kappa = b1 + los_direct * b1 / cfg.nt as f64;
    let served = coverage_indicator(pose, user, geom);
    if served {
        let b0 = path_loss(Link::BsRis { d0: pose.d0, h0: pose.h0 }, geom, cfg)?;
        let dr = ris_user_distance(pose, user);
        let b2 = path_loss(Link::RisUser { dr, h0: pose.h0 }, geom, cfg)?;
        kappa += cfg.nr() as f64 * diffuse * b0 * b2;
    }
    Ok((kappa, served))
}

/// `Σ_t κ_t` and the number of served samples `T′`.
pub fn kappa_sum(pose: &RisPose, samples: &[UserLocation], geom: &CellGeometry, cfg: &SystemConfig) -> Result<(f64, usize)> {
    let mut served = 0;
    let mut vals = Vec::with_capacity(samples.len());
    for u in samples {
        let (k, w) = sample_kappa(pose, u, geom, cfg)?;
        vals.push(k);
        served += usize::from(w);
    }
    Ok((compensated_sum(vals), served))
}

/// Sample-average lower bound of the cell sum-rate: each sample stands for one
/// user, scaled to `K` users over `M` subcarriers.
pub fn saa_lower_bound(pose: &RisPose, samples: &[UserLocation], geom: &CellGeometry, cfg: &SystemConfig) -> Result<f64> {
    let snr = cfg.power_per_stream() * wishart_gain(cfg.nt, cfg.users) / cfg.noise_power_w;
    let mut vals = Vec::with_capacity(samples.len());
    for u in samples {
        let (k, _) = sample_kappa(pose, u, geom, cfg)?;
        vals.push((1.0 + snr * k).log2());
    }
    Ok(compensated_sum(vals) * (cfg.users * cfg.subcarriers) as f64 / samples.len().max(1) as f64)
}

/// Upper bound on `Σ_t κ_t` that holds whenever all direct and RIS-user gains are below one.
pub fn kappa_sum_bound(pose: &RisPose, total: usize, served: usize, geom: &CellGeometry, cfg: &SystemConfig) -> Result<f64> {
    let (diffuse, _, los_direct) = rician_ratios(cfg);
    let b0 = path_loss(Link::BsRis { d0: pose.d0, h0: pose.h0 }, geom, cfg)?;
    Ok((1.0 + los_direct / cfg.nt as f64) * total as f64 + cfg.nr() as f64 * diffuse * b0 * served as f64)
}

/// RIS-side objective in `d0` for fixed height: `C̃ (d0² + (h0 - hB)²)^(-α0/2)`.
pub fn radial_objective(d0: f64, h0: f64, c_tilde: f64, geom: &CellGeometry, cfg: &SystemConfig) -> f64 {
    c_tilde * (d0 * d0 + (h0 - geom.bs_height).powi(2)).powf(-cfg.alpha0 / 2.0)
}
