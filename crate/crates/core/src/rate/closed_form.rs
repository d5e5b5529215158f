//! Closed-form average-rate expressions.
//!
//! Quantities are expressed per BS antenna: the columns of the K x Nt
//! effective channel are modelled as i.i.d. with covariance
//! `Σ̂ = diag(κ) + τ ΞΞᴴ`, so `HHᴴ` is Wishart with Nt degrees of freedom.
//! `E[ln det]` identities then give rates in terms of `ψ(Nt-K+1)` and the
//! diagonal of `Σ̂⁻¹`, which Sherman-Morrison provides without a dense inverse.

use nalgebra::DMatrix;
use statrs::function::gamma::digamma;

use crate::channel::{LinkLayout, SystemConfig, C64};

/// Rician power ratios `(K0+K2+1)/((K0+1)(K2+1))`, `K0K2/((K0+1)(K2+1))`,
/// `K1/(K1+1)` with their LoS-only limits.
pub(crate) fn rician_ratios(cfg: &SystemConfig) -> (f64, f64, f64) {
    if cfg.los_only {
        return (0.0, 1.0, 1.0);
    }
    let d = (cfg.k0 + 1.0) * (cfg.k2 + 1.0);
    ((cfg.k0 + cfg.k2 + 1.0) / d, cfg.k0 * cfg.k2 / d, cfg.k1 / (cfg.k1 + 1.0))
}

/// `E[h_iᴴ h_j]` of the effective channels on subcarrier `m` (0-based) for
/// phases `theta`. The expectation is over small-scale fading with the pose
/// fixed, so the line-of-sight cascade term is deterministic.
pub fn covariance_entry(i: usize, j: usize, m: usize, layout: &LinkLayout, theta: &[C64]) -> C64 {
    let cfg = &layout.cfg;
    let (nt, nr) = (cfg.nt as f64, cfg.nr() as f64);
    let (diffuse, los, _) = rician_ratios(cfg);
    let b0 = layout.gains.bs_ris;
    let (b2i, b2j) = (layout.gains.ris_user[i], layout.gains.ris_user[j]);
    let w = layout.omega_f64(i) * layout.omega_f64(j);
    let gamma = nt * nr * nr * layout.cascade_alignment(i, m, theta).conj() * layout.cascade_alignment(j, m, theta);
    let cross = gamma * (w * los * b0 * (b2i * b2j).sqrt());
    if i == j {
        let direct = nt * layout.gains.bs_user[i];
        let scattered = w * nt * nr * diffuse * b0 * b2i;
        C64::new(direct + scattered + cross.re, 0.0)
    } else {
        cross
    }
}

/// Terms of the per-antenna covariance model for one pose and phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormContext {
    /// `κ_i`, diagonal part of `Σ̂`.
    pub kappa: Vec<f64>,
    /// Weight of the rank-one line-of-sight cascade term.
    pub tau: f64,
    /// `Ξ_{m,i}`, indexed `[m][i]`.
    pub xi: Vec<Vec<C64>>,
    /// Dense `Σ̂_m = diag(κ) + τ Ξ_m Ξ_mᴴ`, per subcarrier.
    pub sigma_hat: Vec<DMatrix<C64>>,
    /// Power per user and subcarrier (W).
    pub pbar: f64,
}

impl ClosedFormContext {
    pub fn new(layout: &LinkLayout, theta: &[C64]) -> Self {
        let cfg = &layout.cfg;
        let (nt, nr) = (cfg.nt as f64, cfg.nr() as f64);
        let (diffuse, los, los_direct) = rician_ratios(cfg);
        let b0 = layout.gains.bs_ris;
        let kappa = (0..layout.users())
            .map(|i| {
                let b1 = layout.gains.bs_user[i];
                b1 + layout.omega_f64(i) * nr * diffuse * b0 * layout.gains.ris_user[i] + los_direct * b1 / nt
            })
            .collect();
        let xi = (0..cfg.subcarriers)
            .map(|m| {
                (0..layout.users())
                    .map(|i| {
                        let amp = layout.omega_f64(i) * (b0 * layout.gains.ris_user[i]).sqrt() * nt.sqrt() * nr;
                        layout.cascade_alignment(i, m, theta).conj() * amp
                    })
                    .collect()
            })
            .collect();
        Self::from_parts(kappa, los / nt, xi, cfg.power_per_stream())
    }

    /// Build from raw terms; `xi` is indexed `[m][i]`.
    pub fn from_parts(kappa: Vec<f64>, tau: f64, xi: Vec<Vec<C64>>, pbar: f64) -> Self {
        let sigma_hat = xi
            .iter()
            .map(|x| {
                let k = kappa.len();
                DMatrix::from_fn(k, k, |i, j| {
                    let d = if i == j { kappa[i] } else { 0.0 };
                    x[i] * x[j].conj() * tau + d
                })
            })
            .collect();
        Self { kappa, tau, xi, sigma_hat, pbar }
    }

    pub fn users(&self) -> usize {
        self.kappa.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.xi.len()
    }

    /// `Σ_i |Ξ_{m,i}|²/κ_i`, optionally skipping one user.
    fn weighted_energy(&self, m: usize, skip: Option<usize>) -> f64 {
        (0..self.users()).filter(|&i| Some(i) != skip).map(|i| self.xi[m][i].norm_sqr() / self.kappa[i]).sum()
    }

    /// Off-diagonal-capable entry of `Σ̂_m⁻¹`.
    pub fn sigma_hat_inv(&self, i: usize, j: usize, m: usize) -> C64 {
        let denom = 1.0 + self.tau * self.weighted_energy(m, None);
        let rank_one = self.xi[m][i] * self.xi[m][j].conj() * (-self.tau / (self.kappa[i] * self.kappa[j] * denom));
        if i == j {
            C64::new(1.0 / self.kappa[i] + rank_one.re, 0.0)
        } else {
            rank_one
        }
    }
}

/// `[Σ̂_m⁻¹]_{k,k}` by Sherman-Morrison.
pub fn sigma_hat_inv_entry(k: usize, m: usize, ctx: &ClosedFormContext) -> f64 {
    let kk = ctx.kappa[k];
    let num = ctx.tau * ctx.xi[m][k].norm_sqr() / (kk * kk);
    1.0 / kk - num / (1.0 + ctx.tau * ctx.weighted_energy(m, None))
}

/// `exp(ψ(Nt-K+1))`, the Wishart log-determinant factor.
pub fn wishart_gain(nt: usize, k: usize) -> f64 {
    digamma((nt - k + 1) as f64).exp()
}

/// Average ZF rate approximation of user `k` on subcarrier `m` (0-based).
pub fn approx_rate(k: usize, m: usize, ctx: &ClosedFormContext, cfg: &SystemConfig) -> f64 {
    let kk = ctx.kappa[k];
    let gain = 1.0 + ctx.tau * ctx.xi[m][k].norm_sqr() / kk / (1.0 + ctx.tau * ctx.weighted_energy(m, Some(k)));
    (1.0 + ctx.pbar * wishart_gain(cfg.nt, ctx.users()) * kk / cfg.noise_power_w * gain).log2()
}

/// Lower bound of the average rate; identical on every subcarrier.
pub fn lower_bound_rate(k: usize, ctx: &ClosedFormContext, cfg: &SystemConfig) -> f64 {
    (1.0 + ctx.pbar * wishart_gain(cfg.nt, ctx.users()) * ctx.kappa[k] / cfg.noise_power_w).log2()
}

/// Average rate of a user with direct gain `beta1` when no RIS serves it.
pub fn no_ris_rate(cfg: &SystemConfig, beta1: f64) -> f64 {
    let (_, _, los_direct) = rician_ratios(cfg);
    let kappa = beta1 + los_direct * beta1 / cfg.nt as f64;
    (1.0 + cfg.power_per_stream() * wishart_gain(cfg.nt, cfg.users) * kappa / cfg.noise_power_w).log2()
}

pub fn approx_sum_rate(ctx: &ClosedFormContext, cfg: &SystemConfig) -> f64 {
    (0..ctx.users()).flat_map(|k| (0..ctx.subcarriers()).map(move |m| (k, m))).map(|(k, m)| approx_rate(k, m, ctx, cfg)).sum()
}

pub fn lower_bound_sum_rate(ctx: &ClosedFormContext, cfg: &SystemConfig) -> f64 {
    (0..ctx.users()).map(|k| lower_bound_rate(k, ctx, cfg)).sum::<f64>() * ctx.subcarriers() as f64
}

/// `ϖ_{m,k}`, the approximation of `E[(HHᴴ + αI)⁻¹]_{k,k}` used by the MMSE rate.
pub fn mmse_weight(k: usize, m: usize, ctx: &ClosedFormContext, cfg: &SystemConfig, alpha: f64) -> f64 {
    let kk = ctx.users();
    let dof = (cfg.nt - kk) as f64;
    let xi = &ctx.xi[m];
    let xi_hat: Vec<C64> = (0..kk).map(|i| xi[i] / ctx.kappa[i]).collect();
    let b = -ctx.tau / (1.0 + ctx.tau * ctx.weighted_energy(m, None));
    let b_hat = b / dof;
    let lambda: Vec<f64> = (0..kk).map(|i| 1.0 / (ctx.kappa[i] * dof) + 1.0 / alpha).collect();
    let z_denom = 1.0 + b_hat * (0..kk).map(|i| xi_hat[i].norm_sqr() / lambda[i]).sum::<f64>();
    let z_inv = |a: usize, c: usize| {
        let d = if a == c { 1.0 / lambda[a] } else { 0.0 };
        xi_hat[a] * xi_hat[c].conj() * (-b_hat / (lambda[a] * lambda[c] * z_denom)) + d
    };
    let s_inv = |a: usize, c: usize| {
        let d = if a == c { 1.0 / ctx.kappa[a] } else { 0.0 };
        xi_hat[a] * xi_hat[c].conj() * b + d
    };
    let acc: C64 = (0..kk).map(|i| z_inv(k, i) * s_inv(i, k)).sum();
    acc.re / (alpha * dof)
}

/// Closed-form MMSE rate `log2(1 + p/(σ² ϖ))`.
pub fn mmse_closed_form_rate(k: usize, m: usize, ctx: &ClosedFormContext, cfg: &SystemConfig, alpha: f64) -> f64 {
    (1.0 + ctx.pbar / (cfg.noise_power_w * mmse_weight(k, m, ctx, cfg, alpha))).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{cn01, LinkLayout};
    use crate::geometry::{CellGeometry, RisPose, UserLocation};
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_ctx(k: usize, seed: u64) -> ClosedFormContext {
        let mut rng = stream(seed, &[]);
        let kappa = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
        let xi = vec![(0..k).map(|_| cn01(&mut rng) * 2.0).collect()];
        ClosedFormContext::from_parts(kappa, rng.random_range(0.0..2.0), xi, 1.0)
    }

    fn dense_inverse(ctx: &ClosedFormContext, m: usize) -> DMatrix<C64> {
        ctx.sigma_hat[m].clone().try_inverse().unwrap()
    }

    fn layout() -> LinkLayout {
        let cfg = SystemConfig::scaled();
        let geom = CellGeometry::scaled();
        let pose = RisPose::new(10.0, PI / 4.0, 9.0, 0.0);
        let users = [UserLocation::new(50.0, PI / 4.0 + 0.3), UserLocation::new(60.0, 2.0), UserLocation::new(70.0, -0.4)];
        LinkLayout::new(&cfg, &geom, &pose, &users).unwrap()
    }

    #[test]
    fn zero_tau_gives_diagonal_inverse() {
        let ctx = random_ctx(3, 1);
        let ctx = ClosedFormContext::from_parts(ctx.kappa.clone(), 0.0, ctx.xi.clone(), 1.0);
        for k in 0..3 {
            assert_eq!(sigma_hat_inv_entry(k, 0, &ctx), 1.0 / ctx.kappa[k]);
        }
    }

    #[test]
    fn zero_own_xi_gives_reciprocal_kappa() {
        let mut ctx = random_ctx(3, 2);
        ctx.xi[0][1] = C64::new(0.0, 0.0);
        assert!((sigma_hat_inv_entry(1, 0, &ctx) - 1.0 / ctx.kappa[1]).abs() < 1e-15);
    }

    #[test]
    fn covariance_without_ris() {
        let mut lay = layout();
        lay.omega = vec![false; 3];
        let theta = vec![C64::new(1.0, 0.0); lay.cfg.nr()];
        let c = covariance_entry(1, 1, 0, &lay, &theta);
        assert!((c.re - lay.cfg.nt as f64 * lay.gains.bs_user[1]).abs() < 1e-25);
        assert_eq!(covariance_entry(0, 2, 1, &lay, &theta), C64::new(0.0, 0.0));
    }

    #[test]
    fn covariance_is_hermitian() {
        let lay = layout();
        let theta: Vec<C64> = (0..lay.cfg.nr()).map(|n| C64::from_polar(1.0, 0.4 * n as f64)).collect();
        for m in 0..lay.cfg.subcarriers {
            for i in 0..3 {
                assert!(covariance_entry(i, i, m, &lay, &theta).re > 0.0);
                for j in 0..3 {
                    let a = covariance_entry(i, j, m, &lay, &theta);
                    let b = covariance_entry(j, i, m, &lay, &theta);
                    assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn context_matches_covariance_per_antenna() {
        // Σ̂ minus the small direct LoS term equals E[HHᴴ]/Nt
        let lay = layout();
        let theta: Vec<C64> = (0..lay.cfg.nr()).map(|n| C64::from_polar(1.0, -0.9 * n as f64)).collect();
        let ctx = ClosedFormContext::new(&lay, &theta);
        let nt = lay.cfg.nt as f64;
        let k1 = lay.cfg.k1 / (lay.cfg.k1 + 1.0);
        for m in 0..lay.cfg.subcarriers {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = ctx.sigma_hat[m][(i, j)];
                    if i == j {
                        s -= k1 * lay.gains.bs_user[i] / nt;
                    }
                    let c = covariance_entry(i, j, m, &lay, &theta) / nt;
                    assert!((s - c).norm() <= 1e-12 * ctx.sigma_hat[m][(i, i)].re);
                }
            }
        }
    }

    #[test]
    fn approx_equals_reciprocal_inverse_diagonal() {
        let cfg = SystemConfig::scaled();
        for seed in 0..20 {
            let ctx = random_ctx(3, seed);
            let g = wishart_gain(cfg.nt, 3);
            for k in 0..3 {
                let expect = (1.0 + ctx.pbar * g / (cfg.noise_power_w * sigma_hat_inv_entry(k, 0, &ctx))).log2();
                assert!((approx_rate(k, 0, &ctx, &cfg) - expect).abs() < 1e-9 * expect);
            }
        }
    }

    #[test]
    fn approx_equals_lower_bound_without_cascade() {
        let cfg = SystemConfig::scaled();
        let mut ctx = random_ctx(3, 9);
        for x in ctx.xi[0].iter_mut() {
            *x = C64::new(0.0, 0.0);
        }
        for k in 0..3 {
            assert_eq!(approx_rate(k, 0, &ctx, &cfg), lower_bound_rate(k, &ctx, &cfg));
        }
    }

    #[test]
    fn digamma_at_one() {
        assert!((wishart_gain(3, 3) - 0.561_459_483_566_885_1).abs() < 1e-12);
        assert!((digamma(1.0) + 0.577_215_664_901_532_9).abs() < 1e-12);
    }

    #[test]
    fn no_ris_rate_matches_lower_bound() {
        let cfg = SystemConfig::scaled();
        let mut lay = layout();
        lay.omega = vec![false; 3];
        let ctx = ClosedFormContext::new(&lay, &vec![C64::new(1.0, 0.0); cfg.nr()]);
        for k in 0..3 {
            assert_eq!(no_ris_rate(&cfg, lay.gains.bs_user[k]), lower_bound_rate(k, &ctx, &cfg));
        }
        let k1zero = SystemConfig { k1: 0.0, ..cfg.clone() };
        let b1 = 1e-12;
        let expect = (1.0 + cfg.power_per_stream() * wishart_gain(cfg.nt, cfg.users) * b1 / cfg.noise_power_w).log2();
        assert_eq!(no_ris_rate(&k1zero, b1), expect);
    }

    #[test]
    fn table_iii_direct_user_regression() {
        // one user at 100 m, unserved: κ = β1 (1 + K1/(Nt (K1+1)))
        let cfg = SystemConfig { users: 1, ..SystemConfig::table_iii() };
        let beta1 = cfg.c1 * 1e-8;
        let kappa = beta1 * (1.0 + 10.0 / (128.0 * 11.0));
        let snr = 1.0 / 16.0 * digamma(128.0).exp() * kappa / 10f64.powf(-13.4);
        let r = no_ris_rate(&cfg, beta1);
        assert!((r - (1.0 + snr).log2()).abs() < 1e-12);
        assert!((r - 1.300_665_620_9).abs() < 1e-9, "{r}");
    }

    #[test]
    fn digamma_asymptotics() {
        let g = wishart_gain(1024, 4);
        assert!((g - (1024.0 - 4.0 + 0.5)).abs() < 1e-3);
    }

    #[test]
    fn mmse_dense_oracle() {
        let cfg = SystemConfig::scaled();
        for seed in 0..10 {
            for tau_zero in [false, true] {
                let mut ctx = random_ctx(3, seed + 100);
                if tau_zero {
                    ctx = ClosedFormContext::from_parts(ctx.kappa.clone(), 0.0, ctx.xi.clone(), 1.0);
                }
                let alpha = 0.37;
                let dof = (cfg.nt - 3) as f64;
                let s_inv = dense_inverse(&ctx, 0);
                let z = &s_inv / C64::new(dof, 0.0) + DMatrix::<C64>::identity(3, 3) / C64::new(alpha, 0.0);
                let prod = z.try_inverse().unwrap() * &s_inv;
                for k in 0..3 {
                    let expect = prod[(k, k)].re / (alpha * dof);
                    let got = mmse_weight(k, 0, &ctx, &cfg, alpha);
                    assert!((got - expect).abs() < 1e-10 * expect, "{got} {expect}");
                }
            }
        }
    }

    #[test]
    fn mmse_small_alpha_tends_to_zf_weight() {
        let cfg = SystemConfig::scaled();
        let ctx = random_ctx(3, 55);
        let dof = (cfg.nt - 3) as f64;
        for k in 0..3 {
            let w = mmse_weight(k, 0, &ctx, &cfg, 1e-9);
            let zf = sigma_hat_inv_entry(k, 0, &ctx) / dof;
            assert!((w - zf).abs() < 1e-6 * zf);
        }
    }

    proptest! {
        #[test]
        fn sherman_morrison_matches_dense(seed in 0u64..10_000, k in 1usize..6) {
            let ctx = random_ctx(k, seed);
            let inv = dense_inverse(&ctx, 0);
            for i in 0..k {
                let a = sigma_hat_inv_entry(i, 0, &ctx);
                prop_assert!((a - inv[(i, i)].re).abs() < 1e-10 * inv[(i, i)].re.abs().max(1.0));
                for j in 0..k {
                    prop_assert!((ctx.sigma_hat_inv(i, j, 0) - inv[(i, j)]).norm() < 1e-10);
                }
            }
        }

        #[test]
        fn lower_bound_never_exceeds_approx(seed in 0u64..10_000, k in 1usize..6, p in -20.0f64..40.0) {
            let cfg = SystemConfig { max_power_w: crate::numeric::dbm_to_watts(p), ..SystemConfig::scaled() };
            let mut ctx = random_ctx(k, seed);
            ctx.pbar = cfg.power_per_stream();
            for i in 0..k {
                prop_assert!(lower_bound_rate(i, &ctx, &cfg) <= approx_rate(i, 0, &ctx, &cfg));
            }
        }

        #[test]
        fn rates_monotone_in_power(seed in 0u64..1000, p in -20.0f64..40.0) {
            let cfg = SystemConfig { max_power_w: crate::numeric::dbm_to_watts(p), ..SystemConfig::scaled() };
            let mut ctx = random_ctx(3, seed);
            ctx.pbar = 1e-12;
            let a = approx_rate(0, 0, &ctx, &cfg);
            ctx.pbar = 2e-12;
            prop_assert!(approx_rate(0, 0, &ctx, &cfg) >= a);
        }
    }
}
