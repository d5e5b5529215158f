//! Achievable rates: ZF and MMSE precoders, instantaneous and Monte-Carlo
//! rates, and the closed-form approximations in [`closed_form`].

pub mod closed_form;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::channel::{effective_channel, LinkLayout, SystemConfig, C64};
use crate::error::{Error, Result};
use crate::geometry::{CellGeometry, RisPose, UserLocation};
use crate::numeric::compensated_sum;
use crate::rng::stream;

pub use closed_form::{
    approx_rate, approx_sum_rate, covariance_entry, lower_bound_rate, lower_bound_sum_rate, mmse_closed_form_rate, no_ris_rate,
    sigma_hat_inv_entry, ClosedFormContext,
};

/// Gram matrices with a larger condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Fraction of singular Monte-Carlo trials tolerated before giving up.
pub const MAX_SINGULAR_FRACTION: f64 = 0.01;

/// Linear precoder `U` (Nt x K), its unit-norm columns `f_k` and `‖u_k‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub u: DMatrix<C64>,
    pub directions: DMatrix<C64>,
    pub u_norm2: Vec<f64>,
}

impl Precoder {
    fn from_u(u: DMatrix<C64>, u_norm2: Vec<f64>) -> Self {
        let mut directions = u.clone();
        for (k, mut col) in directions.column_iter_mut().enumerate() {
            col /= C64::new(u_norm2[k].sqrt(), 0.0);
        }
        Self { u, directions, u_norm2 }
    }
}

/// Inverse of a Hermitian positive definite matrix through its eigen-decomposition.
/// Fails when the condition number exceeds [`MAX_CONDITION`].
pub fn hermitian_inverse(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularChannel { condition });
    }
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / eig.eigenvalues[j]);
    let mut inv = scaled * v.adjoint();
    for i in 0..inv.nrows() {
        inv[(i, i)] = C64::new(inv[(i, i)].re, 0.0);
    }
    Ok(inv)
}

/// Zero-forcing precoder `U = Hᴴ(HHᴴ)⁻¹`.
pub fn zf_precoder(h: &DMatrix<C64>) -> Result<Precoder> {
    let gram = h * h.adjoint();
    let inv = hermitian_inverse(&gram)?;
    let u = h.adjoint() * &inv;
    let u_norm2 = (0..h.nrows()).map(|k| inv[(k, k)].re).collect();
    Ok(Precoder::from_u(u, u_norm2))
}

/// Regularized precoder `U = Hᴴ(HHᴴ + αI)⁻¹`; `u_norm2` holds the true column norms.
pub fn mmse_precoder(h: &DMatrix<C64>, alpha: f64) -> Precoder {
    let k = h.nrows();
    let reg = h * h.adjoint() + DMatrix::<C64>::identity(k, k) * C64::new(alpha, 0.0);
    let inv = reg.cholesky().expect("regularized Gram matrix is positive definite").inverse();
    let u = h.adjoint() * inv;
    let u_norm2 = u.column_iter().map(|c| c.norm_squared()).collect();
    Precoder::from_u(u, u_norm2)
}

pub fn instantaneous_user_rate(p: f64, sigma2: f64, u_norm2: f64) -> f64 {
    (1.0 + p / (sigma2 * u_norm2)).log2()
}

/// ZF rates `[k][m]` of one realization for the given effective channels.
pub fn zf_rates(h_eff: &[DMatrix<C64>], cfg: &SystemConfig) -> Result<Vec<Vec<f64>>> {
    let k_users = h_eff.first().map_or(0, |h| h.nrows());
    let p = cfg.power_per_stream();
    let mut out = vec![vec![0.0; h_eff.len()]; k_users];
    for (m, h) in h_eff.iter().enumerate() {
        let pre = zf_precoder(h)?;
        for k in 0..k_users {
            out[k][m] = instantaneous_user_rate(p, cfg.noise_power_w, pre.u_norm2[k]);
        }
    }
    Ok(out)
}

/// Monte-Carlo rate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    /// Mean rate per user and subcarrier, `[k][m]` (bps/Hz).
    pub per_user_per_subcarrier: Vec<Vec<f64>>,
    /// Standard error of each mean, `[k][m]`.
    pub std_error: Vec<Vec<f64>>,
    pub sum_rate: f64,
    /// Standard error of the per-trial sum rate.
    pub sum_std_error: f64,
    /// Trials that contributed.
    pub trials: usize,
    /// Trials dropped because of a singular channel.
    pub skipped: usize,
}

/// Evaluate `trials` independent trials and aggregate their `[k][m]` rate tables.
///
/// Trials returning [`Error::SingularChannel`] are skipped and counted; other
/// errors abort. Aggregation runs sequentially in trial order with compensated
/// sums, so the result does not depend on how many threads evaluated trials.
pub fn aggregate_trials<F>(trials: usize, f: F) -> Result<RateSummary>
where
    F: Fn(usize) -> Result<Vec<Vec<f64>>> + Sync,
{
    let results: Vec<Result<Vec<Vec<f64>>>> = (0..trials).into_par_iter().map(&f).collect();
    let mut tables = Vec::with_capacity(trials);
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(t) => tables.push(t),
            Err(Error::SingularChannel { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if skipped as f64 > MAX_SINGULAR_FRACTION * trials as f64 || tables.is_empty() {
        return Err(Error::TooManySingular { skipped, trials });
    }
    let n = tables.len();
    let (k_users, big_m) = (tables[0].len(), tables[0].first().map_or(0, |r| r.len()));
    let mean_se = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        let mean = compensated_sum(v.iter().copied()) / n as f64;
        let se = if n > 1 {
            (compensated_sum(v.iter().map(|x| (x - mean) * (x - mean))) / ((n - 1) * n) as f64).sqrt()
        } else {
            0.0
        };
        (mean, se)
    };
    let mut per = vec![vec![0.0; big_m]; k_users];
    let mut se = vec![vec![0.0; big_m]; k_users];
    for k in 0..k_users {
        for m in 0..big_m {
            let (a, b) = mean_se(&mut tables.iter().map(|t| t[k][m]));
            per[k][m] = a;
            se[k][m] = b;
        }
    }
    let (sum_rate, sum_std_error) = mean_se(&mut tables.iter().map(|t| compensated_sum(t.iter().flatten().copied())));
    Ok(RateSummary { per_user_per_subcarrier: per, std_error: se, sum_rate, sum_std_error, trials: n, skipped })
}

/// Average ZF sum-rate over `trials` fading draws for a fixed pose, user drop and phase vector.
/// Trial `t` uses the random stream `(seed, t)`.
pub fn monte_carlo_sum_rate(
    cfg: &SystemConfig,
    geom: &CellGeometry,
    pose: &RisPose,
    users: &[UserLocation],
    theta: &[C64],
    trials: usize,
    seed: u64,
) -> Result<RateSummary> {
    let layout = LinkLayout::new(cfg, geom, pose, users)?;
    aggregate_trials(trials, |t| {
        let real = layout.sample(&mut stream(seed, &[t as u64]));
        zf_rates(&effective_channel(&real, theta)?, cfg)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::cn01;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn random_h(k: usize, nt: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = stream(seed, &[]);
        DMatrix::from_fn(k, nt, |_, _| cn01(&mut rng))
    }

    #[test]
    fn zf_single_user() {
        let h = random_h(1, 6, 1);
        let p = zf_precoder(&h).unwrap();
        let n2 = h.norm_squared();
        assert!((p.u_norm2[0] - 1.0 / n2).abs() < 1e-12 / n2);
        let f = h.adjoint() / C64::new(n2.sqrt(), 0.0);
        assert!((p.directions - f).norm() < 1e-12);
    }

    #[test]
    fn zf_orthonormal_rows() {
        let mut h = DMatrix::<C64>::zeros(2, 4);
        h[(0, 1)] = C64::new(1.0, 0.0);
        h[(1, 3)] = C64::new(0.0, 1.0);
        let p = zf_precoder(&h).unwrap();
        assert!((p.u.clone() - h.adjoint()).norm() < 1e-14);
        assert!(p.u_norm2.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn zf_inverts_channel() {
        let h = random_h(3, 8, 2);
        let p = zf_precoder(&h).unwrap();
        let resid = &h * &p.u - DMatrix::<C64>::identity(3, 3);
        assert!(resid.norm() < 1e-10);
        for k in 0..3 {
            assert!((p.u.column(k).norm_squared() - p.u_norm2[k]).abs() < 1e-10 * p.u_norm2[k]);
        }
    }

    #[test]
    fn zf_detects_singular_gram() {
        let mut h = random_h(2, 4, 3);
        let row = h.row(0).clone_owned();
        h.set_row(1, &row);
        assert!(matches!(zf_precoder(&h), Err(Error::SingularChannel { .. })));
    }

    #[test]
    fn mmse_limits() {
        let h = random_h(3, 8, 4);
        let zf = zf_precoder(&h).unwrap();
        let small = mmse_precoder(&h, 1e-9);
        assert!((small.u - &zf.u).norm() < 1e-6 * zf.u.norm());
        let big = 1e9;
        let large = mmse_precoder(&h, big);
        let expect = h.adjoint() / C64::new(big, 0.0);
        assert!((large.u - &expect).norm() < 1e-6 * expect.norm());
    }

    #[test]
    fn mmse_two_user_symbolic_inverse() {
        let h = random_h(2, 5, 5);
        let alpha = 0.7;
        let a = &h * h.adjoint();
        let (p, q, r, s) = (a[(0, 0)] + alpha, a[(0, 1)], a[(1, 0)], a[(1, 1)] + alpha);
        let det = p * s - q * r;
        let inv = DMatrix::from_row_slice(2, 2, &[s / det, -q / det, -r / det, p / det]);
        let expect = h.adjoint() * inv;
        assert!((mmse_precoder(&h, alpha).u - expect).norm() < 1e-12);
    }

    #[test]
    fn instantaneous_rate_examples() {
        assert_eq!(instantaneous_user_rate(1.0, 1.0, 1.0), 1.0);
        assert_eq!(instantaneous_user_rate(0.0, 1.0, 1.0), 0.0);
        assert!((instantaneous_user_rate(1000.0, 1.0, 10.0) - 101f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_single_user_without_ris() {
        let cfg = SystemConfig { users: 1, los_only: true, ..SystemConfig::scaled() };
        let geom = CellGeometry::scaled();
        // panel faces away from the BS, so the user is not served
        let pose = RisPose::new(10.0, 0.0, 5.0, 3.0 * PI / 2.0);
        let users = [UserLocation::new(60.0, 1.0)];
        let theta = vec![C64::new(1.0, 0.0); cfg.nr()];
        let s = monte_carlo_sum_rate(&cfg, &geom, &pose, &users, &theta, 20, 1).unwrap();
        let beta1 = cfg.c1 * 60f64.powf(-cfg.alpha1);
        // LoS-only direct channel has ‖d‖² = Nt β1
        let expect = (1.0 + cfg.power_per_stream() * beta1 * cfg.nt as f64 / cfg.noise_power_w).log2();
        for m in 0..cfg.subcarriers {
            assert!((s.per_user_per_subcarrier[0][m] - expect).abs() < 1e-9);
            assert!(s.std_error[0][m] < 1e-12);
        }
    }

    #[test]
    fn doubling_power_increases_rate() {
        let cfg = SystemConfig::scaled();
        let geom = CellGeometry::scaled();
        let pose = RisPose::new(10.0, PI / 4.0, 9.0, 0.0);
        let users = [UserLocation::new(50.0, 0.7), UserLocation::new(90.0, 2.0), UserLocation::new(30.0, 4.0)];
        let theta = vec![C64::new(1.0, 0.0); cfg.nr()];
        let a = monte_carlo_sum_rate(&cfg, &geom, &pose, &users, &theta, 50, 2).unwrap();
        let cfg2 = SystemConfig { max_power_w: 2.0 * cfg.max_power_w, ..cfg.clone() };
        let b = monte_carlo_sum_rate(&cfg2, &geom, &pose, &users, &theta, 50, 2).unwrap();
        assert!(b.sum_rate > a.sum_rate);
        let total: f64 = a.per_user_per_subcarrier.iter().flatten().sum();
        assert!((total - a.sum_rate).abs() < 1e-9 * a.sum_rate);
    }

    #[test]
    fn aggregation_counts_singular_trials() {
        let s = aggregate_trials(200, |t| if t == 7 { Err(Error::SingularChannel { condition: 1e13 }) } else { Ok(vec![vec![t as f64]]) })
            .unwrap();
        assert_eq!((s.trials, s.skipped), (199, 1));
        let e = aggregate_trials(50, |t| if t < 2 { Err(Error::SingularChannel { condition: 1e13 }) } else { Ok(vec![vec![1.0]]) });
        assert_eq!(e, Err(Error::TooManySingular { skipped: 2, trials: 50 }));
    }

    proptest! {
        #[test]
        fn zf_residual_small(seed in 0u64..500, k in 1usize..5, extra in 1usize..6) {
            let h = random_h(k, k + extra, seed);
            let p = zf_precoder(&h).unwrap();
            prop_assert!((&h * &p.u - DMatrix::<C64>::identity(k, k)).norm() < 1e-8);
            for c in p.directions.column_iter() {
                prop_assert!((c.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
