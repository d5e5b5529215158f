//! Cell layout in polar coordinates: BS at the origin, RIS pose, user
//! positions, link angles and the RIS coverage indicator.
//!
//! Azimuths are measured from the x-axis of the cell. The RIS panel normal
//! points along `π/2 - φR` in the panel-relative convention used for the
//! arrival and departure angles, so `φR` is the panel orientation.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{wrap_2pi, wrap_pi};

/// Static cell description and the allowed RIS placement box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    /// Cell radius (m).
    pub radius: f64,
    /// BS antenna height (m).
    pub bs_height: f64,
    /// Common user height (m).
    pub user_height: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl CellGeometry {
    pub fn new(radius: f64, bs_height: f64, user_height: f64, r_min: f64, r_max: f64, h_min: f64, h_max: f64) -> Result<Self> {
        let g = Self { radius, bs_height, user_height, r_min, r_max, h_min, h_max };
        g.validate()?;
        Ok(g)
    }

    /// Full-size cell: r = 200 m, hB = 10 m, hu = 1.5 m, RIS in 10..200 m and 1..10 m.
    pub fn table_iii() -> Self {
        Self { radius: 200.0, bs_height: 10.0, user_height: 1.5, r_min: 10.0, r_max: 200.0, h_min: 1.0, h_max: 10.0 }
    }

    /// Desk-scale cell used by the test suite (r = 120 m).
    pub fn scaled() -> Self {
        Self { radius: 120.0, r_max: 120.0, ..Self::table_iii() }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.radius, self.bs_height, self.user_height, self.r_min, self.r_max, self.h_min, self.h_max];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("geometry values must be finite".into()));
        }
        if !(0.0 < self.r_min && self.r_min <= self.r_max && self.r_max <= self.radius) {
            return Err(Error::Validation("0 < r_min <= r_max <= r violated".into()));
        }
        if !(0.0 <= self.h_min && self.h_min <= self.h_max) {
            return Err(Error::Validation("0 <= h_min <= h_max violated".into()));
        }
        if self.user_height >= self.bs_height {
            return Err(Error::Validation("user height must be below BS height".into()));
        }
        Ok(())
    }

    pub fn clamp_distance(&self, d: f64) -> f64 {
        d.clamp(self.r_min, self.r_max)
    }

    pub fn clamp_height(&self, h: f64) -> f64 {
        h.clamp(self.h_min, self.h_max)
    }
}

/// RIS position `(d0, φ0, h0)` and orientation `φR`. Angles are stored in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisPose {
    pub d0: f64,
    pub phi0: f64,
    pub h0: f64,
    pub phi_r: f64,
}

impl RisPose {
    pub fn new(d0: f64, phi0: f64, h0: f64, phi_r: f64) -> Self {
        Self { d0, phi0: wrap_2pi(phi0), h0, phi_r: wrap_2pi(phi_r) }
    }

    pub fn within(&self, geom: &CellGeometry) -> bool {
        let eps = 1e-9;
        self.d0 >= geom.r_min - eps
            && self.d0 <= geom.r_max + eps
            && self.h0 >= geom.h_min - eps
            && self.h0 <= geom.h_max + eps
    }
}

/// User at horizontal distance `dk` and azimuth `φk`; height is the cell's user height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserLocation {
    pub dk: f64,
    pub phik: f64,
}

impl UserLocation {
    pub fn new(dk: f64, phik: f64) -> Self {
        Self { dk, phik }
    }

    pub fn cartesian(&self) -> (f64, f64) {
        (self.dk * self.phik.cos(), self.dk * self.phik.sin())
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        Self { dk: x.hypot(y), phik: wrap_2pi(y.atan2(x)) }
    }
}

/// Horizontal RIS-user distance by the law of cosines.
pub fn ris_user_distance(pose: &RisPose, user: &UserLocation) -> f64 {
    let sq = pose.d0 * pose.d0 + user.dk * user.dk - 2.0 * pose.d0 * user.dk * (pose.phi0 - user.phik).cos();
    sq.max(0.0).sqrt()
}

/// Angles of the BS-RIS and RIS-user links for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    /// Azimuth of arrival at the RIS from the BS, panel-relative.
    pub bs_ris_azimuth: f64,
    /// Elevation of arrival at the RIS from the BS.
    pub bs_ris_elevation: f64,
    /// Azimuth of departure from the RIS towards the user, panel-relative.
    pub ris_user_azimuth: f64,
    /// Elevation of departure from the RIS towards the user.
    pub ris_user_elevation: f64,
    /// Departure azimuth at the BS towards the RIS.
    pub bs_ris_departure: f64,
    /// Departure azimuth at the BS towards the user.
    pub bs_user_departure: f64,
    /// Horizontal RIS-user distance.
    pub ris_user_distance: f64,
}

/// Arrival angle at the RIS from the BS (azimuth, elevation). Needs only the pose.
pub fn bs_ris_angles(pose: &RisPose, geom: &CellGeometry) -> Result<(f64, f64)> {
    if pose.d0 <= 0.0 {
        return Err(Error::DegenerateGeometry("RIS at the BS position"));
    }
    let az = wrap_pi(FRAC_PI_2 - pose.phi0 - pose.phi_r);
    let el = ((geom.bs_height - pose.h0).abs() / pose.d0).atan();
    Ok((az, el))
}

pub fn link_angles(pose: &RisPose, user: &UserLocation, geom: &CellGeometry) -> Result<LinkAngles> {
    let (az0, el0) = bs_ris_angles(pose, geom)?;
    let dr = ris_user_distance(pose, user);
    if dr <= 0.0 {
        return Err(Error::DegenerateGeometry("user at the RIS position"));
    }
    let cos_tri = ((pose.d0 * pose.d0 + dr * dr - user.dk * user.dk) / (2.0 * pose.d0 * dr)).clamp(-1.0, 1.0);
    let az2 = wrap_pi(cos_tri.acos() - (FRAC_PI_2 - pose.phi0) - pose.phi_r);
    let el2 = ((geom.user_height - pose.h0).abs() / dr).atan();
    Ok(LinkAngles {
        bs_ris_azimuth: az0,
        bs_ris_elevation: el0,
        ris_user_azimuth: az2,
        ris_user_elevation: el2,
        bs_ris_departure: pose.phi0,
        bs_user_departure: user.phik,
        ris_user_distance: dr,
    })
}

/// `ω = 1` when the BS and the user both lie in the closed frontal half-plane of the panel.
pub fn coverage_indicator(pose: &RisPose, user: &UserLocation, geom: &CellGeometry) -> bool {
    match link_angles(pose, user, geom) {
        Ok(a) => a.bs_ris_azimuth.abs() <= FRAC_PI_2 && a.ris_user_azimuth.abs() <= FRAC_PI_2,
        Err(_) => false,
    }
}

/// Number of users in `users` covered by the RIS at `pose`.
pub fn covered_count(pose: &RisPose, users: &[UserLocation], geom: &CellGeometry) -> usize {
    users.iter().filter(|u| coverage_indicator(pose, u, geom)).count()
}
