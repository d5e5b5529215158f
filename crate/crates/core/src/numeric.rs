//! Small numeric helpers shared across modules.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(TWO_PI);
    if y >= TWO_PI {
        0.0
    } else {
        y
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = wrap_2pi(x);
    if y > PI {
        y - TWO_PI
    } else {
        y
    }
}

/// Neumaier compensated sum. Order of the input fixes the result bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in xs {
        s.add(x);
    }
    s.value()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}
