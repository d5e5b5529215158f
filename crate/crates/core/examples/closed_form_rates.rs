//! Closed-form rate approximation and lower bound against Monte Carlo.

use std::f64::consts::PI;

use ris_deploy::numeric::dbm_to_watts;
use ris_deploy::rate::{approx_sum_rate, lower_bound_sum_rate, monte_carlo_sum_rate, ClosedFormContext};
use ris_deploy::{CellGeometry, LinkLayout, RisPose, SystemConfig, UserLocation, C64};

fn main() -> ris_deploy::Result<()> {
    let geom = CellGeometry::scaled();
    let users = [UserLocation::new(50.0, 2.0 * PI / 3.0), UserLocation::new(70.0, 5.0 * PI / 6.0), UserLocation::new(60.0, 1.5 * PI)];
    let pose = RisPose::new(10.0, PI, 9.0, PI);

    for (label, base) in [("Rician", SystemConfig::scaled()), ("Rayleigh", SystemConfig { k0: 0.0, k1: 0.0, k2: 0.0, ..SystemConfig::scaled() })] {
        println!("{label} fading");
        println!("{:>6} {:>10} {:>10} {:>10}", "dBm", "MC", "approx", "lower");
        let theta = vec![C64::new(1.0, 0.0); base.nr()];
        for p in (0..=30).step_by(5) {
            let cfg = SystemConfig { max_power_w: dbm_to_watts(p as f64), ..base.clone() };
            let mc = monte_carlo_sum_rate(&cfg, &geom, &pose, &users, &theta, 300, 9)?;
            let ctx = ClosedFormContext::new(&LinkLayout::new(&cfg, &geom, &pose, &users)?, &theta);
            println!("{p:>6} {:>10.3} {:>10.3} {:>10.3}", mc.sum_rate, approx_sum_rate(&ctx, &cfg), lower_bound_sum_rate(&ctx, &cfg));
        }
    }
    Ok(())
}
