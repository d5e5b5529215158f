//! Heuristic RIS placement on the one-hotspot cell, printing the per-iteration trace.

use ris_deploy::deployment::heuristic_deploy;
use ris_deploy::geometry::covered_count;
use ris_deploy::rng::stream;
use ris_deploy::{CellGeometry, OptimizerSettings, SystemConfig, UserDistribution};

fn main() -> ris_deploy::Result<()> {
    let cfg = SystemConfig::scaled();
    let geom = CellGeometry::scaled();
    let dist = UserDistribution::one_hotspot(geom.radius);
    let settings = OptimizerSettings::default();

    let r = heuristic_deploy(&dist, &settings, &geom, &cfg, &mut stream(42, &[]))?;
    for (i, (obj, served)) in r.objective_trace.iter().zip(&r.served_count_trace).enumerate() {
        println!("iteration {}: Σκ = {obj:.4e}, served {served}/{}", i + 1, settings.samples);
    }
    let p = r.pose;
    println!("pose: d0 = {:.1} m, φ0 = {:.3} rad, h0 = {:.3} m, φR = {:.3} rad", p.d0, p.phi0, p.h0, p.phi_r);

    let fresh = dist.sample(1000, &mut stream(43, &[]));
    println!("fresh users served: {}/1000", covered_count(&p, &fresh, &geom));
    Ok(())
}
