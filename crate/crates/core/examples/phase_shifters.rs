//! Phase-shift optimization for one channel draw: continuous phases, then
//! 1-, 2- and 3-bit shifters, against random phases.

use ris_deploy::deployment::heuristic_deploy;
use ris_deploy::phase::{optimize_phases, zf_sum_rate, PhaseConfig, PhaseSettings};
use ris_deploy::rng::stream;
use ris_deploy::{CellGeometry, LinkLayout, OptimizerSettings, SystemConfig, UserDistribution};

fn main() -> ris_deploy::Result<()> {
    let cfg = SystemConfig::scaled();
    let geom = CellGeometry::scaled();
    let dist = UserDistribution::multi_hotspot(geom.radius);
    let pose = heuristic_deploy(&dist, &OptimizerSettings::default(), &geom, &cfg, &mut stream(1, &[]))?.pose;

    let mut rng = stream(2, &[]);
    let users = dist.sample(cfg.users, &mut rng);
    let real = LinkLayout::new(&cfg, &geom, &pose, &users)?.sample(&mut rng);
    let settings = PhaseSettings::default();

    let cont = optimize_phases(&real, &cfg, &PhaseConfig::identity(cfg.nr()), &settings)?;
    println!("continuous trace: {:?}", cont.trace.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>());
    for bits in 1..=3 {
        let q = optimize_phases(&real, &cfg, &PhaseConfig::identity(cfg.nr()).with_bits(Some(bits)), &settings)?;
        println!("{bits}-bit: {:.4} bps/Hz ({:.2}% of continuous)", q.final_rate, 100.0 * q.final_rate / cont.final_rate);
    }
    let random: f64 = (0..100)
        .map(|_| zf_sum_rate(&real, &PhaseConfig::random(cfg.nr(), &mut rng).theta, &cfg).map(|(g, _)| g))
        .sum::<ris_deploy::Result<f64>>()?
        / 100.0;
    println!("random phases: {random:.4} bps/Hz, continuous: {:.4} bps/Hz", cont.final_rate);
    Ok(())
}
