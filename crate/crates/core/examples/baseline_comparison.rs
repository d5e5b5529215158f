//! Every placement method on the same cell, scored by Monte-Carlo ZF sum-rate.

use std::time::Instant;

use ris_deploy::harness::{deploy_method, evaluate_pose, ExperimentSpec};
use ris_deploy::numeric::dbm_to_watts;
use ris_deploy::{Method, UserDistribution};

fn main() -> ris_deploy::Result<()> {
    let mut spec = ExperimentSpec::scaled();
    spec.scenario = UserDistribution::multi_hotspot(spec.geometry.radius);
    spec.methods = Method::ALL.to_vec();
    spec.power_dbm = 25.0;
    spec.system.max_power_w = dbm_to_watts(25.0);
    spec.trials = 200;
    spec.settings.sgd.iterations = 100;

    println!("{:<12} {:>9} {:>8} {:>7} {:>7} {:>7} {:>8}", "method", "bps/Hz", "±", "d0", "h0", "φ0", "time");
    for i in 0..spec.methods.len() {
        let t = Instant::now();
        let dep = deploy_method(&spec, i)?;
        let rate = evaluate_pose(&spec, &dep.pose, i)?;
        let p = dep.pose;
        println!(
            "{:<12} {:>9.3} {:>8.3} {:>7.1} {:>7.2} {:>7.3} {:>7.2}s",
            spec.methods[i].as_str(),
            rate.sum_rate,
            rate.sum_std_error,
            p.d0,
            p.h0,
            p.phi0,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
