//! One wideband channel draw for a three-user cell, with the beam squint of
//! the BS steering vector across subcarriers.

use std::f64::consts::FRAC_PI_4;

use ris_deploy::channel::{effective_channel, spatial_direction, steering_ula, subcarrier_frequencies, LinkLayout};
use ris_deploy::rng::stream;
use ris_deploy::{CellGeometry, RisPose, SystemConfig, UserLocation, C64};

fn main() -> ris_deploy::Result<()> {
    let cfg = SystemConfig::scaled();
    let geom = CellGeometry::scaled();
    let pose = RisPose::new(10.0, FRAC_PI_4, 9.0, FRAC_PI_4);
    let users = [UserLocation::new(45.0, 0.7), UserLocation::new(55.0, 0.9), UserLocation::new(80.0, 2.5)];

    // Beam squint: the same physical angle maps to a different spatial
    // direction on every subcarrier.
    let reference = steering_ula(cfg.nt, spatial_direction(cfg.carrier_hz, 0.6, &cfg));
    for (m, f) in subcarrier_frequencies(&cfg).iter().enumerate() {
        let b = steering_ula(cfg.nt, spatial_direction(*f, 0.6, &cfg));
        let overlap = reference.dotc(&b).norm() / cfg.nt as f64;
        println!("subcarrier {m}: {:.3} GHz, |b(f)ᴴ b(fc)|/Nt = {overlap:.4}", f / 1e9);
    }

    let layout = LinkLayout::new(&cfg, &geom, &pose, &users)?;
    println!("served by the RIS: {:?}", layout.omega);
    println!("β0 = {:.3e}, β1 = {:?}, β2 = {:?}", layout.gains.bs_ris, layout.gains.bs_user, layout.gains.ris_user);

    let real = layout.sample(&mut stream(1, &[]));
    let theta = vec![C64::new(1.0, 0.0); cfg.nr()];
    for (m, h) in effective_channel(&real, &theta)?.iter().enumerate() {
        let norms: Vec<String> = h.row_iter().map(|r| format!("{:.3e}", r.norm_squared())).collect();
        println!("m={m} ‖h_k‖² = [{}]", norms.join(", "));
    }
    Ok(())
}
