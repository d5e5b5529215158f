//! How many users the panel serves as its orientation turns, for a fixed RIS
//! position, on each user distribution.

use std::f64::consts::FRAC_PI_4;

use ris_deploy::deployment::optimize_orientation;
use ris_deploy::geometry::covered_count;
use ris_deploy::numeric::TWO_PI;
use ris_deploy::rng::stream;
use ris_deploy::{CellGeometry, RisPose, UserDistribution};

fn main() {
    let geom = CellGeometry::scaled();
    let base = RisPose::new(10.0, FRAC_PI_4, 9.0, 0.0);
    let dists = [
        ("uniform", UserDistribution::uniform_disc(geom.radius)),
        ("one hotspot", UserDistribution::one_hotspot(geom.radius)),
        ("multi hotspot", UserDistribution::multi_hotspot(geom.radius)),
    ];
    for (name, dist) in dists {
        let users = dist.sample(400, &mut stream(3, &[]));
        let row: String = (0..24)
            .map(|i| {
                let p = RisPose { phi_r: TWO_PI * i as f64 / 24.0, ..base };
                let n = covered_count(&p, &users, &geom);
                [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'][(n * 9) / users.len()]
            })
            .collect();
        let best = optimize_orientation(&base, &users, 360, &geom);
        println!("{name:>14} |{row}| best φR = {best:.3} rad");
    }
    println!("{:>14}  0{:>23}", "φR", "2π");
}
