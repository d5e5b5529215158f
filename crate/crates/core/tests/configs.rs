use std::fs;
use std::path::Path;

use ris_deploy::deployment::DistributionKind;
use ris_deploy::harness::{emit_config, parse_config, SweepVariable};

fn config(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn every_shipped_config_parses_and_round_trips() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let spec = parse_config(&fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(parse_config(&emit_config(&spec)).unwrap(), spec, "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn full_scale_config_matches_table_values() {
    let spec = parse_config(&config("table_iii.toml")).unwrap();
    let s = &spec.system;
    assert_eq!((s.nt, s.nr(), s.subcarriers, s.users), (128, 100, 16, 4));
    assert_eq!(spec.geometry.radius, 200.0);
    assert!((s.noise_power_w - 10f64.powf(-13.4)).abs() < 1e-25);
}

#[test]
fn scaled_config_matches_preset_system() {
    let spec = parse_config(&config("scaled.toml")).unwrap();
    let s = &spec.system;
    assert_eq!((s.nt, s.nr_x, s.nr_y, s.subcarriers, s.users), (32, 4, 4, 4, 3));
    assert_eq!(spec.trials, 500);
    assert_eq!(spec.sweep.variable, SweepVariable::PowerDbm);
    assert_eq!(spec.sweep.values.len(), 7);
}

#[test]
fn integer_sweep_values_are_accepted() {
    let spec = parse_config(&config("multi_hotspot_nr.toml")).unwrap();
    assert_eq!(spec.sweep.values, vec![4.0, 9.0, 16.0, 25.0, 36.0]);
    assert_eq!(spec.scenario.kind, DistributionKind::MultiHotspot);
}

#[test]
fn custom_centers_are_read() {
    let spec = parse_config(&config("custom_centers.toml")).unwrap();
    assert_eq!(spec.scenario.centers, vec![(60.0, 0.5), (80.0, 2.0)]);
    assert_eq!(spec.scenario.hotspot_radius, 15.0);
}
