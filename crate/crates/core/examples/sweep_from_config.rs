//! Run a TOML experiment spec end to end and print the CSV.
//!
//! `cargo run --release --example sweep_from_config -- crates/core/configs/scaled.toml`

use std::fs;

use ris_deploy::harness::{emit_csv_string, parse_config, run_experiment};

fn main() -> ris_deploy::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => fs::read_to_string(path)?,
        None => {
            "trials = 50\nmethods = [\"heuristic\", \"random\"]\n[scenario]\nkind = \"one_hotspot\"\n[system]\nNt = 16\nNr_x = 3\nNr_y = 3\nM = 2\nK = 2\n[geometry]\nr = 120.0\n[sweep]\nvariable = \"power_dbm\"\nvalues = [10.0, 20.0, 30.0]\n"
                .to_string()
        }
    };
    let spec = parse_config(&text)?;
    let rows = run_experiment(&spec);
    print!("{}", emit_csv_string(&rows));
    Ok(())
}
