//! Experiment orchestration: TOML specs, seeded sweeps, CSV output and the
//! oracle checks behind `ris-deploy validate`.
//!
//! Powers enter and leave the harness in dBm; everything below it works in watts.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod validation;

pub use config::{emit_config, parse_config, ExperimentSpec, PhaseSpec, Sweep, SweepVariable};
pub use csv::{emit_csv, emit_csv_string, parse_csv};
pub use experiment::{apply_sweep, deploy_method, evaluate_pose, run_experiment, ResultRow};
pub use validation::{run_oracle_suite, CheckReport};
