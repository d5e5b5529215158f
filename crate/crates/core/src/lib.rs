//! RIS placement for wideband mmWave MIMO cells.
//!
//! The crate models a single cell with a multi-antenna BS at the origin, K
//! single-antenna users and one reconfigurable intelligent surface (RIS), and
//! answers the question *where should the RIS go, and how should it face?*
//!
//! * [`geometry`] places BS, users and RIS and decides which users the panel serves.
//! * [`channel`] draws wideband Rician channels with per-subcarrier beam squint.
//! * [`rate`] evaluates ZF/MMSE rates by Monte Carlo and in closed form.
//! * [`deployment`] optimizes the RIS pose (heuristic plus exhaustive, SGD,
//!   random and one-sample baselines).
//! * [`phase`] optimizes RIS phase shifts for a fixed pose.
//! * [`harness`] parses experiment configs, runs sweeps and writes CSV.
//!
//! Runnable examples live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `channel_realization` | steering vectors, beam squint, one channel draw |
//! | `closed_form_rates` | closed-form rate vs Monte Carlo across transmit power |
//! | `heuristic_deployment` | the coordinate-descent placement with its traces |
//! | `baseline_comparison` | heuristic vs exhaustive, SGD, random and one-sample |
//! | `phase_shifters` | continuous and quantized phase optimization |
//! | `coverage_map` | served users as a function of the panel orientation |
//! | `sweep_from_config` | a TOML experiment spec run end to end to CSV |

pub mod channel;
pub mod deployment;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod numeric;
pub mod phase;
pub mod rate;
pub mod rng;

pub use channel::{ChannelRealization, LinkLayout, SystemConfig, C64};
pub use deployment::{DeploymentResult, Method, OptimizerSettings, UserDistribution};
pub use error::{Error, Result};
pub use geometry::{CellGeometry, RisPose, UserLocation};
pub use phase::PhaseConfig;
pub use rate::{ClosedFormContext, RateSummary};
