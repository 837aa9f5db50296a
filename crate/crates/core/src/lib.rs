//! Co-carrying control for a planar two-link arm: a mass-damper admittance
//! reference feeding a time-varying passive velocity field controller with
//! finite-time energy compensation, the comparison baselines, and a
//! deterministic simulation of the four-phase carrying scenario.

pub mod admittance;
pub mod baselines;
pub mod config;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod field;
pub mod human;
pub mod output;
pub mod pvfc;
pub mod sim;
pub mod verify;

pub use config::{parse_config, render_config};
pub use error::{Error, Result};
pub use sim::{compare_table, run_scenario, ScenarioConfig, Strategy, SummaryMetrics, Trace, TraceRow};
