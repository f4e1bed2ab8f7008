//! Closed-loop flight simulation and transition estimation.
//!
//! A flight couples the pack, vehicle, and decision layers: the controller
//! tracks a mission profile at the control rate, the pack supplies whatever
//! current the motors draw, and once per second the telemetry is graded into
//! a state so a switching action can be chosen. [`simulate_flight`] runs one
//! such flight; [`estimate_transitions`] turns a batch of recorded flights
//! into a transition model; [`run_case_study`] reproduces the four scripted
//! evaluation setups.

mod casestudy;
mod estimate;
mod flight;
mod scenario;
mod trace_io;

pub use casestudy::{run_case_study, CaseStudyReport, ScenarioReport};
pub use estimate::{estimate_condition, estimate_transitions, EstimationReport};
pub use flight::{
    simulate_flight, simulate_flight_on, ActionSource, BatteryTick, EpochRecord,
    FlightContext, FlightOutcome, FlightTrace, TraceDetail, VehicleTick,
};
pub use scenario::{
    sample_scenario, ActionSpec, FlightScenario, MissionSizing, ScenarioRanges,
};
pub use trace_io::{write_battery_csv, write_epochs_csv, write_vehicle_csv, RunMeta};

use crate::battery::BatteryError;
use crate::config::ConfigError;
use crate::mdp::MdpError;
use crate::vehicle::VehicleError;
use thiserror::Error;

/// Failures raised while setting up or running simulations.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("bad scenario: {0}")]
    BadScenario(String),
    #[error(transparent)]
    Battery(#[from] BatteryError),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
