//! Simulation and decision stack for a reconfigurable two-battery sUAS power system.
//!
//! The crate is organised in four layers:
//!
//! * [`battery`]: an equivalent-circuit lithium-polymer cell model with RC
//!   polarization and hysteresis, composed into a series-parallel pack with
//!   per-branch switches, plus degradation transforms and end-of-discharge
//!   prediction.
//! * [`vehicle`]: a hexacopter hover model with discrete LQR tracking,
//!   rotor-speed allocation through the mixing-matrix pseudoinverse, a motor
//!   current fit, mission reference trajectories, and a first-order gust
//!   model with steady wind.
//! * [`mdp`]: the battery-switching decision process: telemetry encoding,
//!   reward shaping, value iteration, and per-condition policy storage.
//! * [`montecarlo`]: closed-loop flight simulation wiring the layers
//!   together, scenario sampling, empirical transition-model estimation,
//!   and four scripted case studies.
//!
//! Shared configuration lives in [`config`]. Everything is deterministic
//! given a seed: identical inputs produce identical traces, tensors, and
//! policies.

pub mod battery;
pub mod config;
pub mod mdp;
pub mod montecarlo;
pub mod vehicle;

pub use battery::{
    apply_degradation, cell_step, cell_voltage, estimate_eod, AmbientTemp, BatteryError,
    CellParams, CellState, FadeKind, HealthCondition, HealthGrade, OcvCurve, PackConfig,
    PackState,
};
pub use config::{ConfigError, SimConfig};
pub use mdp::{
    encode_state, reward, value_iteration, Action, ConditionKey, MdpError, MdpState, Policy,
    PolicyStore, RewardTable, RewardWeights, Telemetry, TransitionTensor,
};
pub use montecarlo::{
    estimate_condition, estimate_transitions, run_case_study, sample_scenario,
    simulate_flight, FlightContext, FlightOutcome, FlightScenario, FlightTrace,
    ScenarioRanges, SimError,
};
pub use vehicle::{
    dlqr_gains, motor_current, step_dynamics, total_battery_current, GustCategory, MissionPlan,
    MotorAllocator, MotorCurrentFit, VehicleError, VehicleParams, VehicleState, WindModel,
};
