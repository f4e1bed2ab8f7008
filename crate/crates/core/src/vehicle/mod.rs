//! Vehicle layer: hexacopter hover dynamics, rotor allocation, discrete LQR
//! tracking, motor electrical load, wind, and mission references.

pub mod allocation;
pub mod dlqr;
pub mod dynamics;
pub mod mission;
pub mod motor;
pub mod wind;

pub use allocation::{Allocation, MotorAllocator};
pub use dlqr::{dlqr_gains, hover_linearization, DlqrGains, DlqrWeights};
pub use dynamics::{step_dynamics, VehicleParams, VehicleState};
pub use mission::{MissionPlan, Phase};
pub use motor::{motor_current, total_battery_current, MotorCurrentFit};
pub use wind::{GustCategory, WindModel};

use thiserror::Error;

/// Errors from the vehicle layer.
#[derive(Debug, Error)]
pub enum VehicleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid mission: {0}")]
    InvalidMission(String),
    #[error("state or input is not finite")]
    NonFinite,
    #[error("gain computation did not converge: {0}")]
    NoConvergence(String),
}
