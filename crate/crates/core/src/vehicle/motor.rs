//! Motor electrical load.
//!
//! Each motor draws current as a quadratic in rotor speed, fitted at the
//! nominal pack voltage. The pack sees that demand scaled by nominal over
//! actual bus voltage, so a sagging pack is asked for more current to hold
//! the same rotors, which is what makes the demand curve climb toward the
//! end of a flight.

use serde::{Deserialize, Serialize};

use super::VehicleError;

/// Quadratic current fit `i(omega) = a2 omega^2 + a1 omega + a0`, amps for
/// omega in rad/s, valid at the nominal bus voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotorCurrentFit {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl Default for MotorCurrentFit {
    fn default() -> Self {
        Self {
            a2: 2.0e-7,
            a1: 0.0,
            a0: 0.2,
        }
    }
}

impl MotorCurrentFit {
    pub fn validate(&self) -> Result<(), VehicleError> {
        for (name, v) in [("a2", self.a2), ("a1", self.a1), ("a0", self.a0)] {
            if !v.is_finite() || v < 0.0 {
                return Err(VehicleError::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Current drawn by one motor at rotor speed `omega` (rad/s), at nominal
/// voltage.
pub fn motor_current(fit: &MotorCurrentFit, omega: f64) -> f64 {
    fit.a2 * omega * omega + fit.a1 * omega + fit.a0
}

/// Total pack current for the summed motor demand `motor_total` (amps at
/// nominal voltage) when the bus actually sits at `bus_voltage`.
pub fn total_battery_current(
    motor_total: f64,
    bus_voltage: f64,
    nominal_voltage: f64,
) -> Result<f64, VehicleError> {
    if !motor_total.is_finite() || !bus_voltage.is_finite() || !nominal_voltage.is_finite() {
        return Err(VehicleError::NonFinite);
    }
    if nominal_voltage <= 0.0 {
        return Err(VehicleError::InvalidParams(
            "nominal voltage must be positive".into(),
        ));
    }
    if bus_voltage < 1.0 {
        return Err(VehicleError::InvalidParams(format!(
            "bus voltage collapsed to {bus_voltage} V"
        )));
    }
    Ok(motor_total * nominal_voltage / bus_voltage)
}
