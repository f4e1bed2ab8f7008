//! Single-cell equivalent circuit model with RC polarization and hysteresis.
//!
//! Discharge current is positive. One simulation step with current `i` held
//! over `dt` updates, for each RC pair `j`:
//!
//! ```text
//! i_r[j]' = f_j * i_r[j] + (1 - f_j) * i        f_j = exp(-dt / (r_j c_j))
//! ```
//!
//! state of charge and hysteresis:
//!
//! ```text
//! z' = z - eta * dt * i / q
//! h' = a_h * h + (a_h - 1) * sgn(i)             a_h = exp(-|eta i gamma dt / q|)
//! ```
//!
//! and the terminal voltage is
//!
//! ```text
//! v = ocv(z) + m0 * s + m * h - sum_j r_j i_r[j] - r0 * i
//! ```
//!
//! The RC polarization term is subtracted so that a discharging cell sags
//! below OCV once the branch currents settle. Setting
//! `rc_polarization_adds = true` flips that term back to addition for
//! comparison against formulations that state it with a plus sign.

use serde::{Deserialize, Serialize};

use super::{BatteryError, OcvCurve};

/// One RC polarization pair: resistance in ohms, capacitance in farads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcPair {
    pub r: f64,
    pub c: f64,
}

impl RcPair {
    /// Per-step decay factor for a step of `dt` seconds.
    pub fn decay(&self, dt: f64) -> f64 {
        (-dt / (self.r * self.c)).exp()
    }
}

/// Static cell parameters. `q` is total capacity in ampere-seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    /// Series resistance, ohms.
    pub r0: f64,
    /// RC polarization pairs.
    pub rc_pairs: Vec<RcPair>,
    /// Capacity, ampere-seconds.
    pub q: f64,
    /// Hysteresis rate constant (dimensionless).
    pub gamma: f64,
    /// Dynamic hysteresis magnitude, volts.
    pub m: f64,
    /// Instantaneous hysteresis magnitude, volts.
    pub m0: f64,
    /// Coulombic efficiency applied while charging (i < 0).
    pub eta_charge: f64,
    /// Coulombic efficiency applied while discharging (i >= 0).
    pub eta_discharge: f64,
    /// Open-circuit voltage curve.
    pub ocv: OcvCurve,
    /// Add the RC polarization term instead of subtracting it.
    #[serde(default)]
    pub rc_polarization_adds: bool,
}

impl CellParams {
    pub fn validate(&self) -> Result<(), BatteryError> {
        if !(self.r0 >= 0.0) || !self.r0.is_finite() {
            return Err(BatteryError::InvalidParams("r0 must be >= 0".into()));
        }
        if !(self.q > 0.0) || !self.q.is_finite() {
            return Err(BatteryError::InvalidParams("q must be > 0".into()));
        }
        for (j, p) in self.rc_pairs.iter().enumerate() {
            if !(p.r > 0.0 && p.c > 0.0) {
                return Err(BatteryError::InvalidParams(format!(
                    "rc pair {j} must have positive r and c"
                )));
            }
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("m", self.m),
            ("m0", self.m0),
            ("eta_charge", self.eta_charge),
            ("eta_discharge", self.eta_discharge),
        ] {
            if !v.is_finite() {
                return Err(BatteryError::InvalidParams(format!("{name} not finite")));
            }
        }
        Ok(())
    }
}

/// Dynamic cell state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    /// State of charge in [0, 1].
    pub z: f64,
    /// Per-RC-pair polarization currents, amps.
    pub i_r: Vec<f64>,
    /// Hysteresis state in [-1, 1].
    pub h: f64,
    /// Sign memory of the last nonzero current.
    pub s: f64,
}

impl CellState {
    /// Rested cell at the given state of charge: no polarization, no
    /// hysteresis memory.
    pub fn rested(z: f64, n_rc: usize) -> Self {
        Self {
            z: z.clamp(0.0, 1.0),
            i_r: vec![0.0; n_rc],
            h: 0.0,
            s: 0.0,
        }
    }
}

/// Result of one cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStep {
    pub state: CellState,
    /// True when the raw state of charge left [0, 1] and was clamped.
    pub clamped: bool,
}

/// Advances one cell by `dt` seconds at constant current `i` (amps, discharge
/// positive). State of charge is clamped to [0, 1]; the flag on the result
/// reports when that happened.
pub fn cell_step_detailed(
    state: &CellState,
    params: &CellParams,
    i: f64,
    dt: f64,
) -> Result<CellStep, BatteryError> {
    if !i.is_finite() {
        return Err(BatteryError::NonFiniteCurrent(i));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(BatteryError::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    debug_assert_eq!(state.i_r.len(), params.rc_pairs.len());

    let eta = if i >= 0.0 {
        params.eta_discharge
    } else {
        params.eta_charge
    };

    let i_r = state
        .i_r
        .iter()
        .zip(&params.rc_pairs)
        .map(|(&ir, pair)| {
            let f = pair.decay(dt);
            f * ir + (1.0 - f) * i
        })
        .collect();

    let z_raw = state.z - eta * dt * i / params.q;
    let z = z_raw.clamp(0.0, 1.0);
    let clamped = z != z_raw;

    // f64::signum(0.0) is 1.0, so zero current is handled separately: a_h = 1
    // there and hysteresis holds its value.
    let a_h = (-(eta * i * params.gamma * dt / params.q).abs()).exp();
    let h = if i == 0.0 {
        state.h
    } else {
        (a_h * state.h + (a_h - 1.0) * i.signum()).clamp(-1.0, 1.0)
    };
    let s = if i != 0.0 { i.signum() } else { state.s };

    Ok(CellStep {
        state: CellState { z, i_r, h, s },
        clamped,
    })
}

/// Advances one cell by `dt` seconds at constant current `i`.
pub fn cell_step(
    state: &CellState,
    params: &CellParams,
    i: f64,
    dt: f64,
) -> Result<CellState, BatteryError> {
    cell_step_detailed(state, params, i, dt).map(|s| s.state)
}

/// Terminal voltage of a cell in `state` while carrying current `i`.
pub fn cell_voltage(state: &CellState, params: &CellParams, i: f64) -> Result<f64, BatteryError> {
    if !i.is_finite() {
        return Err(BatteryError::NonFiniteCurrent(i));
    }
    let rc: f64 = state
        .i_r
        .iter()
        .zip(&params.rc_pairs)
        .map(|(&ir, pair)| pair.r * ir)
        .sum();
    let rc_term = if params.rc_polarization_adds { rc } else { -rc };
    Ok(params.ocv.voltage_at(state.z) + params.m0 * state.s + params.m * state.h + rc_term
        - params.r0 * i)
}
