//! End-of-discharge prediction by forward simulation.
//!
//! The estimator clones the pack and plays it forward at a constant predicted
//! demand until each connected branch has had some cell touch the cutoff
//! voltage, or the horizon expires. Switch configuration is frozen at the
//! current setting; open branches rest and report the horizon.

use serde::{Deserialize, Serialize};

use super::{BatteryError, PackState};

/// Prediction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EodSettings {
    /// Prediction step, seconds.
    pub dt: f64,
    /// Give-up time, seconds. Branches that never cross report this value.
    pub horizon: f64,
}

impl Default for EodSettings {
    fn default() -> Self {
        Self {
            dt: 1.0,
            horizon: 3600.0,
        }
    }
}

/// Per-branch and pack-level predicted time to cutoff, seconds from now.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EodEstimate {
    /// First time any connected cell reaches cutoff.
    pub pack: f64,
    /// First crossing per branch; open branches report the horizon.
    pub branch: [f64; 2],
}

/// Predicts time to cutoff at constant total demand `predicted_current`.
///
/// A non-positive prediction means no net discharge, so every branch reports
/// the horizon. A pack already at or below cutoff reports zero.
pub fn estimate_eod(
    pack: &PackState,
    predicted_current: f64,
    settings: &EodSettings,
) -> Result<EodEstimate, BatteryError> {
    if !predicted_current.is_finite() {
        return Err(BatteryError::NonFiniteCurrent(predicted_current));
    }
    if !(settings.dt > 0.0) || !(settings.horizon > 0.0) {
        return Err(BatteryError::InvalidParams(
            "prediction step and horizon must be positive".into(),
        ));
    }
    let mut crossing = [settings.horizon; 2];
    if predicted_current <= 0.0 || pack.switch_on.iter().all(|&on| !on) {
        return Ok(EodEstimate {
            pack: settings.horizon,
            branch: crossing,
        });
    }

    let mut sim = pack.clone();
    let mut crossed = [false, false];
    for j in 0..2 {
        if !sim.switch_on[j] {
            crossed[j] = true; // never reports earlier than the horizon
        }
    }
    let steps = (settings.horizon / settings.dt).ceil() as u64;
    for k in 0..=steps {
        let t = k as f64 * settings.dt;
        if t > settings.horizon {
            break;
        }
        let info = sim.peek(predicted_current)?;
        for j in 0..2 {
            if !crossed[j] && info.min_cell_voltage[j] <= sim.config.cutoff_voltage {
                crossed[j] = true;
                crossing[j] = t;
            }
        }
        if crossed.iter().all(|&c| c) {
            break;
        }
        sim.step(predicted_current, settings.dt)?;
    }

    let pack_eod = (0..2)
        .filter(|&j| pack.switch_on[j])
        .map(|j| crossing[j])
        .fold(settings.horizon, f64::min);
    Ok(EodEstimate {
        pack: pack_eod,
        branch: crossing,
    })
}
