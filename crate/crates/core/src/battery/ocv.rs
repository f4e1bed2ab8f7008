//! Open-circuit voltage as a piecewise-linear function of state of charge.

use serde::{Deserialize, Serialize};

use super::BatteryError;

/// Piecewise-linear OCV(z) curve. Knots are (soc, volts) pairs with strictly
/// increasing soc and non-decreasing voltage. Queries outside the knot range
/// clamp to the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcvCurve {
    knots: Vec<(f64, f64)>,
}

impl OcvCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, BatteryError> {
        if knots.len() < 2 {
            return Err(BatteryError::InvalidCurve(
                "need at least two knots".into(),
            ));
        }
        for pair in knots.windows(2) {
            let ((z0, v0), (z1, v1)) = (pair[0], pair[1]);
            if !(z1 > z0) {
                return Err(BatteryError::InvalidCurve(format!(
                    "soc must be strictly increasing, got {z0} then {z1}"
                )));
            }
            if v1 < v0 {
                return Err(BatteryError::InvalidCurve(format!(
                    "voltage must be non-decreasing, got {v0} then {v1}"
                )));
            }
        }
        if knots
            .iter()
            .any(|(z, v)| !z.is_finite() || !v.is_finite())
        {
            return Err(BatteryError::InvalidCurve("non-finite knot".into()));
        }
        Ok(Self { knots })
    }

    /// Typical lipo discharge curve, 3.3 V empty to 4.2 V full with the usual
    /// mid-range plateau. Used when no measured curve is supplied.
    pub fn default_lipo() -> Self {
        Self::new(vec![
            (0.00, 3.30),
            (0.05, 3.55),
            (0.10, 3.68),
            (0.20, 3.74),
            (0.30, 3.77),
            (0.40, 3.79),
            (0.50, 3.82),
            (0.60, 3.85),
            (0.70, 3.89),
            (0.80, 3.95),
            (0.90, 4.05),
            (0.95, 4.11),
            (1.00, 4.20),
        ])
        .expect("default curve is valid")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Interpolated OCV at state of charge `z`, clamped to the knot range.
    pub fn voltage_at(&self, z: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if z <= first.0 {
            return first.1;
        }
        if z >= last.0 {
            return last.1;
        }
        // partition_point finds the first knot with soc > z
        let hi = self.knots.partition_point(|&(kz, _)| kz <= z);
        let (z0, v0) = self.knots[hi - 1];
        let (z1, v1) = self.knots[hi];
        v0 + (v1 - v0) * (z - z0) / (z1 - z0)
    }

    /// Lowest state of charge at which the curve reaches `v`, clamped to the
    /// knot range. Flat segments resolve to their left edge.
    pub fn soc_for_voltage(&self, v: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if v <= first.1 {
            return first.0;
        }
        if v >= last.1 {
            return last.0;
        }
        for pair in self.knots.windows(2) {
            let ((z0, v0), (z1, v1)) = (pair[0], pair[1]);
            if v >= v0 && v <= v1 {
                if v1 == v0 {
                    return z0;
                }
                return z0 + (z1 - z0) * (v - v0) / (v1 - v0);
            }
        }
        last.0
    }
}

/// Average of a charge and a discharge sweep, evaluated on the union of both
/// knot grids restricted to the overlapping soc range. This is the usual way
/// of cancelling hysteresis out of slow-cycle data.
pub fn ocv_from_cycles(charge: &OcvCurve, discharge: &OcvCurve) -> Result<OcvCurve, BatteryError> {
    let lo = charge.knots[0].0.max(discharge.knots[0].0);
    let hi = charge.knots[charge.knots.len() - 1]
        .0
        .min(discharge.knots[discharge.knots.len() - 1].0);
    if !(hi > lo) {
        return Err(BatteryError::EmptyOverlap);
    }
    let mut grid: Vec<f64> = charge
        .knots
        .iter()
        .chain(discharge.knots.iter())
        .map(|&(z, _)| z)
        .filter(|&z| z >= lo && z <= hi)
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let knots = grid
        .into_iter()
        .map(|z| (z, 0.5 * (charge.voltage_at(z) + discharge.voltage_at(z))))
        .collect();
    OcvCurve::new(knots)
}
