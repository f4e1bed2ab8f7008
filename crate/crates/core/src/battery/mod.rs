//! Battery layer: cell electrochemistry, health degradation, the two-branch
//! switchable pack, and end-of-discharge prediction.

pub mod cell;
pub mod degradation;
pub mod eod;
pub mod ocv;
pub mod pack;

pub use cell::{cell_step, cell_step_detailed, cell_voltage, CellParams, CellState, CellStep, RcPair};
pub use degradation::{apply_degradation, AmbientTemp, FadeKind, HealthCondition, HealthGrade};
pub use eod::{estimate_eod, EodEstimate, EodSettings};
pub use ocv::OcvCurve;
pub use pack::{Cell, PackConfig, PackState, PackStepInfo};

use thiserror::Error;

/// Errors from the battery layer.
#[derive(Debug, Error)]
pub enum BatteryError {
    #[error("current is not finite: {0}")]
    NonFiniteCurrent(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid open-circuit voltage curve: {0}")]
    InvalidCurve(String),
    #[error("charge and discharge curves share no state-of-charge range")]
    EmptyOverlap,
    #[error("demand of {demand} A with every branch disconnected")]
    AllBranchesOff { demand: f64 },
}

#[cfg(test)]
pub mod test_fixtures {
    //! Canonical 3-cell parameter set used across the battery tests.

    use super::{Cell, CellParams, OcvCurve, PackConfig, PackState, RcPair};

    /// Parameters for one of the three characterized cells (index 0..3).
    pub fn table_cell(idx: usize) -> CellParams {
        let (r0, r1, c1, gamma, m, m0) = match idx {
            0 => (0.0060, 0.0099, 51_500.0, 300.0, 0.0178, 0.0051),
            1 => (0.0055, 0.0088, 52_500.0, 200.0, 0.0312, 0.0053),
            2 => (0.0055, 0.0087, 60_500.0, 300.0, 0.0184, 0.0052),
            _ => panic!("only three cells are characterized"),
        };
        CellParams {
            r0,
            rc_pairs: vec![RcPair { r: r1, c: c1 }],
            q: 10_897.56, // 3.0271 Ah
            gamma,
            m,
            m0,
            eta_charge: 0.973,
            eta_discharge: 1.0,
            ocv: OcvCurve::default_lipo(),
            rc_polarization_adds: false,
        }
    }

    /// Two identical branches of the three characterized cells, rested at the
    /// given state of charge, both switches closed.
    pub fn uniform_pack(z: f64) -> PackState {
        let branch = || -> Vec<Cell> { (0..3).map(|i| Cell::rested(table_cell(i), z)).collect() };
        PackState::new([branch(), branch()], PackConfig::default()).unwrap()
    }
}
