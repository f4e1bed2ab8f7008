//! One serde tree holding every tunable: cell parameters, vehicle and
//! controller settings, encoder thresholds, reward shape, solver settings,
//! and scenario ranges. Anything omitted from a config file takes the
//! defaults below, so `{}` is a complete configuration.

use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::battery::{CellParams, EodSettings, OcvCurve, PackConfig, RcPair};
use crate::mdp::{EncodeThresholds, RewardTable, ValueIterationSettings};
use crate::montecarlo::ScenarioRanges;
use crate::vehicle::{DlqrWeights, MotorCurrentFit, VehicleParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// One cell as a datasheet lists it: capacity in ampere-hours, resistances in
/// ohms, hysteresis magnitudes in volts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub r0: f64,
    pub rc_pairs: Vec<RcPair>,
    pub q_ah: f64,
    pub gamma: f64,
    pub m: f64,
    pub m0: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    #[serde(default)]
    pub rc_polarization_adds: bool,
}

impl CellSpec {
    pub fn to_params(&self, ocv: &OcvCurve) -> Result<CellParams, ConfigError> {
        let params = CellParams {
            r0: self.r0,
            rc_pairs: self.rc_pairs.clone(),
            q: self.q_ah * 3600.0,
            gamma: self.gamma,
            m: self.m,
            m0: self.m0,
            eta_charge: self.eta_charge,
            eta_discharge: self.eta_discharge,
            ocv: ocv.clone(),
            rc_polarization_adds: self.rc_polarization_adds,
        };
        params
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(params)
    }
}

/// The characterized series cells and their shared rest-voltage curve. One
/// branch is the listed cells in order; the pack is two such branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellBank {
    pub cells: Vec<CellSpec>,
    pub ocv_knots: Vec<(f64, f64)>,
}

impl Default for CellBank {
    fn default() -> Self {
        let cell = |r0, r1, c1, gamma, m, m0| CellSpec {
            r0,
            rc_pairs: vec![RcPair { r: r1, c: c1 }],
            q_ah: 3.0271,
            gamma,
            m,
            m0,
            eta_charge: 0.973,
            eta_discharge: 1.0,
            rc_polarization_adds: false,
        };
        Self {
            cells: vec![
                cell(0.0060, 0.0099, 51_500.0, 300.0, 0.0178, 0.0051),
                cell(0.0055, 0.0088, 52_500.0, 200.0, 0.0312, 0.0053),
                cell(0.0055, 0.0087, 60_500.0, 300.0, 0.0184, 0.0052),
            ],
            ocv_knots: OcvCurve::default_lipo().knots().to_vec(),
        }
    }
}

impl CellBank {
    pub fn ocv(&self) -> Result<OcvCurve, ConfigError> {
        OcvCurve::new(self.ocv_knots.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Full parameters for one branch, in listed order.
    pub fn branch_cells(&self) -> Result<Vec<CellParams>, ConfigError> {
        if self.cells.is_empty() {
            return Err(ConfigError::Invalid("cell bank is empty".into()));
        }
        let ocv = self.ocv()?;
        self.cells.iter().map(|c| c.to_params(&ocv)).collect()
    }
}

/// Mission geometry shared by every generated flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionShape {
    /// Cruise altitude, meters.
    pub altitude: f64,
    /// Climb and descent rate, m/s.
    pub climb_rate: f64,
}

impl Default for MissionShape {
    fn default() -> Self {
        Self {
            altitude: 20.0,
            climb_rate: 2.0,
        }
    }
}

/// Root configuration. Every field has a default; a config file only states
/// what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Base seed; batch drivers derive per-flight streams from it.
    pub seed: u64,
    pub cells: CellBank,
    pub pack: PackConfig,
    pub vehicle: VehicleParams,
    pub control: DlqrWeights,
    pub motor: MotorCurrentFit,
    /// Pack voltage the motor currents are referenced to, volts.
    pub nominal_voltage: f64,
    /// Inner control rate, Hz. Must divide the 1 Hz decision epochs evenly.
    pub control_hz: u32,
    /// Trailing window, in epochs, for the mean-demand current predictor.
    pub demand_window_epochs: usize,
    pub eod: EodSettings,
    pub thresholds: EncodeThresholds,
    pub reward: RewardTable,
    pub solver: ValueIterationSettings,
    pub ranges: ScenarioRanges,
    pub mission: MissionShape,
    /// Flights per condition when estimating transition tensors.
    pub estimation_flights: usize,
    /// Fraction of estimation flights that draw a random action each epoch.
    pub exploration_fraction: f64,
    /// Tracking error, meters, beyond which a flight is declared diverged.
    pub diverge_position_error: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            cells: CellBank::default(),
            pack: PackConfig::default(),
            vehicle: VehicleParams::default(),
            control: DlqrWeights::default(),
            motor: MotorCurrentFit::default(),
            nominal_voltage: 11.1,
            control_hz: 200,
            demand_window_epochs: 10,
            eod: EodSettings::default(),
            thresholds: EncodeThresholds::default(),
            reward: RewardTable::default(),
            solver: ValueIterationSettings::default(),
            ranges: ScenarioRanges::default(),
            mission: MissionShape::default(),
            estimation_flights: 200,
            exploration_fraction: 0.25,
            diverge_position_error: 50.0,
        }
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: Self =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: String| ConfigError::Invalid(e);
        self.cells.branch_cells()?;
        self.vehicle.validate().map_err(|e| invalid(e.to_string()))?;
        self.control.validate().map_err(|e| invalid(e.to_string()))?;
        self.motor.validate().map_err(|e| invalid(e.to_string()))?;
        self.reward.validate().map_err(|e| invalid(e.to_string()))?;
        self.solver.validate().map_err(|e| invalid(e.to_string()))?;
        self.ranges.validate().map_err(|e| invalid(e.to_string()))?;
        if !(self.nominal_voltage.is_finite() && self.nominal_voltage > 0.0) {
            return Err(invalid(format!(
                "nominal_voltage = {}",
                self.nominal_voltage
            )));
        }
        if self.control_hz == 0 {
            return Err(invalid("control_hz = 0".into()));
        }
        if self.demand_window_epochs == 0 {
            return Err(invalid("demand_window_epochs = 0".into()));
        }
        if !(self.eod.dt.is_finite() && self.eod.dt > 0.0 && self.eod.horizon > self.eod.dt) {
            return Err(invalid(format!(
                "eod dt = {}, horizon = {}",
                self.eod.dt, self.eod.horizon
            )));
        }
        let t = &self.thresholds;
        if !(t.high_current.is_finite()
            && t.safety_time.is_finite()
            && t.safety_time >= 0.0
            && t.well_charged > t.cutoff
            && t.cutoff > 0.0)
        {
            return Err(invalid("encoder thresholds are inconsistent".into()));
        }
        let p = &self.pack;
        if !(p.cutoff_voltage.is_finite()
            && p.cutoff_voltage > 0.0
            && p.max_branch_current > 0.0)
        {
            return Err(invalid("pack limits are inconsistent".into()));
        }
        if !(0.0..=1.0).contains(&self.exploration_fraction) {
            return Err(invalid(format!(
                "exploration_fraction = {}",
                self.exploration_fraction
            )));
        }
        if !(self.diverge_position_error.is_finite() && self.diverge_position_error > 0.0) {
            return Err(invalid(format!(
                "diverge_position_error = {}",
                self.diverge_position_error
            )));
        }
        if !(self.mission.altitude.is_finite()
            && self.mission.altitude >= 0.0
            && self.mission.climb_rate > 0.0)
        {
            return Err(invalid("mission shape is inconsistent".into()));
        }
        if self.estimation_flights == 0 {
            return Err(invalid("estimation_flights = 0".into()));
        }
        Ok(())
    }

    pub fn control_dt(&self) -> f64 {
        1.0 / f64::from(self.control_hz)
    }

    /// The effective configuration as one canonical JSON line. Field order is
    /// fixed by the struct definitions, so equal configs hash equally.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// FNV-1a hash of the canonical form; stamped into output metadata so a
    /// result can be traced back to the exact configuration that produced it.
    pub fn content_hash(&self) -> u64 {
        fnv1a(self.canonical_json().as_bytes())
    }
}

/// FNV-1a over raw bytes; stable across platforms and releases.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_the_default_configuration() {
        let parsed: SimConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(parsed, SimConfig::default());
        parsed.validate().unwrap();
    }

    #[test]
    fn shipped_reference_config_matches_the_builtin_defaults() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../params/default_config.json");
        let shipped = SimConfig::load(&path).unwrap();
        assert_eq!(shipped, SimConfig::default());
    }

    #[test]
    fn default_cells_match_the_characterized_set() {
        let bank = CellBank::default();
        let cells = bank.branch_cells().unwrap();
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[0].r0, 0.0060);
        assert_eq!(cells[1].rc_pairs[0].c, 52_500.0);
        assert_eq!(cells[2].gamma, 300.0);
        for c in &cells {
            assert!((c.q - 10_897.56).abs() < 1e-9);
            assert_eq!(c.eta_charge, 0.973);
        }
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let parsed: SimConfig =
            serde_json::from_str(r#"{"nominal_voltage": 12.0, "solver": {"gamma": 0.9}}"#)
                .unwrap();
        assert_eq!(parsed.nominal_voltage, 12.0);
        assert_eq!(parsed.solver.gamma, 0.9);
        assert_eq!(parsed.solver.tol, SimConfig::default().solver.tol);
        assert_eq!(parsed.control_hz, 200);
    }

    #[test]
    fn content_hash_tracks_only_meaningful_changes() {
        let a = SimConfig::default();
        let mut b = SimConfig::default();
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed = 8;
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn fnv_hash_matches_published_vectors() {
        // Reference values for the 64-bit FNV-1a test strings.
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn rejects_bad_values_after_parse() {
        let mut c = SimConfig::default();
        c.control_hz = 0;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.exploration_fraction = 1.5;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.cells.cells.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn load_reports_missing_file_and_bad_json() {
        let missing = SimConfig::load(Path::new("/nonexistent/config.json"));
        assert!(matches!(missing, Err(ConfigError::Io { .. })));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{not json").unwrap();
        assert!(matches!(
            SimConfig::load(&path),
            Err(ConfigError::Parse { .. })
        ));
    }
}
