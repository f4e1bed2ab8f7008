//! Series-parallel pack: two switchable branches of three series cells on a
//! common bus.
//!
//! With branch source voltage `v_j` (sum of per-cell voltages excluding the
//! series-resistance drop) and branch resistance `r_j` (sum of per-cell r0),
//! the bus voltage under total demand `i` over the set of connected branches
//! is
//!
//! ```text
//! v_bus = (sum_on v_j / r_j - i) / (sum_on 1 / r_j)
//! i_j   = (v_j - v_bus) / r_j          (0 for open branches)
//! ```
//!
//! which distributes current inversely to branch resistance and satisfies
//! Kirchhoff's current law identically. Branches with unequal source voltage
//! exchange circulating current even at zero demand, which is how a fresher
//! branch tops up a sagging one.

use serde::{Deserialize, Serialize};

use super::{cell_step_detailed, cell_voltage, BatteryError, CellParams, CellState};

/// Pack-level configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PackConfig {
    /// Per-cell cutoff voltage, volts. A connected cell at or below this is
    /// considered depleted.
    pub cutoff_voltage: f64,
    /// Branch current magnitude above which a warning is counted.
    pub max_branch_current: f64,
    /// Use the full cell voltage (OCV, hysteresis, RC polarization) as the
    /// branch source term in the current split. When false only OCV feeds the
    /// split, matching the bare open-circuit formulation.
    pub split_uses_effective_voltage: bool,
}

impl Default for PackConfig {
    fn default() -> Self {
        Self {
            cutoff_voltage: 3.3,
            max_branch_current: 60.0,
            split_uses_effective_voltage: true,
        }
    }
}

/// One cell: immutable parameters plus dynamic state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub params: CellParams,
    pub state: CellState,
}

impl Cell {
    pub fn rested(params: CellParams, z: f64) -> Self {
        let n = params.rc_pairs.len();
        Self {
            params,
            state: CellState::rested(z, n),
        }
    }
}

/// Per-step pack report.
#[derive(Debug, Clone, PartialEq)]
pub struct PackStepInfo {
    pub bus_voltage: f64,
    pub branch_currents: [f64; 2],
    /// Minimum cell terminal voltage per branch at the applied current.
    pub min_cell_voltage: [f64; 2],
    /// Minimum state of charge per branch.
    pub min_soc: [f64; 2],
    pub overcurrent: [bool; 2],
    pub soc_clamped: bool,
}

/// Two-branch pack state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackState {
    pub branches: [Vec<Cell>; 2],
    pub switch_on: [bool; 2],
    pub config: PackConfig,
    /// Cumulative count of state-of-charge clamp events.
    pub soc_clamp_events: u64,
    /// Cumulative count of branch overcurrent warnings.
    pub overcurrent_events: u64,
}

impl PackState {
    /// Builds a pack with both switches closed.
    pub fn new(branches: [Vec<Cell>; 2], config: PackConfig) -> Result<Self, BatteryError> {
        for (j, b) in branches.iter().enumerate() {
            if b.is_empty() {
                return Err(BatteryError::InvalidParams(format!("branch {j} has no cells")));
            }
            for c in b {
                c.params.validate()?;
            }
        }
        Ok(Self {
            branches,
            switch_on: [true, true],
            config,
            soc_clamp_events: 0,
            overcurrent_events: 0,
        })
    }

    pub fn set_switches(&mut self, on: [bool; 2]) {
        self.switch_on = on;
    }

    /// Sum of series resistances along branch `j`.
    pub fn branch_resistance(&self, j: usize) -> f64 {
        self.branches[j].iter().map(|c| c.params.r0).sum()
    }

    /// Branch source voltage used by the current split: per-cell terminal
    /// voltage at zero series drop, or bare OCV in the literal mode.
    pub fn branch_source_voltage(&self, j: usize) -> f64 {
        self.branches[j]
            .iter()
            .map(|c| {
                if self.config.split_uses_effective_voltage {
                    // cell_voltage at i = 0 is exactly ocv + m0 s + m h - rc drop
                    cell_voltage(&c.state, &c.params, 0.0).expect("zero is finite")
                } else {
                    c.params.ocv.voltage_at(c.state.z)
                }
            })
            .sum()
    }

    pub fn min_soc(&self, j: usize) -> f64 {
        self.branches[j]
            .iter()
            .map(|c| c.state.z)
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum cell terminal voltage on branch `j` while it carries `i_branch`.
    pub fn min_cell_voltage(&self, j: usize, i_branch: f64) -> Result<f64, BatteryError> {
        let mut min = f64::INFINITY;
        for c in &self.branches[j] {
            let v = cell_voltage(&c.state, &c.params, i_branch)?;
            if v < min {
                min = v;
            }
        }
        Ok(min)
    }

    /// Solves the bus equation for total demand `i_total` without advancing
    /// any cell state.
    pub fn solve_split(&self, i_total: f64) -> Result<(f64, [f64; 2]), BatteryError> {
        if !i_total.is_finite() {
            return Err(BatteryError::NonFiniteCurrent(i_total));
        }
        let on: Vec<usize> = (0..2).filter(|&j| self.switch_on[j]).collect();
        if on.is_empty() {
            if i_total != 0.0 {
                return Err(BatteryError::AllBranchesOff { demand: i_total });
            }
            return Ok((0.0, [0.0, 0.0]));
        }
        let mut sum_v_over_r = 0.0;
        let mut sum_inv_r = 0.0;
        for &j in &on {
            let r = self.branch_resistance(j);
            if !(r > 0.0) {
                return Err(BatteryError::InvalidParams(format!(
                    "branch {j} has zero resistance"
                )));
            }
            sum_v_over_r += self.branch_source_voltage(j) / r;
            sum_inv_r += 1.0 / r;
        }
        let bus = (sum_v_over_r - i_total) / sum_inv_r;
        let mut currents = [0.0; 2];
        for &j in &on {
            currents[j] = (self.branch_source_voltage(j) - bus) / self.branch_resistance(j);
        }
        Ok((bus, currents))
    }

    /// Reports voltages and currents at demand `i_total` without stepping.
    pub fn peek(&self, i_total: f64) -> Result<PackStepInfo, BatteryError> {
        let (bus, currents) = self.solve_split(i_total)?;
        let mut min_v = [0.0; 2];
        let mut min_z = [0.0; 2];
        let mut over = [false; 2];
        for j in 0..2 {
            min_v[j] = self.min_cell_voltage(j, currents[j])?;
            min_z[j] = self.min_soc(j);
            over[j] = currents[j].abs() > self.config.max_branch_current;
        }
        Ok(PackStepInfo {
            bus_voltage: bus,
            branch_currents: currents,
            min_cell_voltage: min_v,
            min_soc: min_z,
            overcurrent: over,
            soc_clamped: false,
        })
    }

    /// Advances the whole pack by `dt` at total demand `i_total` (amps,
    /// discharge positive). Open branches rest at zero current. Returns the
    /// electrical readings at the applied currents.
    pub fn step(&mut self, i_total: f64, dt: f64) -> Result<PackStepInfo, BatteryError> {
        let mut info = self.peek(i_total)?;
        let mut clamped = false;
        for j in 0..2 {
            let i_branch = info.branch_currents[j];
            for c in &mut self.branches[j] {
                let out = cell_step_detailed(&c.state, &c.params, i_branch, dt)?;
                clamped |= out.clamped;
                c.state = out.state;
            }
            if info.overcurrent[j] {
                self.overcurrent_events += 1;
            }
        }
        if clamped {
            self.soc_clamp_events += 1;
        }
        info.soc_clamped = clamped;
        Ok(info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::test_fixtures::{table_cell, uniform_pack};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_branches_split_evenly() {
        let mut pack = uniform_pack(0.9);
        let info = pack.step(20.0, 1.0).unwrap();
        assert_abs_diff_eq!(info.branch_currents[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(info.branch_currents[1], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn doubled_resistance_gives_two_to_one_split() {
        // healthy series string 17 mohm vs power-faded 34 mohm
        let mut pack = uniform_pack(0.9);
        for c in &mut pack.branches[1] {
            c.params.r0 *= 2.0;
        }
        assert_abs_diff_eq!(pack.branch_resistance(0), 0.017, epsilon = 1e-12);
        assert_abs_diff_eq!(pack.branch_resistance(1), 0.034, epsilon = 1e-12);
        let (_, currents) = pack.solve_split(30.0).unwrap();
        assert_relative_eq!(currents[0] / currents[1], 2.0, max_relative = 1e-9);
        assert_relative_eq!(currents[0], 20.0, max_relative = 1e-9);
    }

    #[test]
    fn kirchhoff_holds_for_random_packs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let mut pack = uniform_pack(rng.random_range(0.2..1.0));
            for b in 0..2 {
                for c in &mut pack.branches[b] {
                    c.params.r0 *= rng.random_range(0.5..3.0);
                    c.state.z = rng.random_range(0.05..1.0);
                }
            }
            let demand: f64 = rng.random_range(0.0..80.0);
            let (_, currents) = pack.solve_split(demand).unwrap();
            let total: f64 = currents.iter().sum();
            assert_relative_eq!(total, demand, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn open_branch_carries_nothing_and_holds_charge() {
        let mut pack = uniform_pack(0.9);
        pack.set_switches([true, false]);
        let z_before = pack.min_soc(1);
        for _ in 0..50 {
            let info = pack.step(15.0, 1.0).unwrap();
            assert_eq!(info.branch_currents[1], 0.0);
            assert_abs_diff_eq!(info.branch_currents[0], 15.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(pack.min_soc(1), z_before, epsilon = 1e-15);
        assert!(pack.min_soc(0) < z_before);
    }

    #[test]
    fn all_open_with_demand_is_an_error() {
        let mut pack = uniform_pack(0.9);
        pack.set_switches([false, false]);
        assert!(matches!(
            pack.step(5.0, 1.0),
            Err(BatteryError::AllBranchesOff { .. })
        ));
        // zero demand is a rest step
        assert!(pack.step(0.0, 1.0).is_ok());
    }

    #[test]
    fn branch_order_is_symmetric() {
        let mut a = uniform_pack(0.8);
        for c in &mut a.branches[1] {
            c.params.r0 *= 1.7;
            c.state.z = 0.6;
        }
        let mut b = a.clone();
        b.branches.swap(0, 1);
        let (bus_a, ia) = a.solve_split(24.0).unwrap();
        let (bus_b, ib) = b.solve_split(24.0).unwrap();
        assert_abs_diff_eq!(bus_a, bus_b, epsilon = 1e-12);
        assert_abs_diff_eq!(ia[0], ib[1], epsilon = 1e-12);
        assert_abs_diff_eq!(ia[1], ib[0], epsilon = 1e-12);
    }

    #[test]
    fn unequal_charge_drives_circulating_current_at_zero_demand() {
        let mut pack = uniform_pack(0.95);
        for c in &mut pack.branches[1] {
            c.state.z = 0.5;
        }
        let (_, currents) = pack.solve_split(0.0).unwrap();
        // fresher branch discharges into the weaker one
        assert!(currents[0] > 1e-3);
        assert_relative_eq!(currents[0], -currents[1], max_relative = 1e-9);
    }

    #[test]
    fn overcurrent_is_counted_not_fatal() {
        let mut pack = uniform_pack(0.9);
        pack.config.max_branch_current = 5.0;
        let info = pack.step(30.0, 1.0).unwrap();
        assert!(info.overcurrent[0] && info.overcurrent[1]);
        assert_eq!(pack.overcurrent_events, 2);
    }

    #[test]
    fn literal_split_ignores_polarization() {
        let mut pack = uniform_pack(0.9);
        // load long enough to build up polarization and hysteresis
        for _ in 0..120 {
            pack.step(30.0, 1.0).unwrap();
        }
        let mut literal = pack.clone();
        literal.config.split_uses_effective_voltage = false;
        let v_eff = pack.branch_source_voltage(0);
        let v_lit = literal.branch_source_voltage(0);
        let ocv_sum: f64 = pack.branches[0]
            .iter()
            .map(|c| c.params.ocv.voltage_at(c.state.z))
            .sum();
        assert_abs_diff_eq!(v_lit, ocv_sum, epsilon = 1e-12);
        assert!(v_eff < v_lit); // discharge sag
    }

    #[test]
    fn bus_voltage_drops_under_load() {
        let pack = uniform_pack(0.9);
        let (v0, _) = pack.solve_split(0.0).unwrap();
        let (v1, _) = pack.solve_split(40.0).unwrap();
        assert!(v1 < v0);
        // series resistance of the parallel combination is 17/2 mohm
        assert_relative_eq!(v0 - v1, 40.0 * 0.017 / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn rejects_empty_branch() {
        let cell = Cell::rested(table_cell(0), 0.9);
        let bad = PackState::new([vec![cell], vec![]], PackConfig::default());
        assert!(bad.is_err());
    }
}
