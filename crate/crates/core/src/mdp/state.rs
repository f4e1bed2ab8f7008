//! Discrete state space of the switching process.
//!
//! A state is the demand level crossed with, per battery, its switch
//! position, supply grade, and charge grade:
//!
//! ```text
//! 2 * (2 * 3 * 2)^2 = 288 operating states, plus one absorbing failure
//! ```
//!
//! Indices pack the features mixed-radix in the order demand, switch 1,
//! supply 1, charge 1, switch 2, supply 2, charge 2; index 288 is failure.

use serde::{Deserialize, Serialize};

/// Number of discrete states including failure.
pub const N_STATES: usize = 289;
/// Absorbing failure index.
pub const FAILURE_STATE: usize = 288;
/// Number of switching actions.
pub const N_ACTIONS: usize = 3;

/// Total demanded current, graded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurrentLevel {
    Low,
    High,
}

/// Predicted supply adequacy: time to cutoff against required flight time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SupplyGrade {
    /// Comfortable: cutoff lies beyond the requirement plus safety margin.
    S1,
    /// Marginal: cutoff lands inside the safety margin.
    S2,
    /// Insufficient: cutoff comes before the requirement.
    S3,
}

impl SupplyGrade {
    pub fn rank(self) -> u8 {
        match self {
            SupplyGrade::S1 => 0,
            SupplyGrade::S2 => 1,
            SupplyGrade::S3 => 2,
        }
    }
}

/// Measured charge band from the weakest cell voltage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeGrade {
    /// Well charged.
    C0,
    /// Partially discharged.
    C1,
}

/// Switch position of one branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchState {
    On,
    Off,
}

impl SwitchState {
    pub fn is_on(self) -> bool {
        matches!(self, SwitchState::On)
    }
}

/// Per-battery feature block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BattFeatures {
    pub switch: SwitchState,
    pub supply: SupplyGrade,
    pub charge: ChargeGrade,
}

/// One non-failure state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MdpState {
    pub demand: CurrentLevel,
    pub batt: [BattFeatures; 2],
}

impl MdpState {
    /// The same state with the battery roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            demand: self.demand,
            batt: [self.batt[1], self.batt[0]],
        }
    }

    /// Compact human-readable form, e.g. `IH|B1:on,S1,C0|B2:off,S2,C1`.
    pub fn label(&self) -> String {
        let demand = match self.demand {
            CurrentLevel::Low => "IL",
            CurrentLevel::High => "IH",
        };
        let one = |b: &BattFeatures| {
            format!(
                "{},S{},C{}",
                if b.switch.is_on() { "on" } else { "off" },
                b.supply.rank() + 1,
                match b.charge {
                    ChargeGrade::C0 => 0,
                    ChargeGrade::C1 => 1,
                }
            )
        };
        format!("{demand}|B1:{}|B2:{}", one(&self.batt[0]), one(&self.batt[1]))
    }
}

/// Packs a state into its index in `0..288`.
pub fn encode_state(s: &MdpState) -> usize {
    let demand = match s.demand {
        CurrentLevel::Low => 0,
        CurrentLevel::High => 1,
    };
    let mut idx = demand;
    for b in &s.batt {
        let sw = match b.switch {
            SwitchState::On => 0,
            SwitchState::Off => 1,
        };
        let sup = b.supply.rank() as usize;
        let ch = match b.charge {
            ChargeGrade::C0 => 0,
            ChargeGrade::C1 => 1,
        };
        idx = ((idx * 2 + sw) * 3 + sup) * 2 + ch;
    }
    idx
}

/// Unpacks an index in `0..288`; `FAILURE_STATE` and out-of-range return
/// `None`.
pub fn decode_state(idx: usize) -> Option<MdpState> {
    if idx >= FAILURE_STATE {
        return None;
    }
    let mut rem = idx;
    let ch2 = rem % 2;
    rem /= 2;
    let sup2 = rem % 3;
    rem /= 3;
    let sw2 = rem % 2;
    rem /= 2;
    let ch1 = rem % 2;
    rem /= 2;
    let sup1 = rem % 3;
    rem /= 3;
    let sw1 = rem % 2;
    rem /= 2;
    let demand = rem;
    debug_assert!(demand < 2);
    let mk = |sw: usize, sup: usize, ch: usize| BattFeatures {
        switch: if sw == 0 { SwitchState::On } else { SwitchState::Off },
        supply: match sup {
            0 => SupplyGrade::S1,
            1 => SupplyGrade::S2,
            _ => SupplyGrade::S3,
        },
        charge: if ch == 0 { ChargeGrade::C0 } else { ChargeGrade::C1 },
    };
    Some(MdpState {
        demand: if demand == 0 {
            CurrentLevel::Low
        } else {
            CurrentLevel::High
        },
        batt: [mk(sw1, sup1, ch1), mk(sw2, sup2, ch2)],
    })
}

/// Switching actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    UseBatt1,
    UseBatt2,
    UseBoth,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::UseBatt1, Action::UseBatt2, Action::UseBoth];

    pub fn index(self) -> usize {
        match self {
            Action::UseBatt1 => 0,
            Action::UseBatt2 => 1,
            Action::UseBoth => 2,
        }
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    /// Switch command the action requests, `[battery 1, battery 2]`.
    pub fn switches(self) -> [bool; 2] {
        match self {
            Action::UseBatt1 => [true, false],
            Action::UseBatt2 => [false, true],
            Action::UseBoth => [true, true],
        }
    }

    /// The same action with the battery roles exchanged.
    pub fn swapped(self) -> Self {
        match self {
            Action::UseBatt1 => Action::UseBatt2,
            Action::UseBatt2 => Action::UseBatt1,
            Action::UseBoth => Action::UseBoth,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::UseBatt1 => "use_batt1",
            Action::UseBatt2 => "use_batt2",
            Action::UseBoth => "use_both",
        }
    }
}

/// Grading thresholds used when encoding raw telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodeThresholds {
    /// Demand above this is graded high, amps (strict).
    pub high_current: f64,
    /// Safety margin between comfortable and marginal supply, seconds.
    pub safety_time: f64,
    /// Weakest-cell voltage at or above this grades well charged.
    pub well_charged: f64,
    /// Weakest in-use cell at or below this is failure.
    pub cutoff: f64,
}

impl Default for EncodeThresholds {
    fn default() -> Self {
        Self {
            high_current: 21.0,
            safety_time: 7.5,
            well_charged: 3.4,
            cutoff: 3.3,
        }
    }
}

/// Raw per-epoch readings fed to the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    /// Total demanded current, amps.
    pub demand: f64,
    /// Predicted time to cutoff per battery, seconds.
    pub eod: [f64; 2],
    /// Required flight duration still ahead, seconds.
    pub rfd: f64,
    /// Weakest cell voltage per battery, volts.
    pub min_cell_voltage: [f64; 2],
    /// Switch positions.
    pub switch_on: [bool; 2],
}

impl Telemetry {
    /// True when any connected battery has a cell at or below cutoff.
    pub fn is_failure(&self, th: &EncodeThresholds) -> bool {
        (0..2).any(|j| self.switch_on[j] && self.min_cell_voltage[j] <= th.cutoff)
    }

    /// Grades the readings into a state index, `FAILURE_STATE` when a
    /// connected cell sits at or below cutoff.
    pub fn encode(&self, th: &EncodeThresholds) -> usize {
        if self.is_failure(th) {
            return FAILURE_STATE;
        }
        let grade = |j: usize| {
            let supply = if self.eod[j] > self.rfd + th.safety_time {
                SupplyGrade::S1
            } else if self.eod[j] > self.rfd {
                SupplyGrade::S2
            } else {
                SupplyGrade::S3
            };
            BattFeatures {
                switch: if self.switch_on[j] {
                    SwitchState::On
                } else {
                    SwitchState::Off
                },
                supply,
                charge: if self.min_cell_voltage[j] >= th.well_charged {
                    ChargeGrade::C0
                } else {
                    ChargeGrade::C1
                },
            }
        };
        encode_state(&MdpState {
            demand: if self.demand > th.high_current {
                CurrentLevel::High
            } else {
                CurrentLevel::Low
            },
            batt: [grade(0), grade(1)],
        })
    }
}
