//! Reward shaping for the switching process.
//!
//! Single-battery actions score the chosen battery's supply and charge
//! grades and pay for leaving the other battery connected:
//!
//! ```text
//! R(s, use_k) = w1 * supply(k) + w2 * charge(k) - w3 * switch(other)
//! ```
//!
//! Supply penalties soften when the chosen battery grades no worse than its
//! neighbor. Using both batteries averages the per-battery terms and prices
//! the switch term against the both-on baseline, which turns into a small
//! credit when a switch still has to close. Failure pays a flat penalty
//! regardless of action.

use serde::{Deserialize, Serialize};

use super::state::{decode_state, Action, ChargeGrade, MdpState, SupplyGrade, FAILURE_STATE};
use super::MdpError;

/// Objective weights; must be positive and sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    /// Supply-grade weight.
    pub w1: f64,
    /// Charge-grade weight.
    pub w2: f64,
    /// Switch-cost weight.
    pub w3: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w1: 0.4,
            w2: 0.3,
            w3: 0.3,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), MdpError> {
        for (name, v) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MdpError::BadReward(format!("{name} must be positive, got {v}")));
            }
        }
        let sum = self.w1 + self.w2 + self.w3;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MdpError::BadReward(format!("weights must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

/// Full reward specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardTable {
    pub weights: RewardWeights,
    /// Marginal-supply penalty when the battery grades no worse than the
    /// other, and when it grades worse.
    pub supply_marginal: [f64; 2],
    /// Insufficient-supply penalty, same split.
    pub supply_insufficient: [f64; 2],
    /// Partially-discharged penalty.
    pub charge_low: f64,
    /// Flat penalty in the failure state.
    pub failure: f64,
    /// Extra credit for keeping both batteries connected while both grade
    /// comfortable. Zero reproduces the plain table.
    #[serde(default)]
    pub use_both_s1_redundancy: f64,
}

impl Default for RewardTable {
    fn default() -> Self {
        Self {
            weights: RewardWeights::default(),
            supply_marginal: [-5.0, -10.0],
            supply_insufficient: [-20.0, -25.0],
            charge_low: -10.0,
            failure: -30.0,
            use_both_s1_redundancy: 0.0,
        }
    }
}

impl RewardTable {
    pub fn validate(&self) -> Result<(), MdpError> {
        self.weights.validate()?;
        for v in self
            .supply_marginal
            .iter()
            .chain(&self.supply_insufficient)
            .chain([&self.charge_low, &self.failure, &self.use_both_s1_redundancy])
        {
            if !v.is_finite() {
                return Err(MdpError::BadReward("reward entries must be finite".into()));
            }
        }
        Ok(())
    }

    /// Supply term for battery `k` given both grades.
    fn supply_term(&self, own: SupplyGrade, other: SupplyGrade) -> f64 {
        let worse = usize::from(own.rank() > other.rank());
        match own {
            SupplyGrade::S1 => 0.0,
            SupplyGrade::S2 => self.supply_marginal[worse],
            SupplyGrade::S3 => self.supply_insufficient[worse],
        }
    }

    fn charge_term(&self, grade: ChargeGrade) -> f64 {
        match grade {
            ChargeGrade::C0 => 0.0,
            ChargeGrade::C1 => self.charge_low,
        }
    }
}

/// Reward for taking `action` in the state with index `state`.
pub fn reward(state: usize, action: Action, table: &RewardTable) -> f64 {
    if state == FAILURE_STATE {
        return table.failure;
    }
    let s = decode_state(state).expect("operating state");
    reward_decoded(&s, action, table)
}

fn reward_decoded(s: &MdpState, action: Action, table: &RewardTable) -> f64 {
    let w = &table.weights;
    let supply = |k: usize| table.supply_term(s.batt[k].supply, s.batt[1 - k].supply);
    let charge = |k: usize| table.charge_term(s.batt[k].charge);
    let sw = |k: usize| if s.batt[k].switch.is_on() { 1.0 } else { 0.0 };
    match action {
        Action::UseBatt1 => w.w1 * supply(0) + w.w2 * charge(0) - w.w3 * sw(1),
        Action::UseBatt2 => w.w1 * supply(1) + w.w2 * charge(1) - w.w3 * sw(0),
        Action::UseBoth => {
            let mean_supply = 0.5 * (supply(0) + supply(1));
            let mean_charge = 0.5 * (charge(0) + charge(1));
            let mean_sw = 0.5 * (sw(0) + sw(1));
            let redundancy = if s.batt[0].supply == SupplyGrade::S1
                && s.batt[1].supply == SupplyGrade::S1
            {
                table.use_both_s1_redundancy
            } else {
                0.0
            };
            w.w1 * mean_supply + w.w2 * mean_charge - w.w3 * (mean_sw - 1.0) + redundancy
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::state::{
        encode_state, BattFeatures, CurrentLevel, SwitchState, N_STATES,
    };

    fn state(
        sw: [SwitchState; 2],
        supply: [SupplyGrade; 2],
        charge: [ChargeGrade; 2],
    ) -> usize {
        encode_state(&MdpState {
            demand: CurrentLevel::Low,
            batt: [
                BattFeatures {
                    switch: sw[0],
                    supply: supply[0],
                    charge: charge[0],
                },
                BattFeatures {
                    switch: sw[1],
                    supply: supply[1],
                    charge: charge[1],
                },
            ],
        })
    }

    const ON: SwitchState = SwitchState::On;
    const OFF: SwitchState = SwitchState::Off;

    #[test]
    fn healthy_both_on_prefers_no_switching_cost() {
        let t = RewardTable::default();
        let s = state([ON, ON], [SupplyGrade::S1; 2], [ChargeGrade::C0; 2]);
        // single-battery actions pay for the other connected switch
        assert_eq!(reward(s, Action::UseBatt1, &t), -0.3);
        assert_eq!(reward(s, Action::UseBatt2, &t), -0.3);
        assert_eq!(reward(s, Action::UseBoth, &t), 0.0);
    }

    #[test]
    fn one_switch_open_turns_the_both_term_into_a_credit() {
        let t = RewardTable::default();
        let s = state([ON, OFF], [SupplyGrade::S1; 2], [ChargeGrade::C0; 2]);
        // -w3 (mean(1, 0) - 1) = +w3 / 2
        assert_eq!(reward(s, Action::UseBoth, &t), 0.15);
        // battery 1 keeps no one else connected
        assert_eq!(reward(s, Action::UseBatt1, &t), 0.0);
        // battery 2 pays for battery 1 still being on
        assert_eq!(reward(s, Action::UseBatt2, &t), -0.3);
    }

    #[test]
    fn worse_supply_grade_pays_the_harsher_penalty() {
        let t = RewardTable::default();
        // battery 1 marginal while battery 2 comfortable: worse, -10
        let s = state(
            [ON, ON],
            [SupplyGrade::S2, SupplyGrade::S1],
            [ChargeGrade::C0; 2],
        );
        assert_eq!(reward(s, Action::UseBatt1, &t), 0.4 * -10.0 - 0.3);
        // both marginal: tie counts as no worse, -5
        let s = state([ON, ON], [SupplyGrade::S2; 2], [ChargeGrade::C0; 2]);
        assert_eq!(reward(s, Action::UseBatt1, &t), 0.4 * -5.0 - 0.3);
        // insufficient against marginal: worse, -25
        let s = state(
            [ON, ON],
            [SupplyGrade::S3, SupplyGrade::S2],
            [ChargeGrade::C0; 2],
        );
        assert_eq!(reward(s, Action::UseBatt1, &t), 0.4 * -25.0 - 0.3);
        // insufficient against insufficient: tie, -20
        let s = state([ON, ON], [SupplyGrade::S3; 2], [ChargeGrade::C0; 2]);
        assert_eq!(reward(s, Action::UseBatt1, &t), 0.4 * -20.0 - 0.3);
    }

    #[test]
    fn low_charge_costs_through_the_second_weight() {
        let t = RewardTable::default();
        let s = state(
            [ON, OFF],
            [SupplyGrade::S1; 2],
            [ChargeGrade::C1, ChargeGrade::C0],
        );
        assert_eq!(reward(s, Action::UseBatt1, &t), 0.3 * -10.0);
        // averaged under use-both
        assert!((reward(s, Action::UseBoth, &t) - (0.3 * -5.0 + 0.15)).abs() < 1e-12);
    }

    #[test]
    fn failure_pays_flat_penalty_for_every_action() {
        let t = RewardTable::default();
        for a in Action::ALL {
            assert_eq!(reward(FAILURE_STATE, a, &t), -30.0);
        }
    }

    #[test]
    fn reward_is_symmetric_under_battery_swap() {
        let t = RewardTable::default();
        for idx in 0..FAILURE_STATE {
            let s = decode_state(idx).unwrap();
            let swapped = encode_state(&s.swapped());
            for a in Action::ALL {
                let lhs = reward(idx, a, &t);
                let rhs = reward(swapped, a.swapped(), &t);
                assert!(
                    (lhs - rhs).abs() < 1e-12,
                    "state {idx} action {a:?}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn rewards_stay_within_the_table_bounds() {
        let t = RewardTable::default();
        for idx in 0..N_STATES {
            for a in Action::ALL {
                let r = reward(idx, a, &t);
                assert!(r <= 0.3, "reward {r} too high at {idx}");
                assert!(r >= -30.0, "reward {r} too low at {idx}");
            }
        }
    }

    #[test]
    fn redundancy_credit_applies_only_when_both_grade_comfortable() {
        let mut t = RewardTable::default();
        t.use_both_s1_redundancy = 0.5;
        let s = state([ON, ON], [SupplyGrade::S1; 2], [ChargeGrade::C0; 2]);
        assert_eq!(reward(s, Action::UseBoth, &t), 0.5);
        assert_eq!(reward(s, Action::UseBatt1, &t), -0.3);
        let s = state(
            [ON, ON],
            [SupplyGrade::S1, SupplyGrade::S2],
            [ChargeGrade::C0; 2],
        );
        // no credit once either grade slips; battery 2 grades worse, -10
        assert_eq!(reward(s, Action::UseBoth, &t), 0.4 * 0.5 * -10.0);
    }

    #[test]
    fn validates_weights_and_entries() {
        let mut t = RewardTable::default();
        assert!(t.validate().is_ok());
        t.weights.w1 = 0.5;
        assert!(t.validate().is_err());
        let mut t = RewardTable::default();
        t.charge_low = f64::NAN;
        assert!(t.validate().is_err());
    }
}
