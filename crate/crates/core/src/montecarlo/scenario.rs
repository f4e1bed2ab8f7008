//! Scenario sampling for Monte Carlo flight batches.
//!
//! A scenario pins everything a single flight needs beyond the shared run
//! configuration: the mission envelope, the weather, the pack's health and
//! starting charge, and the seed that makes the flight reproducible. Ranges
//! are closed intervals sampled uniformly and independently; categorical
//! fields are sampled uniformly over their listed sets.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::battery::{AmbientTemp, HealthCondition, HealthGrade};
use crate::mdp::{Action, ConditionKey};
use crate::vehicle::GustCategory;

use super::SimError;

/// How the per-epoch action is chosen during a flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSpec {
    /// Same action every epoch.
    Fixed(Action),
    /// Look the action up in a solved policy for the pack's condition.
    Policy,
    /// Draw a uniformly random action each epoch. Used to cover state-action
    /// pairs that fixed schedules never reach.
    Explore,
}

/// How the mission length is fixed before takeoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionSizing {
    /// Explicit duration, seconds.
    Duration(f64),
    /// Multiple of the pack's predicted endurance at the nominal hover draw,
    /// evaluated on the scenario's own (possibly degraded) pack at takeoff.
    EodFraction(f64),
}

/// Everything one flight needs beyond the shared configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightScenario {
    pub action: ActionSpec,
    /// Supply-grade safety margin t_sf, seconds.
    pub safety_time: f64,
    /// Per-battery resting cell voltage at takeoff, volts.
    pub initial_voltage: [f64; 2],
    /// Transit speed, m/s.
    pub cruise_speed: f64,
    /// Steady wind magnitude, m/s.
    pub wind_speed: f64,
    /// Steady wind bearing, radians from the mission track.
    pub wind_direction: f64,
    pub gust: GustCategory,
    /// Health of each battery, fixed for the whole flight.
    pub health: [HealthCondition; 2],
    pub sizing: MissionSizing,
    /// Seed for the flight's private stream (gusts, exploration draws).
    pub seed: u64,
}

impl FlightScenario {
    /// The policy-store key matching this scenario's pack condition.
    ///
    /// Both batteries share one ambient temperature; the first battery's is
    /// taken as the pack's.
    pub fn condition(&self) -> ConditionKey {
        ConditionKey::new(
            [self.health[0].grade, self.health[1].grade],
            self.health[0].ambient,
        )
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bounds = [
            ("safety_time", self.safety_time, 0.0),
            ("cruise_speed", self.cruise_speed, 1e-6),
            ("wind_speed", self.wind_speed, 0.0),
        ];
        for (name, v, min) in bounds {
            if !v.is_finite() || v < min {
                return Err(SimError::BadScenario(format!("{name} = {v}")));
            }
        }
        for v in self.initial_voltage {
            if !v.is_finite() || v <= 0.0 {
                return Err(SimError::BadScenario(format!("initial_voltage = {v}")));
            }
        }
        match self.sizing {
            MissionSizing::Duration(d) if d.is_finite() && d >= 0.0 => {}
            MissionSizing::EodFraction(f) if f.is_finite() && f > 0.0 => {}
            other => return Err(SimError::BadScenario(format!("sizing = {other:?}"))),
        }
        Ok(())
    }
}

/// Sampling ranges: closed intervals and categorical sets.
///
/// Defaults cover the full variation used for tensor estimation. Health and
/// temperature are owned by the condition under study, not the flight, so
/// estimation narrows `healths` to singletons via [`ScenarioRanges::for_condition`];
/// `ambient` is always fixed rather than drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioRanges {
    pub safety_time: [f64; 2],
    pub initial_voltage: [f64; 2],
    pub cruise_speed: [f64; 2],
    pub wind_speed: [f64; 2],
    pub wind_direction: [f64; 2],
    /// Mission length as a fraction of predicted endurance; the top of the
    /// range deliberately exceeds 1 so depletion outcomes appear in the data.
    pub mission_fraction: [f64; 2],
    pub gusts: Vec<GustCategory>,
    pub healths: [Vec<HealthGrade>; 2],
    pub ambient: AmbientTemp,
}

impl Default for ScenarioRanges {
    fn default() -> Self {
        Self {
            safety_time: [5.0, 10.0],
            initial_voltage: [4.05, 4.12],
            cruise_speed: [1.0, 9.0],
            wind_speed: [1.0, 3.0],
            wind_direction: [0.0, std::f64::consts::PI],
            mission_fraction: [0.5, 1.25],
            gusts: GustCategory::ALL.to_vec(),
            healths: [HealthGrade::ALL.to_vec(), HealthGrade::ALL.to_vec()],
            ambient: AmbientTemp::Warm,
        }
    }
}

impl ScenarioRanges {
    /// Narrows health and temperature to one condition; everything else keeps
    /// its variation.
    pub fn for_condition(&self, key: &ConditionKey) -> Self {
        Self {
            healths: [vec![key.grades[0]], vec![key.grades[1]]],
            ambient: key.ambient,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let intervals = [
            ("safety_time", self.safety_time, 0.0),
            ("initial_voltage", self.initial_voltage, 1e-6),
            ("cruise_speed", self.cruise_speed, 1e-6),
            ("wind_speed", self.wind_speed, 0.0),
            ("wind_direction", self.wind_direction, f64::NEG_INFINITY),
            ("mission_fraction", self.mission_fraction, 1e-6),
        ];
        for (name, [lo, hi], min) in intervals {
            if !lo.is_finite() || !hi.is_finite() || lo > hi || lo < min {
                return Err(SimError::BadScenario(format!("{name} range [{lo}, {hi}]")));
            }
        }
        if self.gusts.is_empty() {
            return Err(SimError::BadScenario("no gust categories listed".into()));
        }
        if self.healths.iter().any(Vec::is_empty) {
            return Err(SimError::BadScenario("no health grades listed".into()));
        }
        Ok(())
    }
}

fn draw(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn pick<T: Copy>(rng: &mut impl Rng, set: &[T]) -> T {
    set[rng.random_range(0..set.len())]
}

/// Draws one scenario. Continuous fields are uniform over their closed
/// intervals, categorical fields uniform over their sets; degraded batteries
/// carry the default capacity-fade mode. The action source defaults to
/// holding both batteries on; batch drivers override it per flight.
pub fn sample_scenario(
    ranges: &ScenarioRanges,
    rng: &mut impl Rng,
) -> Result<FlightScenario, SimError> {
    ranges.validate()?;
    let health = [
        HealthCondition::with_grade(pick(rng, &ranges.healths[0]), ranges.ambient),
        HealthCondition::with_grade(pick(rng, &ranges.healths[1]), ranges.ambient),
    ];
    Ok(FlightScenario {
        action: ActionSpec::Fixed(Action::UseBoth),
        safety_time: draw(rng, ranges.safety_time),
        initial_voltage: [draw(rng, ranges.initial_voltage), draw(rng, ranges.initial_voltage)],
        cruise_speed: draw(rng, ranges.cruise_speed),
        wind_speed: draw(rng, ranges.wind_speed),
        wind_direction: draw(rng, ranges.wind_direction),
        gust: pick(rng, &ranges.gusts),
        health,
        sizing: MissionSizing::EodFraction(draw(rng, ranges.mission_fraction)),
        seed: rng.random(),
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn degenerate_ranges_give_a_deterministic_scenario() {
        let ranges = ScenarioRanges {
            safety_time: [7.0, 7.0],
            initial_voltage: [4.1, 4.1],
            cruise_speed: [5.0, 5.0],
            wind_speed: [2.0, 2.0],
            wind_direction: [0.5, 0.5],
            mission_fraction: [0.8, 0.8],
            gusts: vec![GustCategory::LowLight],
            healths: [vec![HealthGrade::Healthy], vec![HealthGrade::Unhealthy]],
            ambient: AmbientTemp::Cold,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_scenario(&ranges, &mut rng).unwrap();
        assert_eq!(s.safety_time, 7.0);
        assert_eq!(s.initial_voltage, [4.1, 4.1]);
        assert_eq!(s.cruise_speed, 5.0);
        assert_eq!(s.wind_speed, 2.0);
        assert_eq!(s.wind_direction, 0.5);
        assert_eq!(s.gust, GustCategory::LowLight);
        assert_eq!(s.health[0].grade, HealthGrade::Healthy);
        assert_eq!(s.health[1].grade, HealthGrade::Unhealthy);
        assert_eq!(s.health[0].ambient, AmbientTemp::Cold);
        assert_eq!(s.sizing, MissionSizing::EodFraction(0.8));
    }

    #[test]
    fn cruise_speed_draws_fill_the_interval_uniformly() {
        let ranges = ScenarioRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let n = 10_000;
        for _ in 0..n {
            let s = sample_scenario(&ranges, &mut rng).unwrap();
            min = min.min(s.cruise_speed);
            max = max.max(s.cruise_speed);
            sum += s.cruise_speed;
        }
        assert!(min >= 1.0 && max <= 9.0);
        // Uniform(1, 9): mean 5, sd of the sample mean 8/sqrt(12)/100 = 0.023.
        assert!((sum / n as f64 - 5.0).abs() < 0.1);
    }

    #[test]
    fn same_seed_reproduces_the_scenario_exactly() {
        let ranges = ScenarioRanges::default();
        let a = sample_scenario(&ranges, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_scenario(&ranges, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn condition_narrowing_pins_health_and_temperature() {
        let key = ConditionKey::from_label("F2_F1_TL").unwrap();
        let ranges = ScenarioRanges::default().for_condition(&key);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = sample_scenario(&ranges, &mut rng).unwrap();
            assert_eq!(s.condition(), key);
            assert_eq!(s.health[1].ambient, AmbientTemp::Cold);
        }
    }

    #[test]
    fn rejects_inverted_and_empty_ranges() {
        let mut bad = ScenarioRanges {
            cruise_speed: [9.0, 1.0],
            ..ScenarioRanges::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(sample_scenario(&bad, &mut rng).is_err());
        bad.cruise_speed = [1.0, 9.0];
        bad.gusts.clear();
        assert!(sample_scenario(&bad, &mut rng).is_err());
    }
}
