//! Transition-model estimation from batches of simulated flights.
//!
//! Every flight under a given pack condition contributes its per-epoch
//! `(state, action, next state)` triples to one shared count tensor; row
//! probabilities are the maximum-likelihood frequencies. Flights that abort
//! with a diverged controller contribute nothing and are reported
//! separately, so the model only reflects flights the vehicle actually flew.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::config::SimConfig;
use crate::mdp::{Action, ConditionKey, TransitionTensor};

use super::flight::{simulate_flight, ActionSource, FlightContext, FlightOutcome, TraceDetail};
use super::flight::FlightTrace;
use super::scenario::{sample_scenario, ActionSpec};
use super::SimError;

/// Folds recorded flights into a maximum-likelihood transition tensor.
/// Diverged flights must be filtered out by the caller; their transitions
/// describe a vehicle the decision layer never controlled.
pub fn estimate_transitions(traces: &[FlightTrace]) -> Result<TransitionTensor, SimError> {
    let mut tensor = TransitionTensor::new();
    for trace in traces {
        for &(s, a, next) in &trace.transitions {
            tensor.record(s, a, next)?;
        }
    }
    Ok(tensor)
}

/// One estimation batch: the tensor plus bookkeeping about the flights that
/// produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationReport {
    pub condition: String,
    pub tensor: TransitionTensor,
    /// Flights flown to completion or battery exhaustion, by outcome label.
    pub outcomes: BTreeMap<String, usize>,
    /// Controller aborts, excluded from the tensor.
    pub diverged: usize,
    /// Flights contributing transitions.
    pub flights: usize,
}

/// Simulates `config.estimation_flights` randomized flights under one pack
/// condition and estimates its transition model.
///
/// Each flight gets its own counter-mode stream of the batch seed, so the
/// batch is reproducible as a whole and insensitive to reordering. The first
/// `exploration_fraction` of flights pick uniformly random actions each
/// epoch; the rest cycle through the three fixed schedules so the rows an
/// ordinary dispatch procedure visits all get mass.
pub fn estimate_condition(
    config: &SimConfig,
    condition: &ConditionKey,
) -> Result<EstimationReport, SimError> {
    let ctx = FlightContext::new(config)?;
    let ranges = config.ranges.for_condition(condition);
    ranges.validate()?;
    let n = config.estimation_flights;
    let n_explore = ((n as f64) * config.exploration_fraction).ceil() as usize;
    let fixed = [Action::UseBoth, Action::UseBatt1, Action::UseBatt2];

    let mut tensor = TransitionTensor::new();
    let mut outcomes: BTreeMap<String, usize> = BTreeMap::new();
    let mut diverged = 0usize;
    let mut flights = 0usize;

    for flight_idx in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(flight_idx as u64);
        let mut scenario = sample_scenario(&ranges, &mut rng)?;
        scenario.action = if flight_idx < n_explore {
            ActionSpec::Explore
        } else {
            ActionSpec::Fixed(fixed[(flight_idx - n_explore) % fixed.len()])
        };
        let source = match scenario.action {
            ActionSpec::Fixed(a) => ActionSource::Fixed(a),
            ActionSpec::Explore => ActionSource::Explore,
            ActionSpec::Policy => unreachable!("estimation never flies a policy"),
        };
        let trace = simulate_flight(&ctx, &scenario, source, TraceDetail::Decisions)?;
        if trace.outcome == FlightOutcome::Diverged {
            diverged += 1;
            continue;
        }
        for &(s, a, next) in &trace.transitions {
            tensor.record(s, a, next)?;
        }
        *outcomes.entry(trace.outcome.label().to_string()).or_insert(0) += 1;
        flights += 1;
    }

    tensor.validate()?;
    Ok(EstimationReport {
        condition: condition.label(),
        tensor,
        outcomes,
        diverged,
        flights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::{AmbientTemp, HealthGrade};
    use crate::mdp::FAILURE_STATE;

    fn dummy_scenario() -> crate::montecarlo::scenario::FlightScenario {
        use crate::battery::HealthCondition;
        use crate::montecarlo::scenario::{FlightScenario, MissionSizing};
        use crate::vehicle::GustCategory;
        FlightScenario {
            action: ActionSpec::Fixed(Action::UseBoth),
            safety_time: 8.0,
            initial_voltage: [4.1, 4.1],
            cruise_speed: 5.0,
            wind_speed: 2.0,
            wind_direction: 0.5,
            gust: GustCategory::LowLight,
            health: [
                HealthCondition::healthy(AmbientTemp::Warm),
                HealthCondition::healthy(AmbientTemp::Warm),
            ],
            sizing: MissionSizing::Duration(0.0),
            seed: 1,
        }
    }

    fn hand_trace(transitions: Vec<(usize, usize, usize)>) -> FlightTrace {
        FlightTrace {
            scenario: dummy_scenario(),
            outcome: FlightOutcome::MissionSuccess,
            planned_duration: 0.0,
            t_end: 0.0,
            epochs: Vec::new(),
            transitions,
            battery: Vec::new(),
            vehicle: Vec::new(),
            saturated_ticks: 0,
            overcurrent_events: 0,
        }
    }

    #[test]
    fn counts_match_a_hand_tally() {
        let traces = vec![
            hand_trace(vec![(0, 0, 1), (1, 0, 1), (1, 0, 2)]),
            hand_trace(vec![(1, 0, 1), (1, 2, FAILURE_STATE)]),
        ];
        let tensor = estimate_transitions(&traces).unwrap();
        assert_eq!(tensor.count(0, 0, 1), 1);
        assert_eq!(tensor.count(1, 0, 1), 2);
        assert_eq!(tensor.count(1, 0, 2), 1);
        assert_eq!(tensor.count(1, 2, FAILURE_STATE), 1);
        assert_eq!(tensor.visits(1, 0), 3);
        assert!((tensor.prob(1, 0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((tensor.prob(1, 0, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tensor.total_observations(), 5);
    }

    #[test]
    fn single_observation_gives_a_unit_row() {
        let tensor = estimate_transitions(&[hand_trace(vec![(7, 1, 9)])]).unwrap();
        assert_eq!(tensor.prob(7, 1, 9), 1.0);
        let row = tensor.row(7, 1);
        assert_eq!(row, vec![(9, 1.0)]);
    }

    #[test]
    fn out_of_range_transitions_are_rejected() {
        let err = estimate_transitions(&[hand_trace(vec![(0, 3, 1)])]);
        assert!(err.is_err());
    }

    #[test]
    fn small_batch_is_reproducible_and_clean() {
        let mut config = SimConfig::default();
        config.estimation_flights = 6;
        config.exploration_fraction = 0.5;
        // Short missions keep the batch fast.
        config.ranges.mission_fraction = [0.05, 0.1];
        let key = ConditionKey::new(
            [HealthGrade::Healthy, HealthGrade::Healthy],
            AmbientTemp::Warm,
        );
        let a = estimate_condition(&config, &key).unwrap();
        let b = estimate_condition(&config, &key).unwrap();
        assert_eq!(a.flights + a.diverged, 6);
        assert!(a.tensor.total_observations() > 0);
        assert_eq!(a.tensor, b.tensor);
        assert_eq!(a.outcomes, b.outcomes);
        for s in 0..=FAILURE_STATE {
            for act in 0..3 {
                let row = a.tensor.row(s, act);
                if row.is_empty() {
                    continue;
                }
                let total: f64 = row.iter().map(|&(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }
}
