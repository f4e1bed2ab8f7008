//! Four scripted evaluation setups.
//!
//! 1. Baseline: two healthy batteries fly half the pack's predicted
//!    endurance with both connected throughout.
//! 2. The same mission flown under a solved switching policy.
//! 3. Degraded-pack sweep: missions are planned against the healthy
//!    baseline endurance but flown on packs that are (a) healthy with a
//!    deliberate branch resistance mismatch, (b) one battery heavily faded,
//!    (c) both batteries heavily faded. Both switches stay closed, so the
//!    traces expose how the load redistributes and where the endurance
//!    prediction collapses.
//! 4. Mixed-health pack (one capacity-faded, one healthy) flown under a
//!    solved policy, sized near its own predicted endurance, so the policy
//!    has to favor the stronger battery to finish.

use serde::{Deserialize, Serialize};

use crate::battery::{
    estimate_eod, AmbientTemp, Cell, HealthCondition, HealthGrade, PackState,
};
use crate::config::SimConfig;
use crate::mdp::{Action, ConditionKey, PolicyStore};
use crate::vehicle::GustCategory;

use super::flight::{
    simulate_flight, simulate_flight_on, ActionSource, FlightContext, FlightTrace,
    TraceDetail,
};
use super::scenario::{ActionSpec, FlightScenario, MissionSizing};
use super::SimError;

/// Fraction of the healthy pack's predicted endurance flown in studies 1
/// and 2: the classic reserve of half the available energy.
const BASELINE_FRACTION: f64 = 0.5;

/// Fraction of the healthy baseline endurance flown in study 3. Slightly
/// under 1 so the healthy scenario completes while the degraded ones fall
/// short.
const DEGRADED_SWEEP_MARGIN: f64 = 0.95;

/// Fraction of the mixed pack's own predicted endurance flown in study 4.
/// Low enough that both batteries start comfortably supplied, high enough
/// that the schedule matters.
const MIXED_PACK_MARGIN: f64 = 0.9;

/// One flown scenario inside a case study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub trace: FlightTrace,
}

/// Everything a case study produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub id: usize,
    pub description: String,
    /// Predicted endurance of the healthy pack at hover demand, seconds.
    /// Studies 1 to 3 size their missions against it.
    pub baseline_eod: f64,
    pub scenarios: Vec<ScenarioReport>,
}

fn scripted_scenario(
    config: &SimConfig,
    health: [HealthCondition; 2],
    sizing: MissionSizing,
    action: ActionSpec,
    seed_offset: u64,
) -> FlightScenario {
    FlightScenario {
        action,
        safety_time: 8.0,
        initial_voltage: [4.1, 4.1],
        cruise_speed: 5.0,
        wind_speed: 2.0,
        wind_direction: 0.6,
        gust: GustCategory::LowLight,
        health,
        sizing,
        seed: config.seed.wrapping_add(seed_offset),
    }
}

fn healthy_pair() -> [HealthCondition; 2] {
    [
        HealthCondition::healthy(AmbientTemp::Warm),
        HealthCondition::healthy(AmbientTemp::Warm),
    ]
}

/// Predicted endurance of the scenario's pack at hover demand with both
/// batteries connected, seconds.
fn predicted_endurance(
    ctx: &FlightContext,
    health: [HealthCondition; 2],
) -> Result<f64, SimError> {
    let probe = scripted_scenario(
        &ctx.config,
        health,
        MissionSizing::Duration(1.0),
        ActionSpec::Fixed(Action::UseBoth),
        0,
    );
    let pack = ctx.build_pack(&probe)?;
    Ok(estimate_eod(&pack, ctx.hover_current, &ctx.config.eod)?.pack)
}

fn policy_source<'a>(
    store: Option<&'a PolicyStore>,
    key: &ConditionKey,
    id: usize,
) -> Result<ActionSource<'a>, SimError> {
    let store = store.ok_or_else(|| {
        SimError::BadScenario(format!(
            "case study {id} flies a solved policy; provide a policy store"
        ))
    })?;
    Ok(ActionSource::Policy(store.get(key)?))
}

/// Runs one of the four scripted studies. Studies 2 and 4 read the policy
/// for their pack condition from `store`.
pub fn run_case_study(
    config: &SimConfig,
    id: usize,
    store: Option<&PolicyStore>,
) -> Result<CaseStudyReport, SimError> {
    let ctx = FlightContext::new(config)?;
    let baseline_eod = predicted_endurance(&ctx, healthy_pair())?;

    let mut scenarios = Vec::new();
    let description = match id {
        1 => {
            let sc = scripted_scenario(
                config,
                healthy_pair(),
                MissionSizing::Duration(BASELINE_FRACTION * baseline_eod),
                ActionSpec::Fixed(Action::UseBoth),
                101,
            );
            let trace = simulate_flight(
                &ctx,
                &sc,
                ActionSource::Fixed(Action::UseBoth),
                TraceDetail::Full,
            )?;
            scenarios.push(ScenarioReport {
                name: "both-connected".into(),
                trace,
            });
            "healthy pack, both batteries connected, half predicted endurance"
        }
        2 => {
            let key = ConditionKey::new(
                [HealthGrade::Healthy, HealthGrade::Healthy],
                AmbientTemp::Warm,
            );
            let source = policy_source(store, &key, id)?;
            let sc = scripted_scenario(
                config,
                healthy_pair(),
                MissionSizing::Duration(BASELINE_FRACTION * baseline_eod),
                ActionSpec::Policy,
                201,
            );
            let trace = simulate_flight(&ctx, &sc, source, TraceDetail::Full)?;
            scenarios.push(ScenarioReport {
                name: "policy".into(),
                trace,
            });
            "healthy pack flown under the solved policy, half predicted endurance"
        }
        3 => {
            let duration = DEGRADED_SWEEP_MARGIN * baseline_eod;
            // (a) Healthy grades, but battery 2's cells all carry the bank's
            // lowest series resistance, so the branches split unevenly.
            let sc = scripted_scenario(
                config,
                healthy_pair(),
                MissionSizing::Duration(duration),
                ActionSpec::Fixed(Action::UseBoth),
                301,
            );
            let mut branches: [Vec<Cell>; 2] = [Vec::new(), Vec::new()];
            let r_min = ctx
                .branch_cells()
                .iter()
                .map(|c| c.r0)
                .fold(f64::INFINITY, f64::min);
            for params in ctx.branch_cells() {
                let z = params.ocv.soc_for_voltage(sc.initial_voltage[0]);
                branches[0].push(Cell::rested(params.clone(), z));
                let mut flat = params.clone();
                flat.r0 = r_min;
                let z = flat.ocv.soc_for_voltage(sc.initial_voltage[1]);
                branches[1].push(Cell::rested(flat, z));
            }
            let pack = PackState::new(branches, config.pack.clone())?;
            let trace = simulate_flight_on(
                &ctx,
                &sc,
                pack,
                ActionSource::Fixed(Action::UseBoth),
                TraceDetail::Full,
            )?;
            scenarios.push(ScenarioReport {
                name: "resistance-mismatch".into(),
                trace,
            });

            // (b) One battery heavily faded.
            let sc = scripted_scenario(
                config,
                [
                    HealthCondition::healthy(AmbientTemp::Warm),
                    HealthCondition::unhealthy(AmbientTemp::Warm),
                ],
                MissionSizing::Duration(duration),
                ActionSpec::Fixed(Action::UseBoth),
                302,
            );
            let trace = simulate_flight(
                &ctx,
                &sc,
                ActionSource::Fixed(Action::UseBoth),
                TraceDetail::Full,
            )?;
            scenarios.push(ScenarioReport {
                name: "one-degraded".into(),
                trace,
            });

            // (c) Both batteries heavily faded.
            let sc = scripted_scenario(
                config,
                [
                    HealthCondition::unhealthy(AmbientTemp::Warm),
                    HealthCondition::unhealthy(AmbientTemp::Warm),
                ],
                MissionSizing::Duration(duration),
                ActionSpec::Fixed(Action::UseBoth),
                303,
            );
            let trace = simulate_flight(
                &ctx,
                &sc,
                ActionSource::Fixed(Action::UseBoth),
                TraceDetail::Full,
            )?;
            scenarios.push(ScenarioReport {
                name: "both-degraded".into(),
                trace,
            });
            "missions planned for a healthy pack, flown on progressively degraded ones"
        }
        4 => {
            let health = [
                HealthCondition::medium(
                    crate::battery::FadeKind::Capacity,
                    AmbientTemp::Warm,
                ),
                HealthCondition::healthy(AmbientTemp::Warm),
            ];
            let own_eod = predicted_endurance(&ctx, health)?;
            let key = ConditionKey::new(
                [HealthGrade::Medium, HealthGrade::Healthy],
                AmbientTemp::Warm,
            );
            let source = policy_source(store, &key, id)?;
            let sc = scripted_scenario(
                config,
                health,
                MissionSizing::Duration(MIXED_PACK_MARGIN * own_eod),
                ActionSpec::Policy,
                401,
            );
            let trace = simulate_flight(&ctx, &sc, source, TraceDetail::Full)?;
            scenarios.push(ScenarioReport {
                name: "policy-switching".into(),
                trace,
            });
            "capacity-faded battery paired with a healthy one, flown under the solved policy"
        }
        other => {
            return Err(SimError::BadScenario(format!(
                "unknown case study {other}; expected 1 through 4"
            )))
        }
    };

    Ok(CaseStudyReport {
        id,
        description: description.to_string(),
        baseline_eod,
        scenarios,
    })
}
