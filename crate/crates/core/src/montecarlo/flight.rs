//! Single closed-loop flight.
//!
//! The control loop runs at `control_hz`; the decision loop runs at 1 Hz on
//! top of it. Each control tick tracks the mission reference with the
//! feedback gains, allocates rotor speeds, converts the realized motor load
//! into pack current at the lagged bus voltage, and steps the pack, the
//! rigid body, and the wind. Each decision epoch grades telemetry into a
//! state index and applies a switching action.
//!
//! Outcome rules, in the order they are checked:
//! * a non-finite state or a tracking error beyond the configured bound
//!   aborts the flight as `Diverged`;
//! * reaching the planned duration completes the flight, graded
//!   `EnergyShortfall` when the last decision epoch predicted less endurance
//!   than the time that remained, `MissionSuccess` otherwise;
//! * an in-use cell at or below cutoff between decision epochs ends the
//!   flight as `EnergyShortfall`; when the crossing lands exactly on an
//!   epoch boundary the encoder sees it instead and the flight ends in the
//!   `Failure` state.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::battery::{
    apply_degradation, estimate_eod, Cell, CellParams, PackState,
};
use crate::config::SimConfig;
use crate::mdp::{Action, EncodeThresholds, Telemetry, FAILURE_STATE};
use crate::vehicle::{
    dlqr_gains, motor_current, step_dynamics, total_battery_current, DlqrGains,
    MissionPlan, MotorAllocator, VehicleState, WindModel,
};

use super::scenario::{FlightScenario, MissionSizing};
use super::SimError;

/// How much of the flight to keep in the returned trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceDetail {
    /// Decision epochs and state transitions only.
    Decisions,
    /// Everything, including per-tick battery and vehicle rows.
    Full,
}

/// How the switching action is chosen at each decision epoch.
#[derive(Debug, Clone, Copy)]
pub enum ActionSource<'a> {
    /// The same action every epoch.
    Fixed(Action),
    /// Greedy action from a solved policy.
    Policy(&'a crate::mdp::Policy),
    /// Uniform random action each epoch, drawn from the flight stream.
    Explore,
}

/// Terminal grade of one flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlightOutcome {
    /// Flew the full planned duration with endurance to spare at the end.
    MissionSuccess,
    /// Ran out of usable energy: either an in-use cell hit cutoff early or
    /// the final endurance prediction fell short of the remaining time.
    EnergyShortfall,
    /// A decision epoch graded the pack as failed.
    Failure,
    /// Controller abort: non-finite state or unbounded tracking error.
    /// Excluded from transition estimation.
    Diverged,
}

impl FlightOutcome {
    pub fn label(self) -> &'static str {
        match self {
            FlightOutcome::MissionSuccess => "MissionSuccess",
            FlightOutcome::EnergyShortfall => "EnergyShortfall",
            FlightOutcome::Failure => "Failure",
            FlightOutcome::Diverged => "Diverged",
        }
    }
}

/// Per-tick battery snapshot.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BatteryTick {
    pub t: f64,
    pub bus_voltage: f64,
    pub demand: f64,
    pub branch_current: [f64; 2],
    pub min_cell_voltage: [f64; 2],
    pub min_soc: [f64; 2],
}

/// Per-tick vehicle snapshot.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VehicleTick {
    pub t: f64,
    pub pos: [f64; 3],
    pub reference: [f64; 3],
    pub thrust: f64,
    pub torque: [f64; 3],
    pub omega: [f64; 6],
    pub motor_current: f64,
}

/// One decision epoch: the graded state and the action applied in it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochRecord {
    pub t: f64,
    pub state: usize,
    pub action: Action,
    /// Total demand at the grading instant, amps.
    pub demand: f64,
    /// Predicted time to cutoff per battery, seconds.
    pub eod: [f64; 2],
    /// Predicted time to cutoff for the pack as flown, seconds.
    pub eod_pack: f64,
    /// Flight time still required, seconds.
    pub rfd: f64,
    pub switch_on: [bool; 2],
}

/// Everything recorded from one flight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlightTrace {
    pub scenario: FlightScenario,
    pub outcome: FlightOutcome,
    /// Mission duration the flight was committed to, seconds.
    pub planned_duration: f64,
    /// Time at which the flight ended, seconds.
    pub t_end: f64,
    pub epochs: Vec<EpochRecord>,
    /// `(state, action index, next state)` per completed decision epoch.
    pub transitions: Vec<(usize, usize, usize)>,
    /// Per-tick rows; empty unless `TraceDetail::Full` was requested.
    pub battery: Vec<BatteryTick>,
    /// Per-tick rows; empty unless `TraceDetail::Full` was requested.
    pub vehicle: Vec<VehicleTick>,
    /// Control ticks on which the allocator hit a rotor speed limit.
    pub saturated_ticks: u64,
    /// Pack steps that exceeded the configured branch current bound.
    pub overcurrent_events: u64,
}

/// Precomputed per-configuration pieces shared by every flight: feedback
/// gains, the allocator, hover feedforward, and the healthy cell bank.
#[derive(Debug, Clone)]
pub struct FlightContext {
    pub config: SimConfig,
    gains: DlqrGains,
    allocator: MotorAllocator,
    hover_thrust: f64,
    /// Total motor draw in steady hover, amps at nominal voltage. Seeds the
    /// demand predictor before any epoch completes and sizes missions given
    /// as a fraction of predicted endurance.
    pub hover_current: f64,
    branch_cells: Vec<CellParams>,
}

impl FlightContext {
    /// Healthy per-branch cell parameters, in series order.
    pub fn branch_cells(&self) -> &[CellParams] {
        &self.branch_cells
    }
}

impl FlightContext {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let dt = config.control_dt();
        let gains = dlqr_gains(&config.vehicle, &config.control, dt)?;
        let allocator = MotorAllocator::new(&config.vehicle)?;
        let hover_thrust = config.vehicle.hover_thrust();
        let hover = allocator.allocate([hover_thrust, 0.0, 0.0, 0.0])?;
        let hover_current = hover
            .omegas()
            .iter()
            .map(|&w| motor_current(&config.motor, w))
            .sum();
        let branch_cells = config.cells.branch_cells()?;
        Ok(Self {
            config: config.clone(),
            gains,
            allocator,
            hover_thrust,
            hover_current,
            branch_cells,
        })
    }

    /// Builds the two-battery pack for a scenario: each battery takes the
    /// bank cells with its health fades applied, rested at the state of
    /// charge whose open-circuit voltage matches the scenario's initial
    /// per-cell voltage.
    pub fn build_pack(&self, scenario: &FlightScenario) -> Result<PackState, SimError> {
        let mut branches: [Vec<Cell>; 2] = [Vec::new(), Vec::new()];
        for j in 0..2 {
            for params in &self.branch_cells {
                let faded = apply_degradation(params, &scenario.health[j]);
                let z = faded.ocv.soc_for_voltage(scenario.initial_voltage[j]);
                branches[j].push(Cell::rested(faded, z));
            }
        }
        Ok(PackState::new(branches, self.config.pack.clone())?)
    }

    /// Resolves the scenario's sizing rule into a concrete duration. A
    /// fraction sizes against the pack's predicted endurance at hover
    /// demand with both batteries connected.
    pub fn mission_duration(
        &self,
        scenario: &FlightScenario,
        pack: &PackState,
    ) -> Result<f64, SimError> {
        Ok(match scenario.sizing {
            MissionSizing::Duration(d) => d,
            MissionSizing::EodFraction(f) => {
                let eod = estimate_eod(pack, self.hover_current, &self.config.eod)?;
                f * eod.pack
            }
        })
    }
}

/// Runs one flight. The scenario must validate; the duration must either be
/// zero (an immediate, epoch-free success) or long enough to fit the climb
/// and descent legs of the mission profile.
pub fn simulate_flight(
    ctx: &FlightContext,
    scenario: &FlightScenario,
    source: ActionSource<'_>,
    detail: TraceDetail,
) -> Result<FlightTrace, SimError> {
    let pack = ctx.build_pack(scenario)?;
    simulate_flight_on(ctx, scenario, pack, source, detail)
}

/// [`simulate_flight`] on a caller-built pack, for setups whose cells differ
/// from what the scenario's health grades alone would produce.
pub fn simulate_flight_on(
    ctx: &FlightContext,
    scenario: &FlightScenario,
    mut pack: PackState,
    source: ActionSource<'_>,
    detail: TraceDetail,
) -> Result<FlightTrace, SimError> {
    scenario.validate()?;
    let cfg = &ctx.config;
    let dt = cfg.control_dt();
    let ticks_per_epoch = cfg.control_hz as u64;

    pack.set_switches([true, true]);
    let duration = ctx.mission_duration(scenario, &pack)?;

    let mut trace = FlightTrace {
        scenario: scenario.clone(),
        outcome: FlightOutcome::MissionSuccess,
        planned_duration: duration,
        t_end: 0.0,
        epochs: Vec::new(),
        transitions: Vec::new(),
        battery: Vec::new(),
        vehicle: Vec::new(),
        saturated_ticks: 0,
        overcurrent_events: 0,
    };
    if duration <= 0.0 {
        return Ok(trace);
    }

    let mission = MissionPlan::out_and_back(
        duration,
        scenario.cruise_speed,
        0.0,
        cfg.mission.altitude,
        cfg.mission.climb_rate,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let steady = [
        scenario.wind_speed * scenario.wind_direction.cos(),
        scenario.wind_speed * scenario.wind_direction.sin(),
    ];
    let mut wind = WindModel::new(steady, scenario.gust, scenario.cruise_speed, dt)?;
    let mut vehicle = VehicleState::at_rest([0.0; 3]);
    let thresholds = EncodeThresholds {
        safety_time: scenario.safety_time,
        ..cfg.thresholds
    };

    let mut bus = pack.peek(0.0)?.bus_voltage;
    // Demand at the most recent completed tick; zero before the first.
    let mut demand_now = 0.0;
    let mut window: VecDeque<f64> = VecDeque::with_capacity(cfg.demand_window_epochs);
    let mut epoch_sum = 0.0;
    let mut prev: Option<(usize, usize)> = None;
    // Whether the last decision epoch predicted less endurance than the
    // time remaining; grades a completed mission.
    let mut shortfall_flag = false;

    let mut k: u64 = 0;
    let outcome = 'flight: loop {
        // Decision epoch boundary at t = k dt.
        let t = k as f64 * dt;
        if t >= duration - 1e-9 {
            trace.t_end = t;
            break if shortfall_flag {
                FlightOutcome::EnergyShortfall
            } else {
                FlightOutcome::MissionSuccess
            };
        }
        let predicted = if window.is_empty() {
            ctx.hover_current
        } else {
            window.iter().sum::<f64>() / window.len() as f64
        };
        let eod = estimate_eod(&pack, predicted, &cfg.eod)?;
        let rfd = mission.remaining(t);
        let info = pack.peek(demand_now)?;
        let telemetry = Telemetry {
            demand: demand_now,
            eod: eod.branch,
            rfd,
            min_cell_voltage: info.min_cell_voltage,
            switch_on: pack.switch_on,
        };
        let state = telemetry.encode(&thresholds);
        if let Some((ps, pa)) = prev {
            trace.transitions.push((ps, pa, state));
        }
        if state == FAILURE_STATE {
            trace.t_end = t;
            break FlightOutcome::Failure;
        }
        shortfall_flag = eod.pack < rfd;

        let action = match source {
            ActionSource::Fixed(a) => a,
            ActionSource::Policy(p) => p.action(state)?,
            ActionSource::Explore => {
                Action::from_index(rng.random_range(0..3)).expect("index in range")
            }
        };
        pack.set_switches(action.switches());
        trace.epochs.push(EpochRecord {
            t,
            state,
            action,
            demand: demand_now,
            eod: eod.branch,
            eod_pack: eod.pack,
            rfd,
            switch_on: action.switches(),
        });
        prev = Some((state, action.index()));

        // Control ticks until the next boundary.
        for _ in 0..ticks_per_epoch {
            let t = k as f64 * dt;
            let ref_pos = mission.reference(t);
            let ref_next = mission.reference(t + dt);
            let x = vehicle.as_vector();
            let mut err = [0.0; 12];
            for i in 0..3 {
                err[i] = x[i] - ref_pos[i];
                err[3 + i] = x[3 + i] - (ref_next[i] - ref_pos[i]) / dt;
                err[6 + i] = x[6 + i];
                err[9 + i] = x[9 + i];
            }
            let du = ctx.gains.control(&err);
            let u = [
                ctx.hover_thrust + du[0],
                du[1],
                du[2],
                du[3],
            ];
            let alloc = ctx.allocator.allocate(u)?;
            if alloc.saturated {
                trace.saturated_ticks += 1;
            }
            let omegas = alloc.omegas();
            let motor_total: f64 = omegas
                .iter()
                .map(|&w| motor_current(&cfg.motor, w))
                .sum();
            let i_total = total_battery_current(motor_total, bus, cfg.nominal_voltage)?;
            let realized = ctx.allocator.realized_wrench(&alloc.omega_sq);
            let gust = wind.current3();
            vehicle = step_dynamics(&vehicle, &cfg.vehicle, realized, gust, dt)?;
            let info = pack.step(i_total, dt)?;
            bus = info.bus_voltage;
            demand_now = i_total;
            epoch_sum += i_total;
            wind.step(&mut rng);
            if detail == TraceDetail::Full {
                trace.battery.push(BatteryTick {
                    t,
                    bus_voltage: info.bus_voltage,
                    demand: i_total,
                    branch_current: info.branch_currents,
                    min_cell_voltage: info.min_cell_voltage,
                    min_soc: info.min_soc,
                });
                trace.vehicle.push(VehicleTick {
                    t,
                    pos: vehicle.pos,
                    reference: ref_next,
                    thrust: realized[0],
                    torque: [realized[1], realized[2], realized[3]],
                    omega: omegas,
                    motor_current: motor_total,
                });
            }
            k += 1;
            let t_next = k as f64 * dt;
            let track_err = {
                let r = mission.reference(t_next);
                let dx = vehicle.pos[0] - r[0];
                let dy = vehicle.pos[1] - r[1];
                let dz = vehicle.pos[2] - r[2];
                (dx * dx + dy * dy + dz * dz).sqrt()
            };
            if !vehicle.is_finite() || track_err > cfg.diverge_position_error {
                trace.t_end = t_next;
                break 'flight FlightOutcome::Diverged;
            }
            if t_next >= duration - 1e-9 && k % ticks_per_epoch != 0 {
                trace.t_end = t_next;
                break 'flight if shortfall_flag {
                    FlightOutcome::EnergyShortfall
                } else {
                    FlightOutcome::MissionSuccess
                };
            }
            let crossed = (0..2).any(|j| {
                pack.switch_on[j] && info.min_cell_voltage[j] <= cfg.pack.cutoff_voltage
            });
            if crossed && k % ticks_per_epoch != 0 {
                trace.t_end = t_next;
                break 'flight FlightOutcome::EnergyShortfall;
            }
        }
        // Epoch complete: fold its mean demand into the predictor window.
        window.push_back(epoch_sum / ticks_per_epoch as f64);
        if window.len() > cfg.demand_window_epochs {
            window.pop_front();
        }
        epoch_sum = 0.0;
    };

    trace.outcome = outcome;
    trace.overcurrent_events = pack.overcurrent_events;
    Ok(trace)
}
