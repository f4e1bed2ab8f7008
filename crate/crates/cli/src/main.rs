//! Command line driver: estimate transition models from simulated flights,
//! solve switching policies, and export case-study or single-flight traces.
//!
//! Exit codes: 0 on success, 1 for usage and configuration problems, 2 when
//! a model run itself fails (diverging flights, non-converging solves).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use battmdp_core::config::SimConfig;
use battmdp_core::mdp::{
    value_iteration, ConditionKey, MdpError, PolicyStore, ValueIterationSettings,
};
use battmdp_core::montecarlo::{
    estimate_condition, run_case_study, simulate_flight, write_battery_csv,
    write_epochs_csv, write_vehicle_csv, ActionSource, EstimationReport, FlightContext,
    FlightOutcome, FlightScenario, FlightTrace, RunMeta, ScenarioReport, SimError,
    TraceDetail,
};
use battmdp_core::montecarlo::ActionSpec;
use battmdp_core::{BatteryError, VehicleError};

#[derive(Parser)]
#[command(name = "battmdp", version, about = "Two-battery switching studies")]
struct Cli {
    /// Configuration file (JSON). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configuration's base seed, or the scenario's own seed
    /// for `flight`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly randomized missions and estimate per-condition transition models.
    Estimate {
        /// Override the number of flights per condition.
        #[arg(long)]
        flights: Option<usize>,
        /// Single condition label such as F1_F1_TH; all conditions when
        /// omitted.
        #[arg(long)]
        condition: Option<String>,
        /// Directory receiving one tensor_<CONDITION>.json per condition.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve switching policies from estimated transition models.
    Solve {
        /// Directory holding tensor_<CONDITION>.json files.
        #[arg(long)]
        tensors: PathBuf,
        /// Single condition label; all conditions found when omitted.
        #[arg(long)]
        condition: Option<String>,
        /// Convergence tolerance override.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Output policy store (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scripted case study and export its traces.
    CaseStudy {
        /// Study number, 1 through 4.
        #[arg(long)]
        case: usize,
        /// Policy store produced by `solve`; required by studies 2 and 4.
        #[arg(long)]
        policies: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fly one scenario file and export its traces.
    Flight {
        /// Scenario description (JSON).
        #[arg(long)]
        scenario: PathBuf,
        /// Policy store, required when the scenario's action is "policy".
        #[arg(long)]
        policies: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Tensor file layout: provenance plus the estimation report.
#[derive(Serialize, Deserialize)]
struct TensorFile {
    meta: RunMeta,
    report: EstimationReport,
}

/// Per-condition solver diagnostics stored alongside the policies.
#[derive(Serialize, Deserialize)]
struct SolveDiag {
    condition: String,
    sweeps: usize,
    residual: f64,
    observations: u64,
}

/// Policy store file layout.
#[derive(Serialize, Deserialize)]
struct PolicyFile {
    meta: RunMeta,
    settings: ValueIterationSettings,
    diagnostics: Vec<SolveDiag>,
    store: PolicyStore,
}

/// Flight summary written next to the CSV exports.
#[derive(Serialize)]
struct FlightSummary {
    meta: RunMeta,
    name: String,
    outcome: FlightOutcome,
    planned_duration: f64,
    t_end: f64,
    epochs: usize,
    saturated_ticks: u64,
    overcurrent_events: u64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Treat every parse problem, including --help and --version,
            // through clap's printer; only real errors exit nonzero.
            let is_help = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// 1 for configuration and usage problems, 2 when the models themselves
/// fail at runtime.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(sim) = cause.downcast_ref::<SimError>() {
            return match sim {
                SimError::Battery(_) | SimError::Vehicle(_) => 2,
                SimError::Mdp(MdpError::NoConvergence { .. }) => 2,
                _ => 1,
            };
        }
        if let Some(mdp) = cause.downcast_ref::<MdpError>() {
            return match mdp {
                MdpError::NoConvergence { .. } => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<BatteryError>().is_some()
            || cause.downcast_ref::<VehicleError>().is_some()
        {
            return 2;
        }
    }
    1
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<SimConfig> {
    let mut config = match path {
        Some(p) => SimConfig::load(p)
            .with_context(|| format!("loading configuration {}", p.display()))?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn parse_condition(label: &str) -> Result<ConditionKey> {
    ConditionKey::from_label(label).ok_or_else(|| {
        anyhow!(
            "unknown condition {label}; expected <grade>_<grade>_<temp> like F1_F2_TH"
        )
    })
}

fn tensor_path(dir: &Path, key: &ConditionKey) -> PathBuf {
    dir.join(format!("tensor_{}.json", key.label()))
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Estimate {
            flights,
            condition,
            out,
        } => estimate(config, flights, condition.as_deref(), &out),
        Command::Solve {
            tensors,
            condition,
            tolerance,
            out,
        } => solve(config, &tensors, condition.as_deref(), tolerance, &out),
        Command::CaseStudy {
            case,
            policies,
            out,
        } => case_study(config, case, policies.as_deref(), &out),
        Command::Flight {
            scenario,
            policies,
            out,
        } => flight(config, &scenario, policies.as_deref(), cli.seed, &out),
    }
}

fn conditions_for(label: Option<&str>) -> Result<Vec<ConditionKey>> {
    match label {
        Some(l) => Ok(vec![parse_condition(l)?]),
        None => Ok(ConditionKey::all()),
    }
}

fn estimate(
    mut config: SimConfig,
    flights: Option<usize>,
    condition: Option<&str>,
    out: &Path,
) -> Result<()> {
    if let Some(n) = flights {
        config.estimation_flights = n;
    }
    config.validate()?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let meta = RunMeta::new(&config);
    for key in conditions_for(condition)? {
        let report = estimate_condition(&config, &key)?;
        let path = tensor_path(out, &key);
        let file = TensorFile {
            meta: meta.clone(),
            report,
        };
        fs::write(&path, serde_json::to_vec_pretty(&file)?)
            .with_context(|| format!("writing {}", path.display()))?;
        let report = &file.report;
        println!(
            "{}: {} flights kept, {} diverged, {} transitions, coverage {:.1}%",
            key.label(),
            report.flights,
            report.diverged,
            report.tensor.total_observations(),
            100.0 * report.tensor.coverage(),
        );
    }
    Ok(())
}

fn solve(
    mut config: SimConfig,
    tensors: &Path,
    condition: Option<&str>,
    tolerance: Option<f64>,
    out: &Path,
) -> Result<()> {
    if let Some(tol) = tolerance {
        config.solver.tol = tol;
    }
    config.validate()?;
    let keys = match condition {
        Some(_) => conditions_for(condition)?,
        // Catalog order, not readdir order, so the store is deterministic.
        None => {
            let present: Vec<ConditionKey> = ConditionKey::all()
                .into_iter()
                .filter(|key| tensor_path(tensors, key).exists())
                .collect();
            if present.is_empty() {
                bail!(
                    "no tensor_<CONDITION>.json files in {}",
                    tensors.display()
                );
            }
            present
        }
    };
    let mut store = PolicyStore::new();
    let mut diagnostics = Vec::new();
    for key in keys {
        let path = tensor_path(tensors, &key);
        if !path.exists() {
            bail!(
                "no transition model for condition {} (expected {})",
                key.label(),
                path.display()
            );
        }
        let raw = fs::read(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let file: TensorFile = serde_json::from_slice(&raw)
            .with_context(|| format!("parsing {}", path.display()))?;
        let solution = value_iteration(&file.report.tensor, &config.reward, &config.solver)?;
        println!(
            "{}: {} sweeps, residual {:.3e}",
            key.label(),
            solution.sweeps,
            solution.residual
        );
        diagnostics.push(SolveDiag {
            condition: key.label(),
            sweeps: solution.sweeps,
            residual: solution.residual,
            observations: file.report.tensor.total_observations(),
        });
        store.insert(key, solution.policy);
    }
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file = PolicyFile {
        meta: RunMeta::new(&config),
        settings: config.solver,
        diagnostics,
        store,
    };
    fs::write(out, serde_json::to_vec_pretty(&file)?)
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn load_policies(path: &Path) -> Result<PolicyStore> {
    let raw = fs::read(path)
        .with_context(|| format!("reading policy store {}", path.display()))?;
    let file: PolicyFile = serde_json::from_slice(&raw)
        .with_context(|| format!("parsing policy store {}", path.display()))?;
    Ok(file.store)
}

fn write_trace(
    out: &Path,
    meta: &RunMeta,
    name: &str,
    trace: &FlightTrace,
) -> Result<FlightSummary> {
    let mut batt = Vec::new();
    write_battery_csv(&mut batt, meta, &trace.battery)?;
    fs::write(out.join(format!("battery_{name}.csv")), batt)?;
    let mut veh = Vec::new();
    write_vehicle_csv(&mut veh, meta, &trace.vehicle)?;
    fs::write(out.join(format!("vehicle_{name}.csv")), veh)?;
    let mut ep = Vec::new();
    write_epochs_csv(&mut ep, meta, &trace.epochs)?;
    fs::write(out.join(format!("epochs_{name}.csv")), ep)?;
    Ok(FlightSummary {
        meta: meta.clone(),
        name: name.to_string(),
        outcome: trace.outcome,
        planned_duration: trace.planned_duration,
        t_end: trace.t_end,
        epochs: trace.epochs.len(),
        saturated_ticks: trace.saturated_ticks,
        overcurrent_events: trace.overcurrent_events,
    })
}

fn case_study(
    config: SimConfig,
    case: usize,
    policies: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let store = policies.map(load_policies).transpose()?;
    let report = run_case_study(&config, case, store.as_ref())?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let meta = RunMeta::new(&config);
    let mut summaries = Vec::new();
    for ScenarioReport { name, trace } in &report.scenarios {
        let summary = write_trace(out, &meta, name, trace)?;
        println!(
            "case {} {}: {} after {:.1} of {:.1} s",
            case,
            name,
            trace.outcome.label(),
            trace.t_end,
            trace.planned_duration
        );
        summaries.push(summary);
    }
    #[derive(Serialize)]
    struct CaseFile {
        meta: RunMeta,
        id: usize,
        description: String,
        baseline_eod: f64,
        scenarios: Vec<FlightSummary>,
    }
    let file = CaseFile {
        meta,
        id: report.id,
        description: report.description.clone(),
        baseline_eod: report.baseline_eod,
        scenarios: summaries,
    };
    fs::write(out.join("report.json"), serde_json::to_vec_pretty(&file)?)?;
    Ok(())
}

fn flight(
    config: SimConfig,
    scenario_path: &Path,
    policies: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let raw = fs::read(scenario_path)
        .with_context(|| format!("reading scenario {}", scenario_path.display()))?;
    let mut scenario: FlightScenario = serde_json::from_slice(&raw)
        .with_context(|| format!("parsing scenario {}", scenario_path.display()))?;
    // The scenario's seed is the one that drives the trace.
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let store = policies.map(load_policies).transpose()?;
    let ctx = FlightContext::new(&config)?;
    let source = match &scenario.action {
        ActionSpec::Fixed(a) => ActionSource::Fixed(*a),
        ActionSpec::Explore => ActionSource::Explore,
        ActionSpec::Policy => {
            let store = store.as_ref().ok_or_else(|| {
                anyhow!("scenario asks for a policy; pass --policies <store>")
            })?;
            let key = scenario.condition();
            let policy = store
                .get(&key)
                .with_context(|| format!("policy store lacks condition {}", key.label()))?;
            ActionSource::Policy(policy)
        }
    };
    let trace = simulate_flight(&ctx, &scenario, source, TraceDetail::Full)?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let mut meta = RunMeta::new(&config);
    meta.seed = scenario.seed;
    let summary = write_trace(out, &meta, "flight", &trace)?;
    fs::write(
        out.join("summary.json"),
        serde_json::to_vec_pretty(&summary)?,
    )?;
    println!(
        "flight: {} after {:.1} of {:.1} s, {} epochs",
        trace.outcome.label(),
        trace.t_end,
        trace.planned_duration,
        trace.epochs.len()
    );
    Ok(())
}
