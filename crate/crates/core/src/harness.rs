//! Command orchestration: training, policy evaluation, comparison and
//! profile export, with every output written atomically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::adp::{train, ConvergenceTrace, PiecewiseLinearVfa};
use crate::baselines::{day_ahead_milp, full_horizon_milp, static_hub_variant};
use crate::config::Config;
use crate::dispatch::Plant;
use crate::error::{Error, Result};
use crate::model::Decision;
use crate::scenario::{write_profiles_csv, ScenarioSet};
use crate::simulate::{curtailment_totals, simulate_policy, CurtailmentTotals, Policy};

/// Policies the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Adp,
    Myopic,
    Mpc,
    /// Perfect-foresight full-day mixed-integer schedule.
    Milp,
    /// Day-ahead mixed-integer schedule with on-the-day recourse.
    MilpDayAhead,
    /// Full-day schedule under the memoryless CCGT model.
    MilpStatic,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Adp => "adp",
            PolicyKind::Myopic => "myopic",
            PolicyKind::Mpc => "mpc",
            PolicyKind::Milp => "milp",
            PolicyKind::MilpDayAhead => "milp-day-ahead",
            PolicyKind::MilpStatic => "milp-static",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PolicyKind::Adp,
            PolicyKind::Myopic,
            PolicyKind::Mpc,
            PolicyKind::Milp,
            PolicyKind::MilpDayAhead,
            PolicyKind::MilpStatic,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one harness invocation, written last.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: u64,
    pub out_dir: String,
    pub build: String,
    pub timings: Vec<Timing>,
}

/// Loaded configuration and output location of one run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: Config,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
}

impl RunContext {
    pub fn new(config: Config, config_path: Option<PathBuf>, out: PathBuf) -> Self {
        RunContext {
            config,
            config_path,
            out,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn manifest(&self, command: &str, timings: Vec<Timing>) -> Result<()> {
        let m = RunManifest {
            command: command.to_string(),
            config_path: self.config_path.as_ref().map(|p| p.display().to_string()),
            seed: self.config.seed,
            out_dir: self.out.display().to_string(),
            build: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
            timings,
        };
        write_json(&self.path(&format!("manifest_{command}.json")), &m)
    }
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Serde(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Serde(e.to_string()))
}

fn timed<T>(timings: &mut Vec<Timing>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.push(Timing {
        stage: stage.to_string(),
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub vfa: PiecewiseLinearVfa,
    pub trace: ConvergenceTrace,
}

fn train_and_save(ctx: &RunContext, plant: &Plant) -> Result<TrainOutcome> {
    let set = ctx.config.training_set()?;
    let (vfa, trace) = train(&ctx.config.training_config(), &set, plant)?;
    write_atomic(&ctx.path("vfa.json"), (vfa.to_json()? + "\n").as_bytes())?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    write_atomic(&ctx.path("convergence.csv"), &buf)?;
    Ok(TrainOutcome { vfa, trace })
}

/// Trains the value functions; writes `vfa.json` and `convergence.csv`.
pub fn cmd_train(ctx: &RunContext) -> Result<TrainOutcome> {
    let mut timings = Vec::new();
    let plant = ctx.config.plant()?;
    let out = timed(&mut timings, "train", || train_and_save(ctx, &plant))?;
    ctx.manifest("train", timings)?;
    Ok(out)
}

/// Outcome of one policy on one scenario.
#[derive(Debug, Clone)]
pub struct PolicyRun {
    pub scenario: usize,
    pub total_cost: f64,
    pub curtailment: CurtailmentTotals,
    pub decisions: Vec<Decision>,
    /// CCGT heat per ARMA sample, MW.
    pub heat_trace: Vec<f64>,
}

/// Runs `kind` on scenarios `0..count` of `set` in parallel.
pub fn run_policy(
    config: &Config,
    plant: &Plant,
    kind: PolicyKind,
    vfa: Option<&PiecewiseLinearVfa>,
    set: &ScenarioSet,
    count: usize,
) -> Result<Vec<PolicyRun>> {
    let forecast = set.forecast_rows();
    let segments = config.training.segments;
    let dt = config.plant.dt_hours;
    let mode = config.milp_mode();
    if kind == PolicyKind::Adp && vfa.is_none() {
        return Err(Error::Config(
            "the adp policy needs a trained value function".into(),
        ));
    }
    (0..count)
        .into_par_iter()
        .map(|k| {
            let realized = set.realized(k);
            let traj = match kind {
                PolicyKind::Myopic => {
                    simulate_policy(plant, &Policy::Myopic { segments }, &forecast, &realized)?
                }
                PolicyKind::Adp => simulate_policy(
                    plant,
                    &Policy::Vfa(vfa.expect("checked")),
                    &forecast,
                    &realized,
                )?,
                PolicyKind::Mpc => simulate_policy(
                    plant,
                    &Policy::Mpc {
                        config: config.mpc,
                        vfa,
                    },
                    &forecast,
                    &realized,
                )?,
                PolicyKind::Milp => full_horizon_milp(plant, &realized, mode)?.trajectory,
                PolicyKind::MilpDayAhead => {
                    day_ahead_milp(plant, &forecast, &realized, mode, segments)?.trajectory
                }
                PolicyKind::MilpStatic => {
                    let s = static_hub_variant(plant, &realized, mode)?;
                    let decisions = s.program.decisions;
                    let curtailment = curtailment_totals(&decisions, dt);
                    return Ok(PolicyRun {
                        scenario: k,
                        total_cost: s.program.stage_cost,
                        curtailment,
                        decisions,
                        heat_trace: s.heat_trace,
                    });
                }
            };
            Ok(PolicyRun {
                scenario: k,
                total_cost: traj.total_cost,
                curtailment: traj.curtailment(dt),
                decisions: traj.decisions,
                heat_trace: traj.heat_trace,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioCost {
    pub scenario: usize,
    pub total_cost: f64,
    pub wind_curtail_mwh: f64,
    pub load_curtail_mwh: f64,
    pub heat_curtail_mwh: f64,
    pub heat_dump_mwh: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationSummary {
    pub policy: String,
    pub scenarios: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_curtailment: CurtailmentTotals,
    pub per_scenario: Vec<ScenarioCost>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn summarize(kind: PolicyKind, runs: &[PolicyRun]) -> EvaluationSummary {
    let costs: Vec<f64> = runs.iter().map(|r| r.total_cost).collect();
    let (mean_cost, std_cost) = mean_std(&costs);
    let n = runs.len().max(1) as f64;
    let sum = runs
        .iter()
        .fold(CurtailmentTotals::default(), |a, r| CurtailmentTotals {
            wind: a.wind + r.curtailment.wind,
            load: a.load + r.curtailment.load,
            heat: a.heat + r.curtailment.heat,
            heat_dump: a.heat_dump + r.curtailment.heat_dump,
        });
    EvaluationSummary {
        policy: kind.name().to_string(),
        scenarios: runs.len(),
        mean_cost,
        std_cost,
        mean_curtailment: CurtailmentTotals {
            wind: sum.wind / n,
            load: sum.load / n,
            heat: sum.heat / n,
            heat_dump: sum.heat_dump / n,
        },
        per_scenario: runs
            .iter()
            .map(|r| ScenarioCost {
                scenario: r.scenario,
                total_cost: r.total_cost,
                wind_curtail_mwh: r.curtailment.wind,
                load_curtail_mwh: r.curtailment.load,
                heat_curtail_mwh: r.curtailment.heat,
                heat_dump_mwh: r.curtailment.heat_dump,
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct DispatchRecord<'a> {
    scenario: usize,
    period: usize,
    unit: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct HeatRecord {
    scenario: usize,
    period: usize,
    sample: usize,
    heat_mw: f64,
}

fn dispatch_records(runs: &[PolicyRun]) -> impl Iterator<Item = DispatchRecord<'static>> + '_ {
    runs.iter().flat_map(|r| {
        r.decisions.iter().enumerate().flat_map(move |(t, d)| {
            let flag = |b: bool| if b { 1.0 } else { 0.0 };
            [
                ("fc_power", d.fc_power),
                ("gas_flow", d.gas_flow),
                ("grid_power", d.grid_power),
                ("charge_power", d.charge_power),
                ("discharge_power", d.discharge_power),
                ("charge_flag", flag(d.charge_flag)),
                ("discharge_flag", flag(d.discharge_flag)),
                ("wind_curtail", d.wind_curtail),
                ("load_curtail", d.load_curtail),
                ("heat_curtail", d.heat_curtail),
                ("heat_dump", d.heat_dump),
                ("gb_heat", d.gb_heat),
                ("hp_heat", d.hp_heat),
            ]
            .into_iter()
            .map(move |(unit, value)| DispatchRecord {
                scenario: r.scenario,
                period: t,
                unit,
                value,
            })
        })
    })
}

fn write_policy_outputs(
    ctx: &RunContext,
    kind: PolicyKind,
    runs: &[PolicyRun],
    samples: usize,
) -> Result<EvaluationSummary> {
    let name = kind.name();
    let summary = summarize(kind, runs);
    write_json(&ctx.path(&format!("summary_{name}.json")), &summary)?;
    write_atomic(
        &ctx.path(&format!("scenarios_{name}.csv")),
        &csv_bytes(summary.per_scenario.iter())?,
    )?;
    write_atomic(
        &ctx.path(&format!("dispatch_{name}.csv")),
        &csv_bytes(dispatch_records(runs))?,
    )?;
    let heat = runs.iter().flat_map(|r| {
        r.heat_trace
            .iter()
            .enumerate()
            .map(move |(i, &h)| HeatRecord {
                scenario: r.scenario,
                period: i / samples,
                sample: i % samples,
                heat_mw: h,
            })
    });
    write_atomic(
        &ctx.path(&format!("heat_trace_{name}.csv")),
        &csv_bytes(heat)?,
    )?;
    Ok(summary)
}

fn load_vfa(path: &Path) -> Result<PiecewiseLinearVfa> {
    if !path.exists() {
        return Err(Error::Config(format!(
            "value function file {} not found; run `train` first",
            path.display()
        )));
    }
    PiecewiseLinearVfa::load(path)
}

/// Evaluates one policy on the shared evaluation scenarios.
pub fn cmd_evaluate(
    ctx: &RunContext,
    kind: PolicyKind,
    scenarios: usize,
    vfa_path: Option<&Path>,
) -> Result<EvaluationSummary> {
    let mut timings = Vec::new();
    let plant = ctx.config.plant()?;
    let needs_vfa =
        kind == PolicyKind::Adp || (kind == PolicyKind::Mpc && ctx.config.mpc.terminal_vfa);
    let vfa = if needs_vfa {
        let default = ctx.path("vfa.json");
        Some(load_vfa(vfa_path.unwrap_or(&default))?)
    } else {
        None
    };
    let set = ctx.config.evaluation_set(scenarios)?;
    let runs = timed(&mut timings, kind.name(), || {
        run_policy(&ctx.config, &plant, kind, vfa.as_ref(), &set, scenarios)
    })?;
    let summary = write_policy_outputs(ctx, kind, &runs, plant.lift.samples_per_period())?;
    ctx.manifest("evaluate", timings)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub policy: String,
    pub mean_cost: f64,
    pub std_cost: f64,
    /// Saving relative to the myopic mean, percent.
    pub pct_vs_myopic: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// Per-scenario costs, one column per policy in `rows` order.
    pub costs: Vec<Vec<f64>>,
    pub trace: Option<ConvergenceTrace>,
}

impl Comparison {
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<16} {:>12} {:>10} {:>10} {:>10}\n",
            "policy", "mean_cost", "std", "vs_myopic", "runtime_s"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:>12.2} {:>10.2} {:>9.2}% {:>10.2}",
                r.policy, r.mean_cost, r.std_cost, r.pct_vs_myopic, r.runtime_s
            );
        }
        s
    }
}

pub const COMPARED: [PolicyKind; 5] = [
    PolicyKind::Milp,
    PolicyKind::MilpDayAhead,
    PolicyKind::Mpc,
    PolicyKind::Adp,
    PolicyKind::Myopic,
];

/// Runs every policy on the same evaluation scenarios (common random
/// numbers). Trains the value functions first unless `vfa_path` is given.
pub fn cmd_compare(
    ctx: &RunContext,
    scenarios: usize,
    vfa_path: Option<&Path>,
) -> Result<Comparison> {
    let mut timings = Vec::new();
    let plant = ctx.config.plant()?;
    let (vfa, trace) = match vfa_path {
        Some(p) => (load_vfa(p)?, None),
        None => {
            let out = timed(&mut timings, "train", || train_and_save(ctx, &plant))?;
            (out.vfa, Some(out.trace))
        }
    };
    let set = ctx.config.evaluation_set(scenarios)?;
    let mut results = Vec::new();
    for kind in COMPARED {
        let start = Instant::now();
        let runs = run_policy(&ctx.config, &plant, kind, Some(&vfa), &set, scenarios)?;
        let secs = start.elapsed().as_secs_f64();
        timings.push(Timing {
            stage: kind.name().to_string(),
            seconds: secs,
        });
        results.push((kind, runs, secs));
    }
    let myopic = results
        .iter()
        .find(|r| r.0 == PolicyKind::Myopic)
        .map(|r| summarize(r.0, &r.1).mean_cost)
        .expect("myopic is compared");
    let rows: Vec<CompareRow> = results
        .iter()
        .map(|(kind, runs, secs)| {
            let s = summarize(*kind, runs);
            CompareRow {
                policy: kind.name().to_string(),
                mean_cost: s.mean_cost,
                std_cost: s.std_cost,
                pct_vs_myopic: 100.0 * (myopic - s.mean_cost) / myopic,
                runtime_s: *secs,
            }
        })
        .collect();
    let costs: Vec<Vec<f64>> = (0..scenarios)
        .map(|k| results.iter().map(|r| r.1[k].total_cost).collect())
        .collect();

    write_atomic(&ctx.path("compare.csv"), &csv_bytes(rows.iter())?)?;
    write_json(&ctx.path("compare.json"), &rows)?;
    let mut per = String::from("scenario");
    for (kind, _, _) in &results {
        per.push(',');
        per.push_str(kind.name());
    }
    per.push('\n');
    for (k, row) in costs.iter().enumerate() {
        let _ = write!(per, "{k}");
        for c in row {
            let _ = write!(per, ",{c}");
        }
        per.push('\n');
    }
    write_atomic(&ctx.path("compare_scenarios.csv"), per.as_bytes())?;
    ctx.manifest("compare", timings)?;
    Ok(Comparison { rows, costs, trace })
}

#[derive(Serialize)]
struct RealizedRecord {
    scenario: usize,
    period: usize,
    wind: f64,
    demand_e: f64,
    price: f64,
    demand_q: f64,
}

/// Writes the forecast profile, the realized scenarios and their manifest.
pub fn cmd_gen_profiles(ctx: &RunContext, scenarios: usize) -> Result<ScenarioSet> {
    let set = ctx.config.evaluation_set(scenarios)?;
    let mut buf = Vec::new();
    write_profiles_csv(&set.forecast, &mut buf)?;
    write_atomic(&ctx.path("profiles.csv"), &buf)?;
    let rows = (0..scenarios).flat_map(|k| {
        set.realized(k).into_iter().map(move |r| RealizedRecord {
            scenario: k,
            period: r.period,
            wind: r.wind,
            demand_e: r.demand_e,
            price: r.price,
            demand_q: r.demand_q,
        })
    });
    write_atomic(&ctx.path("scenarios.csv"), &csv_bytes(rows)?)?;
    write_json(&ctx.path("scenario_manifest.json"), &set.manifest())?;
    ctx.manifest("gen-profiles", Vec::new())?;
    Ok(set)
}
