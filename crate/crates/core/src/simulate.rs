//! Policy rollouts against a realized exogenous series.

use serde::Serialize;

use crate::adp::PiecewiseLinearVfa;
use crate::baselines::{mpc_decide, myopic_decide, MpcConfig};
use crate::ccgt::intra_period_trace;
use crate::dispatch::{solve_period, Plant};
use crate::error::{Error, Result};
use crate::model::{stage_cost, transition, Decision, ExogenousSample, ForecastRow, SystemState};

/// A sequential decision rule.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    /// Zero continuation value over `segments` segments.
    Myopic { segments: usize },
    /// Period subproblem valued with a trained VFA.
    Vfa(&'a PiecewiseLinearVfa),
    /// Receding-horizon lookahead, optionally closed with a trained VFA.
    Mpc {
        config: MpcConfig,
        vfa: Option<&'a PiecewiseLinearVfa>,
    },
}

/// Totals of shed or vented energy over a day, MWh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CurtailmentTotals {
    pub wind: f64,
    pub load: f64,
    pub heat: f64,
    pub heat_dump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// State at the start of each period.
    pub states: Vec<SystemState>,
    pub decisions: Vec<Decision>,
    pub stage_costs: Vec<f64>,
    pub total_cost: f64,
    /// CCGT heat at every ARMA sample of the day, MW.
    pub heat_trace: Vec<f64>,
}

/// Energy shed or vented by a schedule.
pub fn curtailment_totals(decisions: &[Decision], dt_hours: f64) -> CurtailmentTotals {
    decisions
        .iter()
        .fold(CurtailmentTotals::default(), |acc, d| CurtailmentTotals {
            wind: acc.wind + d.wind_curtail * dt_hours,
            load: acc.load + d.load_curtail * dt_hours,
            heat: acc.heat + d.heat_curtail * dt_hours,
            heat_dump: acc.heat_dump + d.heat_dump * dt_hours,
        })
}

impl Trajectory {
    pub fn curtailment(&self, dt_hours: f64) -> CurtailmentTotals {
        curtailment_totals(&self.decisions, dt_hours)
    }
}

fn check_series(realized: &[ForecastRow]) -> Result<()> {
    if realized.is_empty() {
        return Err(Error::Dimension("empty scenario".into()));
    }
    match realized.iter().enumerate().find(|(t, r)| r.period != *t) {
        Some((t, r)) => Err(Error::PeriodMismatch {
            state: t,
            row: r.period,
        }),
        None => Ok(()),
    }
}

/// Rolls a state forward with `decide`, costing each period against `realized`.
pub fn rollout<F>(plant: &Plant, realized: &[ForecastRow], mut decide: F) -> Result<Trajectory>
where
    F: FnMut(&SystemState) -> Result<Decision>,
{
    check_series(realized)?;
    let mut state = SystemState::initial(&plant.params, &plant.arma, &realized[0]);
    let n = realized.len();
    let mut out = Trajectory {
        states: Vec::with_capacity(n),
        decisions: Vec::with_capacity(n),
        stage_costs: Vec::with_capacity(n),
        total_cost: 0.0,
        heat_trace: Vec::with_capacity(n * plant.lift.samples_per_period()),
    };
    for t in 0..n {
        let d = decide(&state)?;
        let cost = stage_cost(&state, &d, &plant.params);
        out.total_cost += cost;
        out.stage_costs.push(cost);
        out.heat_trace
            .extend(intra_period_trace(&state.ccgt_aug, d.gas_flow, &plant.arma));
        let next = match realized.get(t + 1) {
            Some(row) => Some(transition(
                &state,
                &d,
                &ExogenousSample::default(),
                row,
                &plant.params,
                &plant.lift,
            )?),
            None => None,
        };
        out.states.push(state);
        out.decisions.push(d);
        match next {
            Some(s) => state = s,
            None => break,
        }
    }
    Ok(out)
}

/// Replays a fixed schedule against `realized`.
pub fn replay(
    plant: &Plant,
    realized: &[ForecastRow],
    decisions: &[Decision],
) -> Result<Trajectory> {
    if decisions.len() != realized.len() {
        return Err(Error::Dimension(format!(
            "{} decisions for {} periods",
            decisions.len(),
            realized.len()
        )));
    }
    rollout(plant, realized, |s| Ok(decisions[s.period].clone()))
}

/// Simulates `policy` over one day. `forecast` is what lookahead policies
/// plan against; `realized` is what the day actually brings.
pub fn simulate_policy(
    plant: &Plant,
    policy: &Policy,
    forecast: &[ForecastRow],
    realized: &[ForecastRow],
) -> Result<Trajectory> {
    if forecast.len() != realized.len() {
        return Err(Error::Dimension(
            "forecast and realized series differ in length".into(),
        ));
    }
    rollout(plant, realized, |s| match *policy {
        Policy::Myopic { segments } => myopic_decide(plant, s, segments),
        Policy::Vfa(vfa) => Ok(solve_period(plant, s, &vfa.decision_slopes(s.period))?.decision),
        Policy::Mpc { config, vfa } => mpc_decide(plant, s, &config, forecast, realized, vfa),
    })
}
