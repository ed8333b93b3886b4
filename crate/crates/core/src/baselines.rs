//! Reference policies: myopic, receding-horizon MPC and full-horizon
//! mixed-integer schedules with dynamic or static CCGT heat.

use serde::{Deserialize, Serialize};

use crate::adp::PiecewiseLinearVfa;
use crate::dispatch::{
    solve_multi_period, solve_period, solve_period_with_pins, BinaryMode, HeatModel,
    MultiPeriodResult, Pins, Plant,
};
use crate::error::{Error, Result};
use crate::model::{Decision, ForecastRow, SystemState};
use crate::simulate::{replay, rollout, Trajectory};

/// Per-period decision with no continuation value.
pub fn myopic_decide(plant: &Plant, state: &SystemState, segments: usize) -> Result<Decision> {
    Ok(solve_period(plant, state, &vec![0.0; segments])?.decision)
}

/// What the lookahead sees beyond the current period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastSource {
    DayAhead,
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcConfig {
    /// Lookahead length in periods, including the current one.
    pub horizon: usize,
    pub forecast: ForecastSource,
    /// Close the window with the trained VFA when one is supplied.
    pub terminal_vfa: bool,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            horizon: 8,
            forecast: ForecastSource::DayAhead,
            terminal_vfa: false,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.horizon == 0 || self.horizon > horizon {
            return Err(Error::param(
                "mpc.horizon",
                format!("must lie in 1..={horizon}"),
            ));
        }
        Ok(())
    }
}

/// Plans `min(H, T - t)` periods ahead and returns the first decision.
pub fn mpc_decide(
    plant: &Plant,
    state: &SystemState,
    config: &MpcConfig,
    forecast: &[ForecastRow],
    realized: &[ForecastRow],
    vfa: Option<&PiecewiseLinearVfa>,
) -> Result<Decision> {
    let t = state.period;
    let rows = match config.forecast {
        ForecastSource::DayAhead => forecast,
        ForecastSource::Perfect => realized,
    };
    let end = (t + config.horizon.max(1)).min(rows.len()).max(t + 1);
    let future = &rows[t + 1..end];
    let terminal = match (config.terminal_vfa, vfa) {
        (true, Some(v)) => Some(v.slopes(end - 1)).filter(|s| !s.is_empty()),
        _ => None,
    };
    let res = solve_multi_period(
        plant,
        state,
        future,
        terminal,
        HeatModel::Dynamic,
        BinaryMode::DEFAULT_BB,
    )?;
    Ok(res
        .decisions
        .into_iter()
        .next()
        .expect("window holds the current period"))
}

/// Full-day schedule and its replay.
#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub program: MultiPeriodResult,
    pub trajectory: Trajectory,
    /// Periods in which a scheduled set-point had to be released to stay feasible.
    pub released: usize,
}

fn start_state(plant: &Plant, rows: &[ForecastRow]) -> Result<SystemState> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Dimension("empty scenario".into()))?;
    Ok(SystemState::initial(&plant.params, &plant.arma, first))
}

/// Optimal schedule for a fully known day, replayed against the same day.
pub fn full_horizon_milp(
    plant: &Plant,
    realized: &[ForecastRow],
    mode: BinaryMode,
) -> Result<ScheduleOutcome> {
    let s0 = start_state(plant, realized)?;
    let program = solve_multi_period(plant, &s0, &realized[1..], None, HeatModel::Dynamic, mode)?;
    let trajectory = replay(plant, realized, &program.decisions)?;
    Ok(ScheduleOutcome {
        program,
        trajectory,
        released: 0,
    })
}

/// Schedule planned on the day-ahead forecast. On the day, fuel cell output,
/// gas flow and storage flags follow the plan while grid, storage power,
/// boiler, heat pump and curtailment absorb the forecast errors.
pub fn day_ahead_milp(
    plant: &Plant,
    forecast: &[ForecastRow],
    realized: &[ForecastRow],
    mode: BinaryMode,
    segments: usize,
) -> Result<ScheduleOutcome> {
    let s0 = start_state(plant, forecast)?;
    let program = solve_multi_period(plant, &s0, &forecast[1..], None, HeatModel::Dynamic, mode)?;
    let zero = vec![0.0; segments];
    let mut released = 0;
    let trajectory = rollout(plant, realized, |s| {
        let plan = &program.decisions[s.period];
        let flags = Some((plan.charge_flag, plan.discharge_flag));
        // Tightest first: the full schedule, then without the fuel cell, then
        // only the CCGT fuel, then free.
        let ladder = [
            Pins {
                fc: Some(plan.fc_power),
                gas: Some(plan.gas_flow),
                flags,
            },
            Pins {
                fc: None,
                gas: Some(plan.gas_flow),
                flags,
            },
            Pins {
                fc: None,
                gas: Some(plan.gas_flow),
                flags: None,
            },
            Pins::default(),
        ];
        for (i, pins) in ladder.iter().enumerate() {
            match solve_period_with_pins(plant, s, &zero, pins) {
                Ok(sol) => {
                    released += usize::from(i > 0);
                    return Ok(sol.decision);
                }
                Err(Error::Infeasible(_)) if i + 1 < ladder.len() => continue,
                Err(e) => return Err(e),
            }
        }
        unreachable!("the last rung either returns or errors")
    })?;
    Ok(ScheduleOutcome {
        program,
        trajectory,
        released,
    })
}

/// Schedule from the memoryless energy-hub CCGT model.
#[derive(Debug, Clone)]
pub struct StaticOutcome {
    pub program: MultiPeriodResult,
    /// Heat the static model assumes at every ARMA sample, MW.
    pub heat_trace: Vec<f64>,
}

/// Full-day schedule with CCGT heat equal to gain times gas in every period.
pub fn static_hub_variant(
    plant: &Plant,
    realized: &[ForecastRow],
    mode: BinaryMode,
) -> Result<StaticOutcome> {
    let s0 = start_state(plant, realized)?;
    let program = solve_multi_period(plant, &s0, &realized[1..], None, HeatModel::Static, mode)?;
    let gain = plant.arma.steady_state_gain();
    let n = plant.lift.samples_per_period();
    let heat_trace = program
        .decisions
        .iter()
        .flat_map(|d| std::iter::repeat_n(gain * d.gas_flow, n))
        .collect();
    Ok(StaticOutcome {
        program,
        heat_trace,
    })
}

/// Largest absolute difference between consecutive samples.
pub fn max_consecutive_jump(trace: &[f64]) -> f64 {
    trace
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}
