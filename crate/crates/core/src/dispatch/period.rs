use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpSolution};
use crate::model::{stage_cost, Decision, ForecastRow, SystemState};

use super::builder::{HeatModel, PeriodVars, ProgramBuilder};
use super::{FlagSetting, Plant};

/// Storage power below this is treated as zero when reading flags back.
pub(crate) const FLAG_TOL: f64 = 1e-9;

/// Optimal decision of one period's deterministic subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemResult {
    pub decision: Decision,
    /// Stage cost plus value-function term, $.
    pub objective: f64,
    pub stage_cost: f64,
    /// CCGT heat at the last sample of the period, MW.
    pub post_decision_heat: f64,
    /// Segment fill `r_a`, MW.
    pub segments: Vec<f64>,
}

/// Set-points forced onto a subproblem (day-ahead schedule recourse).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pins {
    pub fc: Option<f64>,
    pub gas: Option<f64>,
    pub flags: Option<(bool, bool)>,
}

pub(crate) fn current_row(state: &SystemState) -> ForecastRow {
    ForecastRow {
        period: state.period,
        wind: state.wind_available,
        demand_e: state.demand_e,
        price: state.price,
        demand_q: state.demand_q,
    }
}

pub(crate) fn check_slopes(slopes: &[f64]) -> Result<()> {
    if slopes.iter().any(|d| !d.is_finite()) {
        return Err(Error::param("slopes", "must be finite"));
    }
    if slopes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("slopes", "must be nondecreasing"));
    }
    Ok(())
}

pub(crate) fn read_decision(x: &[f64], v: &PeriodVars) -> Decision {
    let charge = x[v.charge.0];
    let discharge = x[v.discharge.0];
    let (charge_flag, discharge_flag) = match v.flags {
        FlagSetting::Fixed { charge, discharge } => (charge, discharge),
        FlagSetting::Relaxed => (charge > FLAG_TOL, discharge > FLAG_TOL),
    };
    Decision {
        fc_power: x[v.fc.0],
        gas_flow: x[v.gas.0],
        grid_power: x[v.grid.0],
        charge_power: charge,
        discharge_power: discharge,
        charge_flag,
        discharge_flag,
        wind_curtail: x[v.wind_curtail.0],
        load_curtail: x[v.load_curtail.0],
        heat_curtail: x[v.heat_curtail.0],
        heat_dump: x[v.heat_dump.0],
        gb_heat: x[v.gb.0],
        hp_heat: x[v.hp.0],
    }
}

/// Builds the one-period program: decisions, constraints and VFA segments.
pub fn build_subproblem(
    plant: &Plant,
    state: &SystemState,
    slopes: &[f64],
    charge_flag: bool,
    discharge_flag: bool,
) -> Result<(LinearProgram, PeriodVars)> {
    if charge_flag && discharge_flag {
        return Err(Error::param(
            "flags",
            "charge and discharge cannot both be set",
        ));
    }
    check_slopes(slopes)?;
    let flags = FlagSetting::Fixed {
        charge: charge_flag,
        discharge: discharge_flag,
    };
    let mut b = ProgramBuilder::new(plant, state, HeatModel::Dynamic);
    b.add_period(&current_row(state), flags);
    let (q_lo, q_hi) = plant.params.heat_range();
    b.add_terminal_value(slopes, q_lo, q_hi);
    let (lp, mut periods) = b.finish();
    Ok((lp, periods.remove(0)))
}

fn to_result(
    plant: &Plant,
    state: &SystemState,
    sol: &LpSolution,
    vars: &PeriodVars,
) -> SubproblemResult {
    let decision = read_decision(&sol.x, vars);
    let post_decision_heat = plant.lift.end_heat(&state.ccgt_aug, decision.gas_flow);
    SubproblemResult {
        stage_cost: stage_cost(state, &decision, &plant.params),
        objective: sol.objective,
        post_decision_heat,
        segments: vars.segments.iter().map(|s| sol.x[s.0]).collect(),
        decision,
    }
}

/// Solves the period subproblem for each admissible flag pair and returns
/// the cheapest; ties go to the earlier pair in (none, charge, discharge).
pub fn solve_period(
    plant: &Plant,
    state: &SystemState,
    slopes: &[f64],
) -> Result<SubproblemResult> {
    solve_period_with_pins(plant, state, slopes, &Pins::default())
}

pub fn solve_period_with_pins(
    plant: &Plant,
    state: &SystemState,
    slopes: &[f64],
    pins: &Pins,
) -> Result<SubproblemResult> {
    let settings: Vec<(bool, bool)> = match pins.flags {
        Some(f) => vec![f],
        None => vec![(false, false), (true, false), (false, true)],
    };
    let mut best: Option<SubproblemResult> = None;
    let mut last_err = None;
    for (c, d) in settings {
        let (mut lp, vars) = build_subproblem(plant, state, slopes, c, d)?;
        for (pin, var) in [(pins.fc, vars.fc), (pins.gas, vars.gas)] {
            if let Some(v) = pin {
                let v = v.clamp(lp.lower[var.0], lp.upper[var.0]);
                lp.set_bounds(var, v, v);
            }
        }
        let sol = solve_lp(&lp)?;
        match sol.into_result() {
            Ok(sol) => {
                let candidate = to_result(plant, state, &sol, &vars);
                if best
                    .as_ref()
                    .is_none_or(|b| candidate.objective < b.objective - 1e-9)
                {
                    best = Some(candidate);
                }
            }
            Err(Error::Infeasible(row)) => last_err = Some(Error::Infeasible(row)),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::Infeasible(None)))
}
