//! Independent constraint checker.
//!
//! Re-derives every balance, bound, ramp, storage and curtailment condition
//! directly from a state and a decision. The CCGT heat is simulated sample by
//! sample rather than read from the lifted matrices the programs use.

use serde::Serialize;

use crate::ccgt::{heat_output, intra_period_trace};
use crate::model::{Decision, HeatBalanceSample, SystemState};

use super::Plant;

pub const AUDIT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub period: usize,
    pub constraint: &'static str,
    /// Amount by which the constraint is exceeded.
    pub amount: f64,
}

struct Checker {
    period: usize,
    out: Vec<Violation>,
}

impl Checker {
    fn within(&mut self, name: &'static str, v: f64, lo: f64, hi: f64) {
        let amount = (lo - v).max(v - hi);
        if !(amount <= AUDIT_TOL) {
            self.out.push(Violation {
                period: self.period,
                constraint: name,
                amount,
            });
        }
    }

    fn equal(&mut self, name: &'static str, lhs: f64, rhs: f64) {
        self.within(name, lhs - rhs, 0.0, 0.0);
    }
}

/// All violated constraints of one decision taken in `state`.
pub fn audit_decision(plant: &Plant, state: &SystemState, d: &Decision) -> Vec<Violation> {
    let p = &plant.params;
    let dt = p.dt_hours;
    let st = &p.storage;
    let mut c = Checker {
        period: state.period,
        out: Vec::new(),
    };

    let ccgt_e = p.ccgt_electric_output(d.gas_flow);
    let trace = intra_period_trace(&state.ccgt_aug, d.gas_flow, &plant.arma);
    let heat_end = *trace.last().unwrap_or(&0.0);
    let heat_bal = match p.heat_balance {
        HeatBalanceSample::EndOfPeriod => heat_end,
        HeatBalanceSample::PeriodMean => trace.iter().sum::<f64>() / trace.len() as f64,
    };
    let heat_prev = heat_output(&state.ccgt_aug, &plant.arma);
    let uc = if d.charge_flag { 1.0 } else { 0.0 };
    let ud = if d.discharge_flag { 1.0 } else { 0.0 };

    let supply = d.fc_power
        + ccgt_e
        + d.grid_power
        + (d.discharge_power * ud - d.charge_power * uc)
        + (state.wind_available - d.wind_curtail)
        - d.hp_heat / p.hp_cop
        + d.load_curtail;
    c.equal("power_balance", supply, state.demand_e);
    c.equal(
        "heat_balance",
        d.gb_heat + heat_bal + d.hp_heat + d.heat_curtail - d.heat_dump,
        state.demand_q,
    );

    c.within("fc_bounds", d.fc_power, p.fc.power_min, p.fc.power_max);
    c.within(
        "ccgt_elec_bounds",
        ccgt_e,
        p.ccgt_electric.power_min,
        p.ccgt_electric.power_max,
    );
    c.within(
        "grid_bounds",
        d.grid_power,
        p.grid.power_min,
        p.grid.power_max,
    );
    c.within("gb_bounds", d.gb_heat, p.gb.power_min, p.gb.power_max);
    c.within("hp_bounds", d.hp_heat, p.hp.power_min, p.hp.power_max);
    c.within(
        "ccgt_heat_bounds",
        heat_end,
        p.ccgt_heat.power_min,
        p.ccgt_heat.power_max,
    );
    c.within(
        "gas_bounds",
        d.gas_flow,
        p.ccgt_map.gas_min,
        p.ccgt_map.gas_max,
    );

    let ramp = |unit: &crate::model::UnitParams| {
        (-unit.ramp_down_per_period(dt), unit.ramp_up_per_period(dt))
    };
    let (lo, hi) = ramp(&p.fc);
    c.within("fc_ramp", d.fc_power - state.fc_power_prev, lo, hi);
    let (lo, hi) = ramp(&p.ccgt_electric);
    c.within("ccgt_elec_ramp", ccgt_e - state.ccgt_power, lo, hi);
    let (lo, hi) = ramp(&p.grid);
    c.within("grid_ramp", d.grid_power - state.grid_power_prev, lo, hi);
    let (lo, hi) = ramp(&p.gb);
    c.within("gb_ramp", d.gb_heat - state.gb_heat_prev, lo, hi);
    let (lo, hi) = ramp(&p.hp);
    c.within("hp_ramp", d.hp_heat - state.hp_heat_prev, lo, hi);
    let (lo, hi) = ramp(&p.ccgt_heat);
    c.within("ccgt_heat_ramp", heat_end - heat_prev, lo, hi);

    c.within(
        "charge_gate",
        d.charge_power,
        uc * st.charge_min,
        uc * st.charge_max,
    );
    c.within(
        "discharge_gate",
        d.discharge_power,
        ud * st.discharge_min,
        ud * st.discharge_max,
    );
    if d.charge_flag && d.discharge_flag {
        c.out.push(Violation {
            period: state.period,
            constraint: "storage_exclusive",
            amount: 1.0,
        });
    }
    let soc_next =
        state.soc + (d.charge_power * st.eta_charge - d.discharge_power / st.eta_discharge) * dt;
    c.within("soc_bounds", soc_next, st.soc_min, st.soc_max);

    c.within("wind_curtail", d.wind_curtail, 0.0, state.wind_available);
    c.within("load_curtail", d.load_curtail, 0.0, state.demand_e);
    c.within("heat_curtail", d.heat_curtail, 0.0, state.demand_q);
    c.within("heat_dump", d.heat_dump, 0.0, heat_bal);
    c.out
}

/// Audits every `(state, decision)` pair of a trajectory.
pub fn audit_trajectory(
    plant: &Plant,
    states: &[SystemState],
    decisions: &[Decision],
) -> Vec<Violation> {
    states
        .iter()
        .zip(decisions)
        .flat_map(|(s, d)| audit_decision(plant, s, d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ForecastRow;

    #[test]
    fn flags_bad_balance_and_double_flag() {
        let plant = Plant::default();
        let row = ForecastRow {
            period: 3,
            wind: 1.0,
            demand_e: 20.0,
            price: 50.0,
            demand_q: 30.0,
        };
        let s = SystemState::initial(&plant.params, &plant.arma, &row);
        let d = Decision {
            charge_flag: true,
            discharge_flag: true,
            gas_flow: 1.3,
            ..Default::default()
        };
        let v = audit_decision(&plant, &s, &d);
        let names: Vec<_> = v.iter().map(|x| x.constraint).collect();
        assert!(names.contains(&"power_balance"));
        assert!(names.contains(&"heat_balance"));
        assert!(names.contains(&"storage_exclusive"));
        assert!(v.iter().all(|x| x.period == 3));
    }
}
