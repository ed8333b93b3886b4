use crate::ccgt::Vec7;
use crate::lp::{LinearProgram, VarId};
use crate::model::{ForecastRow, HeatBalanceSample, SystemState};

use super::{FlagSetting, Plant};

/// Affine expression `constant + sum(coef * var)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expr {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn var(v: VarId, coef: f64) -> Self {
        Expr {
            constant: 0.0,
            terms: vec![(v, coef)],
        }
    }

    pub fn plus(mut self, other: &Expr, scale: f64) -> Self {
        self.constant += scale * other.constant;
        for &(v, a) in &other.terms {
            match self.terms.iter_mut().find(|(w, _)| *w == v) {
                Some((_, b)) => *b += scale * a,
                None => self.terms.push((v, scale * a)),
            }
        }
        self
    }

    pub fn term(self, v: VarId, coef: f64) -> Self {
        self.plus(&Expr::var(v, coef), 1.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, a)| a * x[v.0]).sum::<f64>()
    }
}

/// Augmented CCGT state as an affine function of earlier gas variables.
#[derive(Debug, Clone)]
struct StateExpr {
    constant: Vec7,
    terms: Vec<(VarId, Vec7)>,
}

impl StateExpr {
    fn dot(&self, row: &Vec7) -> Expr {
        Expr {
            constant: row.dot(&self.constant),
            terms: self.terms.iter().map(|(v, c)| (*v, row.dot(c))).collect(),
        }
    }
}

/// How CCGT heat responds to gas inside a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatModel {
    /// Lifted ARMA dynamics.
    Dynamic,
    /// Memoryless steady-state gain, heat = gain * gas within the period.
    Static,
}

/// Variables and derived expressions of one period.
#[derive(Debug, Clone)]
pub struct PeriodVars {
    pub row: ForecastRow,
    pub flags: FlagSetting,
    pub fc: VarId,
    pub gas: VarId,
    pub grid: VarId,
    pub charge: VarId,
    pub discharge: VarId,
    pub wind_curtail: VarId,
    pub load_curtail: VarId,
    pub heat_curtail: VarId,
    pub heat_dump: VarId,
    pub gb: VarId,
    pub hp: VarId,
    /// VFA segment variables (only on periods carrying a value function).
    pub segments: Vec<VarId>,
    /// End-of-period CCGT heat.
    pub heat_end: Expr,
    /// SOC at the end of the period.
    pub soc_end: Expr,
}

/// Assembles the coupled dispatch program period by period.
pub struct ProgramBuilder<'a> {
    plant: &'a Plant,
    model: HeatModel,
    lp: LinearProgram,
    periods: Vec<PeriodVars>,
    aug: StateExpr,
    prev_heat: Expr,
    prev_fc: Expr,
    prev_grid: Expr,
    prev_ccgt: Expr,
    prev_gb: Expr,
    prev_hp: Expr,
    soc: Expr,
}

impl<'a> ProgramBuilder<'a> {
    pub fn new(plant: &'a Plant, state: &SystemState, model: HeatModel) -> Self {
        ProgramBuilder {
            plant,
            model,
            lp: LinearProgram::new(),
            periods: Vec::new(),
            aug: StateExpr {
                constant: state.ccgt_aug.as_vector(),
                terms: Vec::new(),
            },
            prev_heat: Expr::constant(state.ccgt_heat(&plant.arma)),
            prev_fc: Expr::constant(state.fc_power_prev),
            prev_grid: Expr::constant(state.grid_power_prev),
            prev_ccgt: Expr::constant(state.ccgt_power),
            prev_gb: Expr::constant(state.gb_heat_prev),
            prev_hp: Expr::constant(state.hp_heat_prev),
            soc: Expr::constant(state.soc),
        }
    }

    fn range(&mut self, name: String, e: &Expr, lo: f64, hi: f64) {
        self.lp
            .add_range(name, e.terms.clone(), lo - e.constant, hi - e.constant);
    }

    fn ramp(&mut self, name: String, now: &Expr, prev: &Expr, down: f64, up: f64) {
        let diff = now.clone().plus(prev, -1.0);
        self.range(name, &diff, -down, up);
    }

    pub fn add_period(&mut self, row: &ForecastRow, flags: FlagSetting) -> &PeriodVars {
        let p = &self.plant.params;
        let dt = p.dt_hours;
        let k = self.periods.len();
        let map = &p.ccgt_map;
        let st = &p.storage;
        let pen = &p.penalties;
        let name = |s: &str| format!("p{k}.{s}");

        let fc = self.lp.add_var(
            name("fc"),
            p.fc.power_min,
            p.fc.power_max,
            dt * p.fc.cost_coefficient,
        );
        let gas = self.lp.add_var(
            name("gas"),
            map.gas_min,
            map.gas_max,
            dt * p.ccgt_electric.cost_coefficient * map.b0,
        );
        self.lp.objective_offset += dt * p.ccgt_electric.cost_coefficient * map.a0;
        let grid = self.lp.add_var(
            name("grid"),
            p.grid.power_min,
            p.grid.power_max,
            dt * row.price,
        );
        let (c_lo, c_hi, d_lo, d_hi) = match flags {
            FlagSetting::Relaxed => (0.0, st.charge_max, 0.0, st.discharge_max),
            FlagSetting::Fixed { charge, discharge } => {
                let on = |flag: bool, lo: f64, hi: f64| if flag { (lo, hi) } else { (0.0, 0.0) };
                let (a, b) = on(charge, st.charge_min, st.charge_max);
                let (c, d) = on(discharge, st.discharge_min, st.discharge_max);
                (a, b, c, d)
            }
        };
        let charge = self.lp.add_var(name("charge"), c_lo, c_hi, 0.0);
        let discharge = self.lp.add_var(name("discharge"), d_lo, d_hi, 0.0);
        let wind_curtail = self.lp.add_var(
            name("wind_curtail"),
            0.0,
            row.wind,
            dt * pen.wind_curtailment,
        );
        let load_curtail = self.lp.add_var(
            name("load_curtail"),
            0.0,
            row.demand_e,
            dt * pen.load_curtailment,
        );
        let heat_curtail = self.lp.add_var(
            name("heat_curtail"),
            0.0,
            row.demand_q,
            dt * pen.heat_curtailment,
        );
        let heat_dump = self.lp.add_var(
            name("heat_dump"),
            0.0,
            p.ccgt_heat.power_max,
            dt * pen.heat_dump,
        );
        let gb = self.lp.add_var(
            name("gb"),
            p.gb.power_min,
            p.gb.power_max,
            dt * p.gb.cost_coefficient,
        );
        let hp = self
            .lp
            .add_var(name("hp"), p.hp.power_min, p.hp.power_max, 0.0);

        // electric balance
        let ccgt_e = Expr::constant(map.a0).term(gas, map.b0);
        let supply = ccgt_e
            .clone()
            .term(fc, 1.0)
            .term(grid, 1.0)
            .term(discharge, 1.0)
            .term(charge, -1.0)
            .term(wind_curtail, -1.0)
            .term(hp, -1.0 / p.hp_cop)
            .term(load_curtail, 1.0)
            .plus(&Expr::constant(row.wind), 1.0);
        self.range(name("elec_balance"), &supply, row.demand_e, row.demand_e);

        // CCGT heat
        let (heat_end, heat_sample) = match self.model {
            HeatModel::Dynamic => {
                let lift = &self.plant.lift;
                let c = *lift.output_row();
                let next = StateExpr {
                    constant: lift.a_delta * self.aug.constant,
                    terms: self
                        .aug
                        .terms
                        .iter()
                        .map(|(v, coef)| (*v, lift.a_delta * coef))
                        .chain(std::iter::once((gas, lift.b_delta)))
                        .collect(),
                };
                let end = next.dot(&c);
                let sample = match p.heat_balance {
                    HeatBalanceSample::EndOfPeriod => end.clone(),
                    HeatBalanceSample::PeriodMean => {
                        let (row, g) = lift.mean_heat_row();
                        self.aug.dot(row).term(gas, g)
                    }
                };
                self.aug = next;
                (end, sample)
            }
            HeatModel::Static => {
                let e = Expr::var(gas, self.plant.arma.steady_state_gain());
                (e.clone(), e)
            }
        };
        let heat_bal = heat_sample
            .term(gb, 1.0)
            .term(hp, 1.0)
            .term(heat_curtail, 1.0)
            .term(heat_dump, -1.0);
        self.range(name("heat_balance"), &heat_bal, row.demand_q, row.demand_q);
        let (q_lo, q_hi) = p.heat_range();
        self.range(name("ccgt_heat_bounds"), &heat_end, q_lo, q_hi);

        // ramps
        let prev_heat = std::mem::replace(&mut self.prev_heat, heat_end.clone());
        if p.ccgt_heat.ramp_can_bind(dt) {
            self.ramp(
                name("ccgt_heat_ramp"),
                &heat_end,
                &prev_heat,
                p.ccgt_heat.ramp_down_per_period(dt),
                p.ccgt_heat.ramp_up_per_period(dt),
            );
        }
        let prev_ccgt = std::mem::replace(&mut self.prev_ccgt, ccgt_e.clone());
        if p.ccgt_electric.ramp_can_bind(dt) {
            self.ramp(
                name("ccgt_elec_ramp"),
                &ccgt_e,
                &prev_ccgt,
                p.ccgt_electric.ramp_down_per_period(dt),
                p.ccgt_electric.ramp_up_per_period(dt),
            );
        }
        for (label, var, unit) in [
            ("fc_ramp", fc, &p.fc),
            ("grid_ramp", grid, &p.grid),
            ("gb_ramp", gb, &p.gb),
            ("hp_ramp", hp, &p.hp),
        ] {
            let now = Expr::var(var, 1.0);
            let prev = match label {
                "fc_ramp" => std::mem::replace(&mut self.prev_fc, now.clone()),
                "grid_ramp" => std::mem::replace(&mut self.prev_grid, now.clone()),
                "gb_ramp" => std::mem::replace(&mut self.prev_gb, now.clone()),
                _ => std::mem::replace(&mut self.prev_hp, now.clone()),
            };
            if unit.ramp_can_bind(dt) {
                self.ramp(
                    name(label),
                    &now,
                    &prev,
                    unit.ramp_down_per_period(dt),
                    unit.ramp_up_per_period(dt),
                );
            }
        }

        // storage
        if flags == FlagSetting::Relaxed && st.charge_max > 0.0 && st.discharge_max > 0.0 {
            self.lp.add_range(
                name("storage_exclusive"),
                vec![
                    (charge, 1.0 / st.charge_max),
                    (discharge, 1.0 / st.discharge_max),
                ],
                f64::NEG_INFINITY,
                1.0,
            );
        }
        let soc_end = self
            .soc
            .clone()
            .term(charge, st.eta_charge * dt)
            .term(discharge, -dt / st.eta_discharge);
        self.range(name("soc_bounds"), &soc_end, st.soc_min, st.soc_max);
        self.soc = soc_end.clone();

        self.periods.push(PeriodVars {
            row: *row,
            flags,
            fc,
            gas,
            grid,
            charge,
            discharge,
            wind_curtail,
            load_curtail,
            heat_curtail,
            heat_dump,
            gb,
            hp,
            segments: Vec::new(),
            heat_end,
            soc_end,
        });
        self.periods.last().expect("period just pushed")
    }

    /// Attaches a piecewise-linear value of the last period's end heat:
    /// `q_min + sum(r_a) = heat_end`, `0 <= r_a <= width`, cost `slopes[a] * r_a`.
    pub fn add_terminal_value(&mut self, slopes: &[f64], q_min: f64, q_max: f64) {
        let Some(last) = self.periods.len().checked_sub(1) else {
            return;
        };
        if slopes.is_empty() {
            return;
        }
        let width = (q_max - q_min) / slopes.len() as f64;
        let segs: Vec<VarId> = slopes
            .iter()
            .enumerate()
            .map(|(a, &d)| self.lp.add_var(format!("p{last}.vfa_r{a}"), 0.0, width, d))
            .collect();
        let mut link = Expr::constant(q_min).plus(&self.periods[last].heat_end, -1.0);
        for &r in &segs {
            link = link.term(r, 1.0);
        }
        self.range(format!("p{last}.vfa_link"), &link, 0.0, 0.0);
        self.periods[last].segments = segs;
    }

    pub fn lp_mut(&mut self) -> &mut LinearProgram {
        &mut self.lp
    }

    pub fn finish(self) -> (LinearProgram, Vec<PeriodVars>) {
        (self.lp, self.periods)
    }
}
