//! Microgrid domain types, stage cost and the one-period transition.

use serde::{Deserialize, Serialize};

use crate::ccgt::{self, ArmaParams, AugmentedCcgtState, PeriodLift};
use crate::error::{Error, Result};

/// Time base of a unit's ramp rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampBasis {
    PerHour,
    PerMinute,
}

/// Output bounds, ramp rates and cost coefficient of a dispatchable unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitParams {
    pub power_min: f64,
    pub power_max: f64,
    /// Ramp magnitudes; ramp-down is stored as a positive rate.
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub ramp_basis: RampBasis,
    /// $/MWh of delivered output.
    pub cost_coefficient: f64,
}

impl UnitParams {
    fn new(min: f64, max: f64, ramp: f64, basis: RampBasis, cost: f64) -> Self {
        UnitParams {
            power_min: min,
            power_max: max,
            ramp_up: ramp,
            ramp_down: ramp,
            ramp_basis: basis,
            cost_coefficient: cost,
        }
    }

    fn rate_scale(&self, dt_hours: f64) -> f64 {
        match self.ramp_basis {
            RampBasis::PerHour => dt_hours,
            RampBasis::PerMinute => dt_hours * 60.0,
        }
    }

    /// Largest increase over one period, MW.
    pub fn ramp_up_per_period(&self, dt_hours: f64) -> f64 {
        self.ramp_up * self.rate_scale(dt_hours)
    }

    /// Largest decrease over one period, MW (positive).
    pub fn ramp_down_per_period(&self, dt_hours: f64) -> f64 {
        self.ramp_down * self.rate_scale(dt_hours)
    }

    /// Whether the ramp limits can ever bind inside `[power_min, power_max]`.
    pub fn ramp_can_bind(&self, dt_hours: f64) -> bool {
        let width = self.power_max - self.power_min;
        self.ramp_up_per_period(dt_hours) < width || self.ramp_down_per_period(dt_hours) < width
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.power_min <= self.power_max) {
            return Err(Error::param(name, "power_min must not exceed power_max"));
        }
        if !(self.ramp_up > 0.0 && self.ramp_down > 0.0) {
            return Err(Error::param(name, "ramp rates must be positive"));
        }
        if !self.cost_coefficient.is_finite() {
            return Err(Error::param(name, "cost coefficient must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageParams {
    /// MWh
    pub soc_min: f64,
    pub soc_max: f64,
    pub soc_initial: f64,
    /// MW
    pub charge_min: f64,
    pub charge_max: f64,
    pub discharge_min: f64,
    pub discharge_max: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
}

impl Default for StorageParams {
    fn default() -> Self {
        StorageParams {
            soc_min: 1.5,
            soc_max: 15.0,
            soc_initial: 7.5,
            charge_min: 0.0,
            charge_max: 3.0,
            discharge_min: 0.0,
            discharge_max: 3.0,
            eta_charge: 0.9,
            eta_discharge: 0.9,
        }
    }
}

impl StorageParams {
    fn validate(&self) -> Result<()> {
        if !(0.0 <= self.soc_min
            && self.soc_min <= self.soc_initial
            && self.soc_initial <= self.soc_max)
        {
            return Err(Error::param(
                "storage",
                "need 0 <= soc_min <= soc_initial <= soc_max",
            ));
        }
        for (name, eta) in [
            ("eta_charge", self.eta_charge),
            ("eta_discharge", self.eta_discharge),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::param(
                    &format!("storage.{name}"),
                    "must lie in (0, 1]",
                ));
            }
        }
        if !(0.0 <= self.charge_min && self.charge_min <= self.charge_max)
            || !(0.0 <= self.discharge_min && self.discharge_min <= self.discharge_max)
        {
            return Err(Error::param(
                "storage",
                "invalid charge/discharge power limits",
            ));
        }
        Ok(())
    }
}

/// Curtailment penalties, $/MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyParams {
    pub wind_curtailment: f64,
    pub load_curtailment: f64,
    pub heat_curtailment: f64,
    /// Venting of CCGT heat that cannot be used or ramped away.
    #[serde(default = "default_heat_dump")]
    pub heat_dump: f64,
}

fn default_heat_dump() -> f64 {
    350.0
}

impl Default for PenaltyParams {
    fn default() -> Self {
        PenaltyParams {
            wind_curtailment: 200.0,
            load_curtailment: 150.0,
            heat_curtailment: 350.0,
            heat_dump: default_heat_dump(),
        }
    }
}

/// Affine gas-to-electric map of the CCGT, `P = a0 + b0 * g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcgtElectricMap {
    pub a0: f64,
    pub b0: f64,
    pub gas_min: f64,
    pub gas_max: f64,
}

impl CcgtElectricMap {
    /// Gas bounds are the steady-state gas values of the heat range; `a0`, `b0`
    /// send them onto the electric range.
    pub fn derive(arma: &ArmaParams, heat: &UnitParams, electric: &UnitParams) -> Self {
        let gain = arma.steady_state_gain();
        let gas_min = heat.power_min / gain;
        let gas_max = heat.power_max / gain;
        let b0 = (electric.power_max - electric.power_min) / (gas_max - gas_min);
        CcgtElectricMap {
            a0: electric.power_min - b0 * gas_min,
            b0,
            gas_min,
            gas_max,
        }
    }

    /// Electric output for a gas flow. A CCGT with no gas produces nothing when
    /// `a0 <= 0`; with a positive offset the output is held at `power_min`.
    pub fn electric_output(&self, gas: f64, power_min: f64) -> f64 {
        if gas <= 0.0 {
            if self.a0 <= 0.0 {
                0.0
            } else {
                power_min
            }
        } else {
            self.a0 + self.b0 * gas
        }
    }
}

/// Which CCGT heat sample enters the heat balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatBalanceSample {
    #[default]
    EndOfPeriod,
    PeriodMean,
}

/// Unit set-points at the start of the day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    pub fc_power: f64,
    pub grid_power: f64,
    pub gb_heat: f64,
    pub hp_heat: f64,
    pub ccgt_heat: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            fc_power: 0.8,
            grid_power: 0.0,
            gb_heat: 1.0,
            hp_heat: 0.0,
            ccgt_heat: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrogridParams {
    pub fc: UnitParams,
    pub ccgt_electric: UnitParams,
    pub grid: UnitParams,
    pub gb: UnitParams,
    pub hp: UnitParams,
    pub ccgt_heat: UnitParams,
    /// Installed wind capacity, MW.
    pub wind_capacity: f64,
    pub storage: StorageParams,
    pub penalties: PenaltyParams,
    pub ccgt_map: CcgtElectricMap,
    pub hp_cop: f64,
    pub dt_hours: f64,
    pub horizon: usize,
    pub heat_balance: HeatBalanceSample,
    pub initial: InitialConditions,
}

impl Default for MicrogridParams {
    fn default() -> Self {
        use RampBasis::*;
        let ccgt_electric = UnitParams::new(6.0, 43.0, 38.0, PerHour, 92.0);
        let ccgt_heat = UnitParams::new(15.0, 50.0, 0.5, PerMinute, 0.0);
        let ccgt_map = CcgtElectricMap::derive(&ArmaParams::default(), &ccgt_heat, &ccgt_electric);
        MicrogridParams {
            fc: UnitParams::new(0.8, 7.0, 7.0, PerHour, 65.0),
            ccgt_electric,
            grid: UnitParams::new(-6.0, 6.0, 6.0, PerHour, 0.0),
            gb: UnitParams::new(1.0, 15.0, 3.0, PerMinute, 300.0),
            hp: UnitParams::new(0.0, 5.0, 5.0, PerMinute, 0.0),
            ccgt_heat,
            wind_capacity: 3.6,
            storage: StorageParams::default(),
            penalties: PenaltyParams::default(),
            ccgt_map,
            hp_cop: 3.0,
            dt_hours: 0.25,
            horizon: 96,
            heat_balance: HeatBalanceSample::EndOfPeriod,
            initial: InitialConditions::default(),
        }
    }
}

impl MicrogridParams {
    pub fn validate(&self) -> Result<()> {
        for (name, unit) in [
            ("fc", &self.fc),
            ("ccgt_electric", &self.ccgt_electric),
            ("grid", &self.grid),
            ("gb", &self.gb),
            ("hp", &self.hp),
            ("ccgt_heat", &self.ccgt_heat),
        ] {
            unit.validate(name)?;
        }
        self.storage.validate()?;
        let p = &self.penalties;
        if p.wind_curtailment < 0.0
            || p.load_curtailment < 0.0
            || p.heat_curtailment < 0.0
            || p.heat_dump < 0.0
        {
            return Err(Error::param("penalties", "must be nonnegative"));
        }
        let m = &self.ccgt_map;
        if !(m.b0 > 0.0) {
            return Err(Error::param("ccgt_map.b0", "must be positive"));
        }
        if !(0.0 < m.gas_min && m.gas_min <= m.gas_max) {
            return Err(Error::param("ccgt_map", "need 0 < gas_min <= gas_max"));
        }
        let tol = 1e-9;
        if m.a0 + m.b0 * m.gas_min < self.ccgt_electric.power_min - tol
            || m.a0 + m.b0 * m.gas_max > self.ccgt_electric.power_max + tol
        {
            return Err(Error::param(
                "ccgt_map",
                "gas range maps outside the CCGT electric range",
            ));
        }
        if !(self.dt_hours > 0.0) {
            return Err(Error::param("dt_hours", "must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        if !(self.hp_cop > 0.0) {
            return Err(Error::param("hp_cop", "must be positive"));
        }
        if self.wind_capacity < 0.0 {
            return Err(Error::param("wind_capacity", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn ccgt_electric_output(&self, gas: f64) -> f64 {
        self.ccgt_map
            .electric_output(gas, self.ccgt_electric.power_min)
    }

    pub fn hp_electric(&self, hp_heat: f64) -> f64 {
        hp_heat / self.hp_cop
    }

    /// Segment-free heat range of the CCGT.
    pub fn heat_range(&self) -> (f64, f64) {
        (self.ccgt_heat.power_min, self.ccgt_heat.power_max)
    }
}

/// MG state at a period boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// Zero-based period the state belongs to.
    pub period: usize,
    pub fc_power_prev: f64,
    pub ccgt_power: f64,
    /// MWh
    pub soc: f64,
    pub wind_available: f64,
    pub demand_e: f64,
    pub price: f64,
    pub gb_heat_prev: f64,
    pub hp_heat_prev: f64,
    pub ccgt_aug: AugmentedCcgtState,
    pub demand_q: f64,
    pub grid_power_prev: f64,
}

impl SystemState {
    /// Start-of-day state from the configured initial conditions and the
    /// realized exogenous values of the first period.
    pub fn initial(params: &MicrogridParams, arma: &ArmaParams, row: &ForecastRow) -> Self {
        let init = &params.initial;
        let gas = init.ccgt_heat / arma.steady_state_gain();
        SystemState {
            period: row.period,
            fc_power_prev: init.fc_power,
            ccgt_power: params.ccgt_electric_output(gas),
            soc: params.storage.soc_initial,
            wind_available: row.wind,
            demand_e: row.demand_e,
            price: row.price,
            gb_heat_prev: init.gb_heat,
            hp_heat_prev: init.hp_heat,
            ccgt_aug: AugmentedCcgtState::steady_state(init.ccgt_heat, arma),
            demand_q: row.demand_q,
            grid_power_prev: init.grid_power,
        }
    }

    /// Current CCGT heat output (end of the previous period).
    pub fn ccgt_heat(&self, arma: &ArmaParams) -> f64 {
        ccgt::heat_output(&self.ccgt_aug, arma)
    }
}

/// Per-period dispatch vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Decision {
    pub fc_power: f64,
    pub gas_flow: f64,
    /// Positive = purchase from the grid.
    pub grid_power: f64,
    pub charge_power: f64,
    pub discharge_power: f64,
    pub charge_flag: bool,
    pub discharge_flag: bool,
    pub wind_curtail: f64,
    pub load_curtail: f64,
    pub heat_curtail: f64,
    /// Surplus heat vented, MW.
    #[serde(default)]
    pub heat_dump: f64,
    pub gb_heat: f64,
    pub hp_heat: f64,
}

/// Day-ahead forecast errors for one period.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExogenousSample {
    pub wind_error: f64,
    pub demand_e_error: f64,
    pub price_error: f64,
    pub demand_q_error: f64,
}

/// Exogenous quantities of one period (forecast or realized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub period: usize,
    pub wind: f64,
    pub demand_e: f64,
    pub price: f64,
    pub demand_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayAheadForecast {
    pub wind: Vec<f64>,
    pub demand_e: Vec<f64>,
    pub price: Vec<f64>,
    pub demand_q: Vec<f64>,
}

impl DayAheadForecast {
    pub fn new(
        wind: Vec<f64>,
        demand_e: Vec<f64>,
        price: Vec<f64>,
        demand_q: Vec<f64>,
    ) -> Result<Self> {
        let f = DayAheadForecast {
            wind,
            demand_e,
            price,
            demand_q,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.wind.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wind.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.wind.len();
        if self.demand_e.len() != n || self.price.len() != n || self.demand_q.len() != n {
            return Err(Error::Dimension("forecast arrays differ in length".into()));
        }
        let all = [&self.wind, &self.demand_e, &self.price, &self.demand_q];
        if all
            .iter()
            .any(|v| v.iter().any(|x| !(x.is_finite() && *x >= 0.0)))
        {
            return Err(Error::param(
                "forecast",
                "values must be finite and nonnegative",
            ));
        }
        Ok(())
    }

    pub fn row(&self, period: usize) -> ForecastRow {
        ForecastRow {
            period,
            wind: self.wind[period],
            demand_e: self.demand_e[period],
            price: self.price[period],
            demand_q: self.demand_q[period],
        }
    }
}

/// Forecast plus error; quantities are floored at zero.
pub fn realized_state(row: &ForecastRow, exo: &ExogenousSample) -> ForecastRow {
    ForecastRow {
        period: row.period,
        wind: (row.wind + exo.wind_error).max(0.0),
        demand_e: (row.demand_e + exo.demand_e_error).max(0.0),
        price: (row.price + exo.price_error).max(0.0),
        demand_q: (row.demand_q + exo.demand_q_error).max(0.0),
    }
}

/// Operating cost of one period, $.
pub fn stage_cost(state: &SystemState, decision: &Decision, params: &MicrogridParams) -> f64 {
    let pen = &params.penalties;
    let fuel = params.fc.cost_coefficient * decision.fc_power
        + params.ccgt_electric.cost_coefficient * params.ccgt_electric_output(decision.gas_flow)
        + params.gb.cost_coefficient * decision.gb_heat;
    let trade = state.price * decision.grid_power;
    let curtail = pen.wind_curtailment * decision.wind_curtail
        + pen.load_curtailment * decision.load_curtail
        + pen.heat_curtailment * decision.heat_curtail
        + pen.heat_dump * decision.heat_dump;
    params.dt_hours * (fuel + trade + curtail)
}

/// Next state given this period's decision and the next period's exogenous draw.
pub fn transition(
    state: &SystemState,
    decision: &Decision,
    exo: &ExogenousSample,
    forecast_next: &ForecastRow,
    params: &MicrogridParams,
    lift: &PeriodLift,
) -> Result<SystemState> {
    if forecast_next.period != state.period + 1 {
        return Err(Error::PeriodMismatch {
            state: state.period,
            row: forecast_next.period,
        });
    }
    let st = &params.storage;
    let next = realized_state(forecast_next, exo);
    Ok(SystemState {
        period: next.period,
        fc_power_prev: decision.fc_power,
        ccgt_power: params.ccgt_electric_output(decision.gas_flow),
        soc: state.soc
            + (decision.charge_power * st.eta_charge - decision.discharge_power / st.eta_discharge)
                * params.dt_hours,
        wind_available: next.wind,
        demand_e: next.demand_e,
        price: next.price,
        gb_heat_prev: decision.gb_heat,
        hp_heat_prev: decision.hp_heat,
        ccgt_aug: lift.apply(&state.ccgt_aug, decision.gas_flow),
        demand_q: next.demand_q,
        grid_power_prev: decision.grid_power,
    })
}
