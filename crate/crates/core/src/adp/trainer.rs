use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ccgt::shift_output;
use crate::dispatch::{solve_period, Plant, SubproblemResult};
use crate::error::{Error, Result};
use crate::model::{stage_cost, transition, ExogenousSample, SystemState};
use crate::scenario::ScenarioSet;

use super::vfa::{update_slope, PiecewiseLinearVfa, StepsizeRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Iteration budget.
    pub iterations: usize,
    /// Iterations per averaging window of the stopping test.
    pub window: usize,
    /// Relative change between consecutive window means that counts as converged.
    pub rel_tol: f64,
    pub stop_on_convergence: bool,
    /// Heat perturbation of the marginal-value sample, MW.
    pub perturbation: f64,
    pub segments: usize,
    pub stepsize: StepsizeRule,
    /// Seed of the scenario draw sequence. Not read from config files; the
    /// harness derives it from the run seed.
    #[serde(skip)]
    pub seed: u64,
    /// Number of training scenarios drawn from.
    pub scenarios: usize,
    /// Exogenous samples averaged into each marginal observation.
    pub marginal_batch: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            iterations: 60,
            window: 10,
            rel_tol: 0.01,
            stop_on_convergence: true,
            perturbation: 1.0,
            segments: 35,
            stepsize: StepsizeRule::default(),
            seed: 1,
            scenarios: 50,
            marginal_batch: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::param("training.iterations", "must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::param("training.window", "must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::param("training.rel_tol", "must be positive"));
        }
        if !(self.perturbation > 0.0 && self.perturbation.is_finite()) {
            return Err(Error::param("training.perturbation", "must be positive"));
        }
        if self.segments == 0 {
            return Err(Error::param("training.segments", "must be at least 1"));
        }
        if self.scenarios == 0 {
            return Err(Error::param("training.scenarios", "must be at least 1"));
        }
        if self.marginal_batch == 0 {
            return Err(Error::param(
                "training.marginal_batch",
                "must be at least 1",
            ));
        }
        self.stepsize.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub scenario: usize,
    /// Realized cost of the training day, $.
    pub total_cost: f64,
    /// Euclidean norm of the change of all slopes during the iteration.
    pub slope_change: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
    /// First iteration at which the stopping test held.
    pub converged_at: Option<usize>,
}

impl ConvergenceTrace {
    pub fn costs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.total_cost).collect()
    }

    /// Relative change between the mean of the last `window` costs and the
    /// mean of the `window` before them; `None` until both windows exist.
    pub fn window_change(costs: &[f64], window: usize) -> Option<f64> {
        let n = costs.len();
        if window == 0 || n < 2 * window {
            return None;
        }
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let prev = mean(&costs[n - 2 * window..n - window]);
        let last = mean(&costs[n - window..]);
        Some((last - prev).abs() / prev.abs().max(f64::MIN_POSITIVE))
    }

    /// First iteration count at which the stopping test holds.
    pub fn first_convergence(costs: &[f64], window: usize, rel_tol: f64) -> Option<usize> {
        (1..=costs.len())
            .find(|&n| Self::window_change(&costs[..n], window).is_some_and(|c| c < rel_tol))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Serde(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Serde(e.to_string()))
    }
}

fn shifted(plant: &Plant, state: &SystemState, delta: f64) -> Result<SystemState> {
    let mut s = state.clone();
    s.ccgt_aug = shift_output(&state.ccgt_aug, delta, &plant.arma)?;
    Ok(s)
}

/// Finite difference of the optimal period objective in the incoming heat.
/// Uses `(V(Q) - V(Q - rho)) / rho`, or the forward difference when
/// `Q - rho` would fall below the heat range.
fn marginal_from(
    plant: &Plant,
    state: &SystemState,
    slopes: &[f64],
    rho: f64,
    base: Option<f64>,
) -> Result<f64> {
    let q = state.ccgt_heat(&plant.arma);
    let (q_min, _) = plant.params.heat_range();
    let delta = if q - rho >= q_min - 1e-9 { -rho } else { rho };
    let other = shifted(plant, state, delta)?;
    let (v_q, v_other) = match base {
        Some(v) => (v, solve_period(plant, &other, slopes)?.objective),
        None => {
            let (a, b) = rayon::join(
                || solve_period(plant, state, slopes),
                || solve_period(plant, &other, slopes),
            );
            (a?.objective, b?.objective)
        }
    };
    Ok(if delta < 0.0 {
        (v_q - v_other) / rho
    } else {
        (v_other - v_q) / rho
    })
}

/// Observed marginal value of incoming CCGT heat at `state`, $ per MW.
pub fn sample_marginal(
    plant: &Plant,
    state: &SystemState,
    slopes: &[f64],
    rho: f64,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::param("perturbation", "must be positive"));
    }
    marginal_from(plant, state, slopes, rho, None)
}

fn slope_distance(a: &PiecewiseLinearVfa, b: &PiecewiseLinearVfa) -> f64 {
    a.rows
        .iter()
        .zip(&b.rows)
        .flat_map(|(x, y)| x.slopes.iter().zip(&y.slopes).map(|(p, q)| (p - q).powi(2)))
        .sum::<f64>()
        .sqrt()
}

/// Trains per-period value functions by forward passes over scenarios drawn
/// from `scenarios`, starting from zero slopes.
pub fn train(
    config: &TrainingConfig,
    scenarios: &ScenarioSet,
    plant: &Plant,
) -> Result<(PiecewiseLinearVfa, ConvergenceTrace)> {
    config.validate()?;
    let horizon = scenarios.horizon();
    if horizon == 0 || scenarios.count == 0 {
        return Err(Error::param(
            "scenarios",
            "need at least one scenario of nonzero length",
        ));
    }
    let pool = config.scenarios.min(scenarios.count);
    let (q_min, q_max) = plant.params.heat_range();
    let mut vfa = PiecewiseLinearVfa::zero(horizon, q_min, q_max, config.segments);
    let mut trace = ConvergenceTrace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for n in 1..=config.iterations {
        let k = rng.gen_range(0..pool);
        let extra: Vec<usize> = (1..config.marginal_batch)
            .map(|_| rng.gen_range(0..pool))
            .collect();
        let realized = scenarios.realized(k);
        let before = vfa.clone();
        let ctx = |period: usize| {
            move |e: Error| Error::Training {
                iteration: n,
                period,
                source: Box::new(e),
            }
        };

        let mut state = SystemState::initial(&plant.params, &plant.arma, &realized[0]);
        let mut total = 0.0;
        for t in 0..horizon {
            let slopes = vfa.decision_slopes(t).into_owned();
            let SubproblemResult {
                decision,
                objective,
                ..
            } = solve_period(plant, &state, &slopes).map_err(ctx(t))?;
            total += stage_cost(&state, &decision, &plant.params);

            if t > 0 {
                let mut obs =
                    marginal_from(plant, &state, &slopes, config.perturbation, Some(objective))
                        .map_err(ctx(t))?;
                for &j in &extra {
                    let alt = scenarios.realized_row(j, t);
                    let mut s = state.clone();
                    s.wind_available = alt.wind;
                    s.demand_e = alt.demand_e;
                    s.price = alt.price;
                    s.demand_q = alt.demand_q;
                    obs += marginal_from(plant, &s, &slopes, config.perturbation, None)
                        .map_err(ctx(t))?;
                }
                obs /= config.marginal_batch as f64;
                let q = state.ccgt_heat(&plant.arma);
                let a = vfa.rows[t - 1].segment_of(q);
                update_slope(&mut vfa, t - 1, a, obs, n, &config.stepsize)?;
            }

            if t + 1 < horizon {
                state = transition(
                    &state,
                    &decision,
                    &ExogenousSample::default(),
                    &realized[t + 1],
                    &plant.params,
                    &plant.lift,
                )
                .map_err(ctx(t))?;
            }
        }

        trace.records.push(IterationRecord {
            iteration: n,
            scenario: k,
            total_cost: total,
            slope_change: slope_distance(&before, &vfa),
        });
        log::debug!("iteration {n}: scenario {k}, cost {total:.2}");
        if trace.converged_at.is_none()
            && ConvergenceTrace::window_change(&trace.costs(), config.window)
                .is_some_and(|c| c < config.rel_tol)
        {
            trace.converged_at = Some(n);
            if config.stop_on_convergence {
                break;
            }
        }
    }
    Ok((vfa, trace))
}
