//! Coupled multi-period dispatch with depth-first branch-and-bound over the
//! storage flags.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpSolution};
use crate::model::{stage_cost, Decision, ForecastRow, SystemState};

use super::builder::{HeatModel, PeriodVars, ProgramBuilder};
use super::period::{check_slopes, current_row, read_decision, FLAG_TOL};
use super::{FlagSetting, Plant};

/// Treatment of the storage flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryMode {
    /// Flags relaxed to `[0, 1]`; a lower bound on the mixed-integer cost.
    Relaxed,
    /// Exact flags by branch-and-bound, up to `max_nodes` LP solves.
    BranchAndBound { max_nodes: usize },
}

impl BinaryMode {
    pub const DEFAULT_BB: BinaryMode = BinaryMode::BranchAndBound { max_nodes: 5000 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPeriodResult {
    pub decisions: Vec<Decision>,
    /// Program objective including any terminal value, $.
    pub objective: f64,
    /// Sum of stage costs under the state's and rows' exogenous values, $.
    pub stage_cost: f64,
    /// Best bound proven by the search (equals `objective` when `optimal`).
    pub lower_bound: f64,
    pub nodes: usize,
    pub optimal: bool,
    /// End-of-period CCGT heat, MW.
    pub heat_end: Vec<f64>,
}

struct Problem<'a> {
    plant: &'a Plant,
    state: &'a SystemState,
    rows: Vec<ForecastRow>,
    slopes: Option<&'a [f64]>,
    model: HeatModel,
}

struct Node {
    flags: Vec<FlagSetting>,
    sol: LpSolution,
    vars: Vec<PeriodVars>,
}

impl Problem<'_> {
    fn solve(&self, flags: &[FlagSetting]) -> Result<Option<Node>> {
        let mut b = ProgramBuilder::new(self.plant, self.state, self.model);
        for (row, &f) in self.rows.iter().zip(flags) {
            b.add_period(row, f);
        }
        if let Some(s) = self.slopes {
            let (lo, hi) = self.plant.params.heat_range();
            b.add_terminal_value(s, lo, hi);
        }
        let (lp, vars) = b.finish();
        match solve_lp(&lp)?.into_result() {
            Ok(sol) => Ok(Some(Node {
                flags: flags.to_vec(),
                sol,
                vars,
            })),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// First period whose relaxed storage use is not realizable with binary flags.
    fn conflict(&self, node: &Node) -> Option<usize> {
        let st = &self.plant.params.storage;
        node.vars.iter().position(|v| {
            if v.flags != FlagSetting::Relaxed {
                return false;
            }
            let pc = node.sol.x[v.charge.0];
            let pd = node.sol.x[v.discharge.0];
            let partial = |p: f64, min: f64| p > FLAG_TOL && p < min - FLAG_TOL;
            (pc > FLAG_TOL && pd > FLAG_TOL)
                || partial(pc, st.charge_min)
                || partial(pd, st.discharge_min)
        })
    }

    /// Fixes every conflicted period to its dominant direction.
    fn rounded(&self, node: &Node) -> Vec<FlagSetting> {
        node.vars
            .iter()
            .zip(&node.flags)
            .map(|(v, &f)| {
                if f != FlagSetting::Relaxed {
                    return f;
                }
                let pc = node.sol.x[v.charge.0];
                let pd = node.sol.x[v.discharge.0];
                FlagSetting::Fixed {
                    charge: pc > FLAG_TOL && pc >= pd,
                    discharge: pd > FLAG_TOL && pd > pc,
                }
            })
            .collect()
    }

    fn finish(
        &self,
        node: &Node,
        lower_bound: f64,
        nodes: usize,
        optimal: bool,
    ) -> MultiPeriodResult {
        let x = &node.sol.x;
        let decisions: Vec<Decision> = node.vars.iter().map(|v| read_decision(x, v)).collect();
        let mut st = self.state.clone();
        let mut cost = 0.0;
        for (d, row) in decisions.iter().zip(&self.rows) {
            st.period = row.period;
            st.price = row.price;
            cost += stage_cost(&st, d, &self.plant.params);
        }
        MultiPeriodResult {
            objective: node.sol.objective,
            stage_cost: cost,
            lower_bound: lower_bound.min(node.sol.objective),
            nodes,
            optimal,
            heat_end: node.vars.iter().map(|v| v.heat_end.eval(x)).collect(),
            decisions,
        }
    }
}

/// Optimizes the current period (exogenous values from `state`) together
/// with the periods in `future`, optionally valuing the final CCGT heat with
/// a piecewise-linear function of the given slopes.
pub fn solve_multi_period(
    plant: &Plant,
    state: &SystemState,
    future: &[ForecastRow],
    terminal_slopes: Option<&[f64]>,
    model: HeatModel,
    mode: BinaryMode,
) -> Result<MultiPeriodResult> {
    if let Some(s) = terminal_slopes {
        check_slopes(s)?;
    }
    let mut rows = vec![current_row(state)];
    rows.extend_from_slice(future);
    for (i, r) in rows.iter().enumerate().skip(1) {
        if r.period != state.period + i {
            return Err(Error::PeriodMismatch {
                state: state.period + i,
                row: r.period,
            });
        }
    }
    let prob = Problem {
        plant,
        state,
        rows,
        slopes: terminal_slopes,
        model,
    };
    let root_flags = vec![FlagSetting::Relaxed; prob.rows.len()];
    let root = prob
        .solve(&root_flags)?
        .ok_or_else(|| Error::Infeasible(Some("relaxed dispatch program".into())))?;
    let root_bound = root.sol.objective;
    let max_nodes = match mode {
        BinaryMode::Relaxed => return Ok(prob.finish(&root, root_bound, 1, true)),
        BinaryMode::BranchAndBound { max_nodes } => max_nodes.max(1),
    };
    if prob.conflict(&root).is_none() {
        return Ok(prob.finish(&root, root_bound, 1, true));
    }

    let mut nodes = 1;
    let mut incumbent = prob.solve(&prob.rounded(&root))?;
    nodes += 1;
    let tol = 1e-7 * (1.0 + root_bound.abs());
    let mut stack = vec![root];
    let mut exhausted = true;
    while let Some(node) = stack.pop() {
        if incumbent
            .as_ref()
            .is_some_and(|inc| node.sol.objective >= inc.sol.objective - tol)
        {
            continue;
        }
        let Some(k) = prob.conflict(&node) else {
            incumbent = Some(node);
            continue;
        };
        if nodes >= max_nodes {
            exhausted = false;
            break;
        }
        // Reverse so that the first setting is explored first.
        for setting in FlagSetting::ALL_FIXED.iter().rev() {
            let mut flags = node.flags.clone();
            flags[k] = *setting;
            nodes += 1;
            if let Some(child) = prob.solve(&flags)? {
                stack.push(child);
            }
        }
    }
    let inc = incumbent
        .ok_or_else(|| Error::Infeasible(Some("no storage flag assignment is feasible".into())))?;
    let bound = if exhausted {
        inc.sol.objective
    } else {
        stack
            .iter()
            .map(|n| n.sol.objective)
            .fold(inc.sol.objective, f64::min)
    };
    Ok(prob.finish(&inc, bound, nodes, exhausted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{audit_decision, solve_period};
    use crate::model::{transition, ExogenousSample};

    fn rows(n: usize, surplus: bool) -> Vec<ForecastRow> {
        (0..n)
            .map(|t| ForecastRow {
                period: t,
                wind: if surplus { 3.6 } else { 1.0 + 0.3 * t as f64 },
                demand_e: if surplus { 9.0 } else { 22.0 + 2.0 * t as f64 },
                price: [35.0, 95.0, 60.0, 95.0][t % 4],
                demand_q: 30.0 + 1.5 * t as f64,
            })
            .collect()
    }

    fn start(plant: &Plant, rows: &[ForecastRow]) -> SystemState {
        SystemState::initial(&plant.params, &plant.arma, &rows[0])
    }

    #[test]
    fn single_period_matches_subproblem() {
        let plant = Plant::default();
        let r = rows(1, false);
        let s = start(&plant, &r);
        let slopes: Vec<f64> = (0..35).map(|a| -40.0 + a as f64).collect();
        let one = solve_period(&plant, &s, &slopes).unwrap();
        let multi = solve_multi_period(
            &plant,
            &s,
            &[],
            Some(&slopes),
            HeatModel::Dynamic,
            BinaryMode::DEFAULT_BB,
        )
        .unwrap();
        assert!(
            (one.objective - multi.objective).abs() < 1e-6,
            "{} vs {}",
            one.objective,
            multi.objective
        );
    }

    #[test]
    fn relaxation_bounds_branch_and_bound() {
        let plant = Plant::default();
        for surplus in [false, true] {
            let r = rows(6, surplus);
            let s = start(&plant, &r);
            let relaxed = solve_multi_period(
                &plant,
                &s,
                &r[1..],
                None,
                HeatModel::Dynamic,
                BinaryMode::Relaxed,
            )
            .unwrap();
            let exact = solve_multi_period(
                &plant,
                &s,
                &r[1..],
                None,
                HeatModel::Dynamic,
                BinaryMode::DEFAULT_BB,
            )
            .unwrap();
            assert!(exact.optimal);
            assert!(relaxed.objective <= exact.objective + 1e-7);
        }
    }

    /// Oracle: every one of the 3^4 flag assignments solved as a plain LP.
    #[test]
    fn branch_and_bound_matches_enumeration() {
        let plant = Plant::default();
        let r = rows(4, true);
        let s = start(&plant, &r);
        let prob = Problem {
            plant: &plant,
            state: &s,
            rows: r.clone(),
            slopes: None,
            model: HeatModel::Dynamic,
        };
        let mut best = f64::INFINITY;
        for code in 0..81usize {
            let flags: Vec<FlagSetting> = (0..4)
                .map(|k| FlagSetting::ALL_FIXED[(code / 3usize.pow(k as u32)) % 3])
                .collect();
            if let Some(n) = prob.solve(&flags).unwrap() {
                best = best.min(n.sol.objective);
            }
        }
        let exact = solve_multi_period(
            &plant,
            &s,
            &r[1..],
            None,
            HeatModel::Dynamic,
            BinaryMode::DEFAULT_BB,
        )
        .unwrap();
        assert!(
            (exact.objective - best).abs() < 1e-6,
            "{} vs {best}",
            exact.objective
        );
    }

    #[test]
    fn decisions_replay_without_violations() {
        let plant = Plant::default();
        let r = rows(5, false);
        let mut s = start(&plant, &r);
        let res = solve_multi_period(
            &plant,
            &s,
            &r[1..],
            None,
            HeatModel::Dynamic,
            BinaryMode::DEFAULT_BB,
        )
        .unwrap();
        for (t, d) in res.decisions.iter().enumerate() {
            assert!(audit_decision(&plant, &s, d).is_empty(), "period {t}");
            assert!(!(d.charge_flag && d.discharge_flag));
            if t + 1 < r.len() {
                s = transition(
                    &s,
                    d,
                    &ExogenousSample::default(),
                    &r[t + 1],
                    &plant.params,
                    &plant.lift,
                )
                .unwrap();
            }
        }
        let total: f64 = res.stage_cost;
        assert!((total - res.objective).abs() < 1e-6);
    }

    #[test]
    fn rejects_misnumbered_rows() {
        let plant = Plant::default();
        let r = rows(3, false);
        let s = start(&plant, &r);
        let err = solve_multi_period(
            &plant,
            &s,
            &r[2..],
            None,
            HeatModel::Dynamic,
            BinaryMode::Relaxed,
        );
        assert!(matches!(err, Err(Error::PeriodMismatch { .. })));
    }
}
