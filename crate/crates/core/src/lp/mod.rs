//! Linear programs and a dense bounded-variable simplex solver.
//!
//! Every constraint is a ranged row `lo <= a.x <= hi` (equality when
//! `lo == hi`, one-sided when the other end is infinite). Variables carry
//! their own bounds; free variables are allowed.

mod simplex;
mod writer;

use serde::Serialize;

use crate::error::{Error, Result};

pub use simplex::SimplexOptions;
pub use writer::write_lp_format;

/// Index of a variable in a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * x[v.0]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Constant added to the objective value.
    pub objective_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub names: Vec<String>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64, cost: f64) -> VarId {
        self.objective.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.names.push(name.into());
        VarId(self.objective.len() - 1)
    }

    pub fn set_bounds(&mut self, v: VarId, lo: f64, hi: f64) {
        self.lower[v.0] = lo;
        self.upper[v.0] = hi;
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        let (lo, hi) = match sense {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
            Sense::Eq => (rhs, rhs),
        };
        self.add_range(name, coeffs, lo, hi);
    }

    pub fn add_range(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        lo: f64,
        hi: f64,
    ) {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            lo,
            hi,
        });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Largest bound or row violation of `x`, with the name of the offender.
    pub fn max_violation(&self, x: &[f64]) -> (f64, Option<String>) {
        let mut worst = (0.0, None);
        for (j, &v) in x.iter().enumerate() {
            let viol = (self.lower[j] - v).max(v - self.upper[j]);
            if viol > worst.0 {
                worst = (viol, Some(self.names[j].clone()));
            }
        }
        for row in &self.rows {
            let a = row.activity(x);
            let viol = (row.lo - a).max(a - row.hi);
            if viol > worst.0 {
                worst = (viol, Some(row.name.clone()));
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n || self.names.len() != n {
            return Err(Error::Dimension(
                "objective, bounds and names must have equal length".into(),
            ));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(Error::Dimension(format!(
                    "variable `{}` has lower bound {} above upper bound {}",
                    self.names[j], self.lower[j], self.upper[j]
                )));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(Error::Dimension(format!(
                    "variable `{}` has an empty domain",
                    self.names[j]
                )));
            }
        }
        for row in &self.rows {
            if let Some(&(v, _)) = row.coeffs.iter().find(|(v, _)| v.0 >= n) {
                return Err(Error::Dimension(format!(
                    "row `{}` references variable {} of {n}",
                    row.name, v.0
                )));
            }
            if row.lo > row.hi || row.lo.is_nan() || row.hi.is_nan() {
                return Err(Error::Dimension(format!(
                    "row `{}` has an empty range",
                    row.name
                )));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Dimension(
                "objective has non-finite coefficients".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or unrecoverable loss of accuracy.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
    /// For infeasible programs, the row whose phase-one artificial stayed positive.
    pub infeasible_row: Option<String>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.0]
    }

    /// Converts a non-optimal status into an error.
    pub fn into_result(self) -> Result<LpSolution> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible(self.infeasible_row)),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::NumericalFailure => Err(Error::Numerical(format!(
                "no optimal basis after {} iterations",
                self.iterations
            ))),
        }
    }
}

/// Solves `min c.x` over the program's rows and bounds with default options.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, options: &SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    Ok(simplex::solve(lp, options))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lower_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        lp.add_row("floor", vec![(x, 1.0)], Sense::Ge, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value(x) - 3.0).abs() < 1e-12);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_max() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY, -1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, -1.0);
        lp.add_row("cap", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_names_row() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 1.0, 1.0);
        lp.add_row("too_high", vec![(x, 1.0)], Sense::Ge, 2.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert_eq!(sol.infeasible_row.as_deref(), Some("too_high"));
        assert!(matches!(sol.into_result(), Err(Error::Infeasible(Some(_)))));
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY, -1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 0.0);
        lp.add_row("r", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |x - 2| written with a free x and a split error
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let p = lp.add_var("p", 0.0, f64::INFINITY, 1.0);
        let m = lp.add_var("m", 0.0, f64::INFINITY, 1.0);
        lp.add_row("err", vec![(x, 1.0), (p, -1.0), (m, 1.0)], Sense::Eq, 2.0);
        lp.add_row("cap", vec![(x, 1.0)], Sense::Le, 5.0);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective.abs() < 1e-12);
        assert!((sol.value(x) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ranged_rows_and_offset() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 10.0, 2.0);
        let y = lp.add_var("y", 0.0, 10.0, 1.0);
        lp.add_range("band", vec![(x, 1.0), (y, 1.0)], 4.0, 6.0);
        lp.objective_offset = 10.0;
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective - 14.0).abs() < 1e-12);
        assert!((sol.value(y) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 1.0, 1.0);
        lp.add_row("r", vec![(x, 1.0), (VarId(4), 1.0)], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Dimension(_))));
        let mut lp = LinearProgram::new();
        lp.add_var("x", 2.0, 1.0, 1.0);
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::new();
        let v: Vec<_> = (0..5)
            .map(|i| lp.add_var(format!("v{i}"), 0.0, 3.0, -(i as f64 % 2.0) - 1.0))
            .collect();
        lp.add_row("sum", v.iter().map(|&x| (x, 1.0)).collect(), Sense::Le, 4.0);
        lp.add_row("pair", vec![(v[1], 1.0), (v[3], 1.0)], Sense::Le, 2.5);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a, b);
    }
}
