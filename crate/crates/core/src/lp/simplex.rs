//! Dense tableau implementation of the bounded-variable primal simplex method.
//!
//! Columns are the structural variables followed by one activity variable per
//! row (`a_i.x - s_i = 0`, `s_i` bounded by the row range). Rows whose initial
//! activity lies outside their range get a phase-one artificial. Pricing is
//! Dantzig's rule with a Harris two-pass ratio test; after a run of degenerate
//! pivots the solver switches to Bland's rule until progress resumes.

use nalgebra::DMatrix;

use super::{LinearProgram, LpSolution, LpStatus};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Reduced-cost optimality tolerance.
    pub optimality_tol: f64,
    /// Primal feasibility tolerance used by the ratio test and phase one.
    pub feasibility_tol: f64,
    pub pivot_tol: f64,
    /// Degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_limit: usize,
    /// Hard iteration cap; `None` picks one from the problem size.
    pub max_iterations: Option<usize>,
    /// Largest row or bound violation accepted in a returned optimum.
    pub accept_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            optimality_tol: 1e-9,
            feasibility_tol: 1e-9,
            pivot_tol: 1e-9,
            degenerate_limit: 40,
            max_iterations: None,
            accept_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

const NO_ART: f64 = 0.0;

struct Tableau<'a> {
    lp: &'a LinearProgram,
    opts: &'a SimplexOptions,
    m: usize,
    /// structural + activity columns
    cols: usize,
    tab: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    value: Vec<f64>,
    state: Vec<VarState>,
    /// Basic column of each row; `cols + i` marks the artificial of row `i`.
    basis: Vec<usize>,
    basic_value: Vec<f64>,
    /// Sign of the artificial column in each row, or 0 if the row has none.
    art_sign: Vec<f64>,
    art_upper: f64,
    reduced: Vec<f64>,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
}

enum Step {
    Optimal,
    Unbounded,
    Progress,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram, opts: &'a SimplexOptions) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let cols = n + m;
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        for row in &lp.rows {
            lo.push(row.lo);
            hi.push(row.hi);
        }
        let mut cost = lp.objective.clone();
        cost.resize(cols, 0.0);

        let mut state = vec![VarState::AtLower; cols];
        let mut value = vec![0.0; cols];
        for j in 0..n {
            if lo[j].is_finite() {
                state[j] = VarState::AtLower;
                value[j] = lo[j];
            } else if hi[j].is_finite() {
                state[j] = VarState::AtUpper;
                value[j] = hi[j];
            } else {
                state[j] = VarState::Free;
                value[j] = 0.0;
            }
        }

        let mut tab = vec![0.0; m * cols];
        let mut basis = vec![0; m];
        let mut basic_value = vec![0.0; m];
        let mut art_sign = vec![NO_ART; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let r = row.activity(&value);
            let slack = n + i;
            let line = &mut tab[i * cols..(i + 1) * cols];
            for &(v, a) in &row.coeffs {
                line[v.0] += a;
            }
            line[slack] = -1.0;
            if r >= row.lo - opts.feasibility_tol && r <= row.hi + opts.feasibility_tol {
                // basic activity variable, B_ii = -1
                line.iter_mut().for_each(|t| *t = -*t);
                basis[i] = slack;
                state[slack] = VarState::Basic;
                basic_value[i] = r;
            } else {
                let (bound, st) = if r < row.lo {
                    (row.lo, VarState::AtLower)
                } else {
                    (row.hi, VarState::AtUpper)
                };
                let sigma = if bound - r > 0.0 { 1.0 } else { -1.0 };
                line.iter_mut().for_each(|t| *t /= sigma);
                state[slack] = st;
                value[slack] = bound;
                basis[i] = cols + i;
                art_sign[i] = sigma;
                basic_value[i] = (bound - r).abs();
            }
        }

        Tableau {
            lp,
            opts,
            m,
            cols,
            tab,
            lo,
            hi,
            cost,
            value,
            state,
            basis,
            basic_value,
            art_sign,
            art_upper: f64::INFINITY,
            reduced: vec![0.0; cols],
            iterations: 0,
            degenerate_run: 0,
            bland: false,
        }
    }

    fn basic_bounds(&self, i: usize) -> (f64, f64) {
        let b = self.basis[i];
        if b >= self.cols {
            (0.0, self.art_upper)
        } else {
            (self.lo[b], self.hi[b])
        }
    }

    fn artificial_sum(&self) -> f64 {
        (0..self.m)
            .filter(|&i| self.basis[i] >= self.cols)
            .map(|i| self.basic_value[i])
            .sum()
    }

    fn has_artificials(&self) -> bool {
        self.basis.iter().any(|&b| b >= self.cols)
    }

    /// Recomputes reduced costs for either phase.
    fn price_all(&mut self, phase_one: bool) {
        let cols = self.cols;
        let mut d: Vec<f64> = if phase_one {
            vec![0.0; cols]
        } else {
            self.cost.clone()
        };
        for i in 0..self.m {
            let b = self.basis[i];
            let cb = if b >= cols {
                if phase_one {
                    1.0
                } else {
                    0.0
                }
            } else if phase_one {
                0.0
            } else {
                self.cost[b]
            };
            if cb != 0.0 {
                let row = &self.tab[i * cols..(i + 1) * cols];
                for (dj, t) in d.iter_mut().zip(row) {
                    *dj -= cb * t;
                }
            }
        }
        for i in 0..self.m {
            let b = self.basis[i];
            if b < cols {
                d[b] = 0.0;
            }
        }
        self.reduced = d;
    }

    fn choose_entering(&self) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            let d = self.reduced[j];
            let dir = match self.state[j] {
                VarState::Basic => continue,
                _ if self.lo[j] == self.hi[j] => continue,
                VarState::AtLower if d < -tol => 1.0,
                VarState::AtUpper if d > tol => -1.0,
                VarState::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Ratio test. Returns `(row, step)` for a pivot, `(None, step)` for a
    /// bound flip of the entering variable, or `None` when unbounded.
    fn ratio_test(&self, q: usize, dir: f64) -> Option<(Option<usize>, f64)> {
        let ptol = self.opts.pivot_tol;
        let ftol = self.opts.feasibility_tol;
        let flip = self.hi[q] - self.lo[q];
        let limit = |i: usize, slack: f64| -> Option<(f64, f64)> {
            let alpha = self.tab[i * self.cols + q] * dir;
            let (lo, hi) = self.basic_bounds(i);
            let x = self.basic_value[i];
            if alpha > ptol && lo.is_finite() {
                Some(((x - lo + slack) / alpha, alpha))
            } else if alpha < -ptol && hi.is_finite() {
                Some(((hi - x + slack) / -alpha, alpha))
            } else {
                None
            }
        };

        if self.bland {
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if let Some((t, _)) = limit(i, 0.0) {
                    let t = t.max(0.0);
                    let better = match best {
                        None => true,
                        Some((bi, bt)) => {
                            t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((i, t));
                    }
                }
            }
            return match best {
                Some((_, t)) if flip.is_finite() && flip <= t => Some((None, flip)),
                Some((i, t)) => Some((Some(i), t)),
                None if flip.is_finite() => Some((None, flip)),
                None => None,
            };
        }

        // Harris pass one: largest step with bounds relaxed by ftol
        let mut relaxed = f64::INFINITY;
        for i in 0..self.m {
            if let Some((t, _)) = limit(i, ftol) {
                relaxed = relaxed.min(t);
            }
        }
        if flip.is_finite() && flip <= relaxed {
            return Some((None, flip));
        }
        if relaxed == f64::INFINITY {
            return None;
        }
        // pass two: biggest pivot among rows blocking within the relaxed step
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..self.m {
            if let Some((t, alpha)) = limit(i, 0.0) {
                if t <= relaxed {
                    let better = match best {
                        None => true,
                        Some((_, _, ba)) => alpha.abs() > ba.abs(),
                    };
                    if better {
                        best = Some((i, t.max(0.0), alpha));
                    }
                }
            }
        }
        best.map(|(i, t, _)| (Some(i), t))
    }

    fn iterate(&mut self) -> Step {
        let Some((q, dir)) = self.choose_entering() else {
            return Step::Optimal;
        };
        let Some((leave, step)) = self.ratio_test(q, dir) else {
            return Step::Unbounded;
        };
        self.iterations += 1;
        if step <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > self.opts.degenerate_limit {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }

        let theta = step * dir;
        let cols = self.cols;
        for i in 0..self.m {
            let t = self.tab[i * cols + q];
            if t != 0.0 {
                self.basic_value[i] -= t * theta;
            }
        }
        let entering_value = self.value[q] + theta;

        match leave {
            None => {
                // bound flip
                if dir > 0.0 {
                    self.state[q] = VarState::AtUpper;
                    self.value[q] = self.hi[q];
                } else {
                    self.state[q] = VarState::AtLower;
                    self.value[q] = self.lo[q];
                }
            }
            Some(r) => {
                let alpha = self.tab[r * cols + q] * dir;
                let out = self.basis[r];
                if out < cols {
                    if alpha > 0.0 {
                        self.state[out] = VarState::AtLower;
                        self.value[out] = self.lo[out];
                    } else {
                        self.state[out] = VarState::AtUpper;
                        self.value[out] = self.hi[out];
                    }
                }
                self.pivot(r, q);
                self.basis[r] = q;
                self.state[q] = VarState::Basic;
                self.basic_value[r] = entering_value;
            }
        }
        Step::Progress
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let piv = self.tab[r * cols + q];
        {
            let row = &mut self.tab[r * cols..(r + 1) * cols];
            let inv = 1.0 / piv;
            row.iter_mut().for_each(|t| *t *= inv);
            row[q] = 1.0;
        }
        let (before, rest) = self.tab.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for line in before
            .chunks_exact_mut(cols)
            .chain(after.chunks_exact_mut(cols))
        {
            let f = line[q];
            if f != 0.0 {
                for (t, p) in line.iter_mut().zip(pivot_row.iter()) {
                    *t -= f * p;
                }
                line[q] = 0.0;
            }
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *d -= dq * p;
            }
            self.reduced[q] = 0.0;
        }
    }

    fn run_phase(&mut self, phase_one: bool, max_iter: usize) -> Option<Step> {
        self.price_all(phase_one);
        loop {
            if self.iterations >= max_iter {
                return None;
            }
            if phase_one && self.artificial_sum() <= self.opts.feasibility_tol * 0.01 {
                return Some(Step::Optimal);
            }
            match self.iterate() {
                Step::Progress => {}
                other => return Some(other),
            }
        }
    }

    fn structural(&self) -> Vec<f64> {
        let n = self.lp.num_vars();
        let mut x = self.value[..n].to_vec();
        for i in 0..self.m {
            let b = self.basis[i];
            if b < n {
                x[b] = self.basic_value[i];
            }
        }
        x
    }

    /// Rebuilds the tableau and basic values from the original data for the
    /// current basis.
    fn reinvert(&mut self) -> bool {
        let n = self.lp.num_vars();
        let (m, cols) = (self.m, self.cols);
        let mut full = DMatrix::<f64>::zeros(m, cols);
        for (i, row) in self.lp.rows.iter().enumerate() {
            for &(v, a) in &row.coeffs {
                full[(i, v.0)] += a;
            }
            full[(i, n + i)] = -1.0;
        }
        let mut basis_mat = DMatrix::<f64>::zeros(m, m);
        for (k, &b) in self.basis.iter().enumerate() {
            if b >= cols {
                let i = b - cols;
                basis_mat[(i, k)] = self.art_sign[i];
            } else {
                basis_mat.set_column(k, &full.column(b));
            }
        }
        let lu = basis_mat.lu();
        let Some(t) = lu.solve(&full) else {
            return false;
        };
        for i in 0..m {
            for j in 0..cols {
                self.tab[i * cols + j] = t[(i, j)];
            }
            let b = self.basis[i];
            if b < cols {
                for j in 0..cols {
                    self.tab[i * cols + j] = if j == b { 1.0 } else { self.tab[i * cols + j] };
                }
            }
        }
        for i in 0..m {
            let row = &self.tab[i * cols..(i + 1) * cols];
            let mut v = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if self.state[j] != VarState::Basic && a != 0.0 {
                    v -= a * self.value[j];
                }
            }
            self.basic_value[i] = v;
        }
        true
    }
}

pub(super) fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> LpSolution {
    let n = lp.num_vars();
    let mut tb = Tableau::new(lp, opts);
    let max_iter = opts.max_iterations.unwrap_or(50 * (tb.m + tb.cols) + 1000);
    let fail = |tb: &Tableau, status: LpStatus| LpSolution {
        status,
        objective: f64::NAN,
        x: vec![f64::NAN; n],
        iterations: tb.iterations,
        infeasible_row: None,
    };

    if tb.has_artificials() {
        match tb.run_phase(true, max_iter) {
            None => return fail(&tb, LpStatus::NumericalFailure),
            Some(Step::Unbounded) => return fail(&tb, LpStatus::NumericalFailure),
            _ => {}
        }
        if tb.artificial_sum() > opts.feasibility_tol {
            let worst = (0..tb.m)
                .filter(|&i| tb.basis[i] >= tb.cols)
                .max_by(|&a, &b| tb.basic_value[a].total_cmp(&tb.basic_value[b]));
            let mut sol = fail(&tb, LpStatus::Infeasible);
            sol.infeasible_row = worst.map(|i| lp.rows[i].name.clone());
            return sol;
        }
        tb.art_upper = 0.0;
    }

    let mut reinverts = 0;
    loop {
        match tb.run_phase(false, max_iter) {
            None => return fail(&tb, LpStatus::NumericalFailure),
            Some(Step::Unbounded) => return fail(&tb, LpStatus::Unbounded),
            _ => {}
        }
        let x = tb.structural();
        let (viol, _) = lp.max_violation(&x);
        if viol <= opts.accept_tol * 0.1 || reinverts >= 2 {
            if viol > opts.accept_tol {
                return fail(&tb, LpStatus::NumericalFailure);
            }
            return LpSolution {
                status: LpStatus::Optimal,
                objective: lp.objective_value(&x),
                x,
                iterations: tb.iterations,
                infeasible_row: None,
            };
        }
        reinverts += 1;
        if !tb.reinvert() {
            return fail(&tb, LpStatus::NumericalFailure);
        }
    }
}
