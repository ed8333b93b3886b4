//! CCGT heat dynamics.
//!
//! The plant's heat response to gas input follows a fourth-order ARMA
//! difference equation sampled every 50 s:
//!
//! ```text
//! Q(k) = sum_{m=1..4} a_m Q(k-m) + b_m g(k-m-3)
//! ```
//!
//! It is realized here as a 7-dimensional companion-form state
//! `x(k+1) = A_s x(k) + B_s g(k)`, `Q(k) = c x(k)` with `c = [b4 b3 b2 b1 0 0 0]`.
//! Gas is held constant over a dispatch period, so one period is the 18-fold
//! composition of the single-sample map ([`PeriodLift`]).

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AUG_DIM: usize = 7;

pub type Mat7 = SMatrix<f64, AUG_DIM, AUG_DIM>;
pub type Vec7 = SVector<f64, AUG_DIM>;

/// Identified ARMA coefficients of the CCGT heat process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmaParams {
    /// AR coefficients `a1..a4`.
    pub ar: [f64; 4],
    /// MA coefficients `b1..b4`, MW heat per unit gas flow.
    pub ma: [f64; 4],
    /// Sample interval in seconds.
    pub sample_interval_s: f64,
    pub samples_per_period: usize,
}

impl Default for ArmaParams {
    fn default() -> Self {
        ArmaParams {
            ar: [1.6301, -0.6292, -0.3266, 0.2570],
            ma: [0.2087, 0.06311, 0.3656, 0.4031],
            sample_interval_s: 50.0,
            samples_per_period: 18,
        }
    }
}

impl ArmaParams {
    pub fn ma_sum(&self) -> f64 {
        self.ma.iter().sum()
    }

    /// Steady-state heat per unit of constant gas input, `sum(b) / (1 - sum(a))`.
    pub fn steady_state_gain(&self) -> f64 {
        self.ma_sum() / (1.0 - self.ar.iter().sum::<f64>())
    }

    /// Single-sample companion matrix `A_s`.
    pub fn step_matrix(&self) -> Mat7 {
        let mut a = Mat7::zeros();
        for i in 0..AUG_DIM - 1 {
            a[(i, i + 1)] = 1.0;
        }
        let [a1, a2, a3, a4] = self.ar;
        a[(6, 3)] = a4;
        a[(6, 4)] = a3;
        a[(6, 5)] = a2;
        a[(6, 6)] = a1;
        a
    }

    pub fn output_row(&self) -> Vec7 {
        let [b1, b2, b3, b4] = self.ma;
        Vec7::from([b4, b3, b2, b1, 0.0, 0.0, 0.0])
    }

    /// Largest eigenvalue modulus of the single-sample companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.step_matrix()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ar.iter().chain(self.ma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("arma", "coefficients must be finite"));
        }
        if self.samples_per_period == 0 {
            return Err(Error::param(
                "arma.samples_per_period",
                "must be at least 1",
            ));
        }
        if !(self.sample_interval_s > 0.0) {
            return Err(Error::param("arma.sample_interval_s", "must be positive"));
        }
        if self.ma_sum() == 0.0 {
            return Err(Error::param("arma.ma", "MA coefficients sum to zero"));
        }
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            return Err(Error::param(
                "arma.ar",
                format!("companion matrix is not stable (spectral radius {rho:.6})"),
            ));
        }
        Ok(())
    }
}

/// Companion-form realization of the CCGT heat dynamics.
///
/// Components are delayed values of an auxiliary sequence `z`:
/// `x = (z(k-6), ..., z(k))`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedCcgtState(pub [f64; AUG_DIM]);

impl AugmentedCcgtState {
    pub fn zero() -> Self {
        Self::default()
    }

    /// State that holds `heat` indefinitely under the matching constant gas
    /// input `heat / gain`.
    pub fn steady_state(heat: f64, params: &ArmaParams) -> Self {
        AugmentedCcgtState([heat / params.ma_sum(); AUG_DIM])
    }

    pub fn as_vector(&self) -> Vec7 {
        Vec7::from(self.0)
    }

    pub fn from_vector(v: &Vec7) -> Self {
        let mut out = [0.0; AUG_DIM];
        out.copy_from_slice(v.as_slice());
        AugmentedCcgtState(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Direct evaluation of the ARMA recursion.
///
/// `heat_history[0]` is `Q(k-1)`, `gas_history[0]` is `g(k-1)`. Returns `Q(k)`.
pub fn arma_reference(params: &ArmaParams, heat_history: &[f64; 4], gas_history: &[f64; 7]) -> f64 {
    (0..4)
        .map(|m| params.ar[m] * heat_history[m] + params.ma[m] * gas_history[m + 3])
        .sum()
}

/// Advance the augmented state by one 50 s sample.
pub fn step(state: &AugmentedCcgtState, gas: f64, params: &ArmaParams) -> AugmentedCcgtState {
    let x = &state.0;
    let [a1, a2, a3, a4] = params.ar;
    AugmentedCcgtState([
        x[1],
        x[2],
        x[3],
        x[4],
        x[5],
        x[6],
        a4 * x[3] + a3 * x[4] + a2 * x[5] + a1 * x[6] + gas,
    ])
}

/// Heat output read from the augmented state.
pub fn heat_output(state: &AugmentedCcgtState, params: &ArmaParams) -> f64 {
    let [b1, b2, b3, b4] = params.ma;
    let x = &state.0;
    b4 * x[0] + b3 * x[1] + b2 * x[2] + b1 * x[3]
}

/// Heat output after each sample of one period under constant gas.
pub fn intra_period_trace(state: &AugmentedCcgtState, gas: f64, params: &ArmaParams) -> Vec<f64> {
    let mut x = *state;
    (0..params.samples_per_period)
        .map(|_| {
            x = step(&x, gas, params);
            heat_output(&x, params)
        })
        .collect()
}

/// Shift every component by `delta_heat / sum(b)`; moves the heat output by
/// exactly `delta_heat`.
pub fn shift_output(
    state: &AugmentedCcgtState,
    delta_heat: f64,
    params: &ArmaParams,
) -> Result<AugmentedCcgtState> {
    let sum_b = params.ma_sum();
    if sum_b == 0.0 {
        return Err(Error::param(
            "arma.ma",
            "cannot shift output when sum(b) = 0",
        ));
    }
    let d = delta_heat / sum_b;
    let mut out = state.0;
    out.iter_mut().for_each(|v| *v += d);
    Ok(AugmentedCcgtState(out))
}

/// One-period lifted dynamics under piecewise-constant gas:
/// `x(end) = A_delta x(start) + B_delta g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodLift {
    pub a_delta: Mat7,
    pub b_delta: Vec7,
    output: Vec7,
    /// Row mapping the start state to the mean of the period's samples.
    avg_state: Vec7,
    avg_gas: f64,
    samples: usize,
}

/// Composition of [`step`] over one period, as matrices.
pub fn build_period_lift(params: &ArmaParams) -> PeriodLift {
    let a_s = params.step_matrix();
    let mut b_s = Vec7::zeros();
    b_s[AUG_DIM - 1] = 1.0;
    let c = params.output_row();
    let n = params.samples_per_period;

    // a_pow = A_s^k, b_acc = sum_{i<k} A_s^i B_s after k samples
    let mut a_pow = Mat7::identity();
    let mut b_acc = Vec7::zeros();
    let mut avg_state = Vec7::zeros();
    let mut avg_gas = 0.0;
    for _ in 0..n {
        b_acc = a_s * b_acc + b_s;
        a_pow = a_s * a_pow;
        avg_state += a_pow.transpose() * c;
        avg_gas += c.dot(&b_acc);
    }
    let lift = PeriodLift {
        a_delta: a_pow,
        b_delta: b_acc,
        output: c,
        avg_state: avg_state / n as f64,
        avg_gas: avg_gas / n as f64,
        samples: n,
    };
    debug_assert!(lift.matches_step_composition(params, 1e-9));
    lift
}

impl PeriodLift {
    pub fn apply(&self, state: &AugmentedCcgtState, gas: f64) -> AugmentedCcgtState {
        AugmentedCcgtState::from_vector(&(self.a_delta * state.as_vector() + self.b_delta * gas))
    }

    /// End-of-period heat as `constant + gas_coeff * gas`.
    pub fn end_heat_affine(&self, state: &AugmentedCcgtState) -> (f64, f64) {
        let x = state.as_vector();
        (
            self.output.dot(&(self.a_delta * x)),
            self.output.dot(&self.b_delta),
        )
    }

    /// Period-average heat as `constant + gas_coeff * gas`.
    pub fn mean_heat_affine(&self, state: &AugmentedCcgtState) -> (f64, f64) {
        (self.avg_state.dot(&state.as_vector()), self.avg_gas)
    }

    pub fn end_heat(&self, state: &AugmentedCcgtState, gas: f64) -> f64 {
        let (c0, c1) = self.end_heat_affine(state);
        c0 + c1 * gas
    }

    pub fn output_row(&self) -> &Vec7 {
        &self.output
    }

    /// Row and gas coefficient of the period-mean heat.
    pub fn mean_heat_row(&self) -> (&Vec7, f64) {
        (&self.avg_state, self.avg_gas)
    }

    pub fn samples_per_period(&self) -> usize {
        self.samples
    }

    /// Heat `k` periods after a unit of gas in period 0, measured at the end of
    /// each period: `c A_delta^k B_delta`.
    pub fn impulse_response(&self, periods: usize) -> Vec<f64> {
        let mut v = self.b_delta;
        let mut out = Vec::with_capacity(periods);
        for _ in 0..periods {
            out.push(self.output.dot(&v));
            v = self.a_delta * v;
        }
        out
    }

    /// Checks the lifted matrices against explicit stepping from each unit
    /// basis state and from the zero state with unit gas.
    pub fn matches_step_composition(&self, params: &ArmaParams, tol: f64) -> bool {
        let run =
            |x0: AugmentedCcgtState, g: f64| (0..self.samples).fold(x0, |x, _| step(&x, g, params));
        let gas_ok = {
            let end = run(AugmentedCcgtState::zero(), 1.0);
            (end.as_vector() - self.b_delta).amax() <= tol
        };
        gas_ok
            && (0..AUG_DIM).all(|j| {
                let mut e = [0.0; AUG_DIM];
                e[j] = 1.0;
                let end = run(AugmentedCcgtState(e), 0.0);
                (end.as_vector() - self.a_delta.column(j)).amax() <= tol
            })
    }
}
