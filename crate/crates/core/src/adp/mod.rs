//! Piecewise-linear value function approximation of the post-decision CCGT
//! heat, trained by forward simulation with harmonic smoothing and SPAR.

mod trainer;
mod vfa;

pub use trainer::{sample_marginal, train, ConvergenceTrace, IterationRecord, TrainingConfig};
pub use vfa::{
    evaluate_vfa, spar_project, update_slope, PiecewiseLinearVfa, StepsizeRule, VfaRow,
    VFA_FORMAT_VERSION,
};
