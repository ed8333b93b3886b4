//! Intra-day economic dispatch of a heat-and-power microgrid whose CCGT
//! heat output follows its gas input with a lag.
//!
//! Each module maps to one runnable example under `examples/`:
//!
//! - [`ccgt`]: sample-level heat dynamics and the per-period lift (`ccgt_dynamics`)
//! - [`lp`]: bounded primal simplex (`lp_solve`)
//! - [`dispatch`]: period subproblems, multi-period schedules with
//!   branch-and-bound on storage flags and an independent auditor
//!   (`period_dispatch`, `multi_period_milp`)
//! - [`scenario`]: profiles and reproducible realized days (`scenarios`)
//! - [`adp`]: piecewise-linear value functions of CCGT heat (`train_vfa`)
//! - [`simulate`], [`baselines`]: policies and reference schedules
//!   (`compare_policies`, `static_vs_dynamic`)
//! - [`config`], [`harness`]: TOML configuration and the file-producing
//!   commands behind the `chpd` binary (`run_harness`)

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adp;
pub mod baselines;
pub mod ccgt;
pub mod config;
pub mod dispatch;
pub mod error;
pub mod harness;
pub mod lp;
pub mod model;
pub mod scenario;
pub mod simulate;

pub use error::{Error, Result};
