//! Dispatch optimization: the per-period subproblem, the coupled
//! multi-period program with branch-and-bound over storage flags, and an
//! independent constraint auditor.

mod audit;
mod builder;
mod horizon;
mod period;

use crate::ccgt::{build_period_lift, ArmaParams, PeriodLift};
use crate::error::Result;
use crate::model::MicrogridParams;

pub use audit::{audit_decision, audit_trajectory, Violation};
pub use builder::{Expr, HeatModel, PeriodVars, ProgramBuilder};
pub use horizon::{solve_multi_period, BinaryMode, MultiPeriodResult};
pub use period::{build_subproblem, solve_period, solve_period_with_pins, Pins, SubproblemResult};

/// Storage flag setting of one period inside a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagSetting {
    /// Flags relaxed to `[0, 1]`.
    Relaxed,
    Fixed {
        charge: bool,
        discharge: bool,
    },
}

impl FlagSetting {
    /// The three assignments allowed by `u_c + u_d <= 1`, in tie-break order.
    pub const ALL_FIXED: [FlagSetting; 3] = [
        FlagSetting::Fixed {
            charge: false,
            discharge: false,
        },
        FlagSetting::Fixed {
            charge: true,
            discharge: false,
        },
        FlagSetting::Fixed {
            charge: false,
            discharge: true,
        },
    ];
}

/// Validated plant parameters with the precomputed period lift.
#[derive(Debug, Clone)]
pub struct Plant {
    pub params: MicrogridParams,
    pub arma: ArmaParams,
    pub lift: PeriodLift,
}

impl Plant {
    pub fn new(params: MicrogridParams, arma: ArmaParams) -> Result<Self> {
        params.validate()?;
        arma.validate()?;
        let lift = build_period_lift(&arma);
        Ok(Plant { params, arma, lift })
    }

    pub fn dt(&self) -> f64 {
        self.params.dt_hours
    }
}

impl Default for Plant {
    fn default() -> Self {
        Plant::new(MicrogridParams::default(), ArmaParams::default())
            .expect("default parameters are valid")
    }
}
