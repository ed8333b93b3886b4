//! What a memoryless CCGT model schedules, against the dynamic one: the
//! static model lets heat jump between periods.
//!
//! ```bash
//! cargo run --release --example static_vs_dynamic
//! ```

use chp_dispatch::baselines::{full_horizon_milp, max_consecutive_jump, static_hub_variant};
use chp_dispatch::config::Config;

/// Returns the largest sample-to-sample heat jump `(dynamic, static)`, MW.
pub fn run_example() -> chp_dispatch::Result<(f64, f64)> {
    let config = Config::default();
    let plant = config.plant()?;
    let day = config.evaluation_set(1)?.realized(0);
    let mode = config.milp_mode();

    let dynamic = full_horizon_milp(&plant, &day, mode)?;
    let fixed = static_hub_variant(&plant, &day, mode)?;
    let jd = max_consecutive_jump(&dynamic.trajectory.heat_trace);
    let js = max_consecutive_jump(&fixed.heat_trace);
    println!(
        "dynamic model: cost {:.2} $, largest heat jump {jd:.3} MW",
        dynamic.trajectory.total_cost
    );
    println!(
        "static model:  cost {:.2} $, largest heat jump {js:.3} MW",
        fixed.program.stage_cost
    );
    Ok((jd, js))
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
