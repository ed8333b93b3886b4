//! One period's dispatch subproblem, with and without a value on the CCGT
//! heat carried into the next period, checked by the independent auditor.
//!
//! ```bash
//! cargo run --example period_dispatch
//! ```

use chp_dispatch::config::Config;
use chp_dispatch::dispatch::{audit_decision, solve_period};
use chp_dispatch::model::SystemState;

/// Returns the post-decision CCGT heat without and with a continuation value.
pub fn run_example() -> chp_dispatch::Result<(f64, f64)> {
    let config = Config::default();
    let plant = config.plant()?;
    let forecast = config.forecast()?;
    let state = SystemState::initial(&plant.params, &plant.arma, &forecast.row(8));
    let segments = config.training.segments;

    let myopic = solve_period(&plant, &state, &vec![0.0; segments])?;
    // Decreasing slopes: heat carried forward is worth more when it is scarce.
    let valued: Vec<f64> = (0..segments).map(|a| -60.0 + 1.5 * a as f64).collect();
    let ahead = solve_period(&plant, &state, &valued)?;

    for (name, r) in [("myopic", &myopic), ("valued", &ahead)] {
        let d = &r.decision;
        println!(
            "{name}: gas {:.3}, fc {:.2} MW, grid {:.2} MW, boiler {:.2} MW, heat pump {:.2} MW, \
             next-period CCGT heat {:.2} MW, stage cost {:.2} $",
            d.gas_flow,
            d.fc_power,
            d.grid_power,
            d.gb_heat,
            d.hp_heat,
            r.post_decision_heat,
            r.stage_cost
        );
        let v = audit_decision(&plant, &state, d);
        println!("  audit: {} violations", v.len());
        if let Some(first) = v.first() {
            return Err(chp_dispatch::Error::Numerical(format!(
                "audit failed: {first:?}"
            )));
        }
    }
    Ok((myopic.post_decision_heat, ahead.post_decision_heat))
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
