//! Trains piecewise-linear value functions of the CCGT heat and shows the
//! learned marginal values.
//!
//! ```bash
//! cargo run --release --example train_vfa
//! ```

use chp_dispatch::adp::train;
use chp_dispatch::config::Config;

/// Returns the iteration at which training stopped.
pub fn run_example() -> chp_dispatch::Result<usize> {
    let config = Config::default();
    let plant = config.plant()?;
    let set = config.training_set()?;
    let (vfa, trace) = train(&config.training_config(), &set, &plant)?;

    for r in trace.records.iter().step_by(5) {
        println!(
            "iteration {:>3}  scenario {:>2}  cost {:>9.2} $  slope change {:>8.3}",
            r.iteration, r.scenario, r.total_cost, r.slope_change
        );
    }
    let stopped = trace.records.len();
    match trace.converged_at {
        Some(n) => println!("converged after {n} iterations"),
        None => println!("ran all {stopped} iterations without converging"),
    }
    for period in [20, 40, 64, 80] {
        let s = vfa.slopes(period);
        println!(
            "period {period}: marginal value of CCGT heat from {:.2} to {:.2} $/MW",
            s[0],
            s[s.len() - 1]
        );
    }
    assert!(vfa.is_monotone());
    Ok(stopped)
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
