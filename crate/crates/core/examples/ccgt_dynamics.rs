//! CCGT heat dynamics: sample-level ARMA recursion, its companion-form state
//! and the per-period lift used by the dispatch programs.
//!
//! ```bash
//! cargo run --example ccgt_dynamics
//! ```

use chp_dispatch::ccgt::{
    arma_reference, build_period_lift, heat_output, step, ArmaParams, AugmentedCcgtState,
};

/// Steps gas from rest and returns the heat at the end of each period.
pub fn run_example() -> chp_dispatch::Result<Vec<f64>> {
    let arma = ArmaParams::default();
    arma.validate()?;
    let gas = 2.0;

    // Companion state against the recursion written out directly.
    let mut x = AugmentedCcgtState::zero();
    let mut heat = [0.0; 4];
    let mut fuel = [0.0; 7];
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        fuel.rotate_right(1);
        fuel[0] = gas;
        let q = arma_reference(&arma, &heat, &fuel);
        heat.rotate_right(1);
        heat[0] = q;
        x = step(&x, gas, &arma);
        worst = worst.max((heat_output(&x, &arma) - q).abs());
    }
    println!("companion form vs recursion over 200 samples: max diff {worst:.2e} MW");

    let lift = build_period_lift(&arma);
    let mut s = AugmentedCcgtState::zero();
    let mut per_period = Vec::new();
    println!("period  heat_mw");
    for t in 1..=8 {
        s = lift.apply(&s, gas);
        let q = heat_output(&s, &arma);
        println!("{t:>6}  {q:>7.3}");
        per_period.push(q);
    }
    println!(
        "gain {:.4} MW per unit gas, settles at {:.3} MW",
        arma.steady_state_gain(),
        arma.steady_state_gain() * gas
    );
    Ok(per_period)
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
