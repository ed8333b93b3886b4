//! Myopic, value-function and receding-horizon policies on common days.
//!
//! ```bash
//! cargo run --release --example compare_policies
//! ```

use chp_dispatch::adp::train;
use chp_dispatch::config::Config;
use chp_dispatch::harness::{run_policy, summarize, PolicyKind};

/// Returns mean costs in the order myopic, adp, mpc.
pub fn run_example() -> chp_dispatch::Result<Vec<f64>> {
    let config = Config::default();
    let plant = config.plant()?;
    let (vfa, _) = train(&config.training_config(), &config.training_set()?, &plant)?;
    let days = 4;
    let set = config.evaluation_set(days)?;

    let mut means = Vec::new();
    for kind in [PolicyKind::Myopic, PolicyKind::Adp, PolicyKind::Mpc] {
        let runs = run_policy(&config, &plant, kind, Some(&vfa), &set, days)?;
        let s = summarize(kind, &runs);
        println!(
            "{:<8} mean {:>9.2} $  std {:>7.2} $  heat shed {:.3} MWh",
            s.policy, s.mean_cost, s.std_cost, s.mean_curtailment.heat
        );
        means.push(s.mean_cost);
    }
    println!(
        "value functions save {:.2}% over myopic",
        100.0 * (means[0] - means[1]) / means[0]
    );
    Ok(means)
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
