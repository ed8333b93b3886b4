//! Day-ahead profiles and reproducible realized days around them.
//!
//! ```bash
//! cargo run --example scenarios
//! ```

use chp_dispatch::config::Config;
use chp_dispatch::scenario::write_profiles_csv;

/// Returns the mean absolute electric-demand error of the first scenario, MW.
pub fn run_example() -> chp_dispatch::Result<f64> {
    let config = Config::default();
    let set = config.evaluation_set(3)?;
    let forecast = set.forecast_rows();

    let mut csv = Vec::new();
    write_profiles_csv(&set.forecast, &mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!("profiles.csv (first rows):");
    text.lines().take(4).for_each(|l| println!("  {l}"));

    let realized = set.realized(0);
    println!("period  forecast_e  realized_e  forecast_q  realized_q");
    for t in (0..forecast.len()).step_by(16) {
        println!(
            "{t:>6}  {:>10.2}  {:>10.2}  {:>10.2}  {:>10.2}",
            forecast[t].demand_e, realized[t].demand_e, forecast[t].demand_q, realized[t].demand_q
        );
    }
    // Same seed and index, same day.
    assert_eq!(realized, config.evaluation_set(3)?.realized(0));
    let mae = forecast
        .iter()
        .zip(&realized)
        .map(|(f, r)| (f.demand_e - r.demand_e).abs())
        .sum::<f64>()
        / forecast.len() as f64;
    println!("mean |error| in electric demand: {mae:.3} MW");
    Ok(mae)
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
