//! The bounded simplex solver on a small production-planning program.
//!
//! ```bash
//! cargo run --example lp_solve
//! ```

use chp_dispatch::lp::{solve_lp, write_lp_format, LinearProgram, Sense};

/// Returns the optimal objective.
pub fn run_example() -> chp_dispatch::Result<f64> {
    // Two units cover a 50 MW demand; the cheap one ramps only to 30 MW.
    let mut lp = LinearProgram::new();
    let cheap = lp.add_var("cheap", 0.0, 30.0, 20.0);
    let dear = lp.add_var("dear", 5.0, 40.0, 45.0);
    let shed = lp.add_var("shed", 0.0, f64::INFINITY, 500.0);
    lp.add_row(
        "demand",
        vec![(cheap, 1.0), (dear, 1.0), (shed, 1.0)],
        Sense::Eq,
        50.0,
    );
    lp.add_range("mix", vec![(cheap, 1.0), (dear, -1.0)], -10.0, 20.0);
    print!("{}", write_lp_format(&lp));

    let sol = solve_lp(&lp)?.into_result()?;
    println!(
        "cheap {:.1} MW, dear {:.1} MW, shed {:.1} MW, cost {:.1} $/h after {} pivots",
        sol.value(cheap),
        sol.value(dear),
        sol.value(shed),
        sol.objective,
        sol.iterations
    );
    Ok(sol.objective)
}

#[allow(dead_code)]
fn main() -> chp_dispatch::Result<()> {
    run_example().map(|_| ())
}
