//! Invariants over randomized inputs.

use proptest::prelude::*;

use chp_dispatch::adp::{
    evaluate_vfa, spar_project, update_slope, PiecewiseLinearVfa, StepsizeRule, VfaRow,
};
use chp_dispatch::ccgt::{
    build_period_lift, heat_output, shift_output, step, ArmaParams, AugmentedCcgtState,
};
use chp_dispatch::config::Config;
use chp_dispatch::lp::{solve_lp, LinearProgram, Sense};

fn slopes_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn spar_restores_order_and_keeps_the_sum(mut v in slopes_strategy(), pick in any::<prop::sample::Index>(), new in -200.0..200.0f64) {
        v.sort_by(f64::total_cmp);
        let idx = pick.index(v.len());
        v[idx] = new;
        let before: f64 = v.iter().sum();
        spar_project(&mut v, idx);
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let after: f64 = v.iter().sum();
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs()));
    }

    #[test]
    fn updated_value_functions_stay_convex(
        updates in prop::collection::vec((0usize..35, -300.0..300.0f64), 1..200),
        probes in prop::collection::vec((15.0..50.0f64, 15.0..50.0f64, 0.0..1.0f64), 20),
    ) {
        let rule = StepsizeRule::default();
        let mut vfa = PiecewiseLinearVfa::zero(2, 15.0, 50.0, 35);
        for (n, &(a, obs)) in updates.iter().enumerate() {
            update_slope(&mut vfa, 0, a, obs, n + 1, &rule).unwrap();
        }
        prop_assert!(vfa.is_monotone());
        let row: &VfaRow = &vfa.rows[0];
        for &(x, y, l) in &probes {
            let m = l * x + (1.0 - l) * y;
            let lhs = evaluate_vfa(row, m).unwrap();
            let rhs = l * evaluate_vfa(row, x).unwrap() + (1.0 - l) * evaluate_vfa(row, y).unwrap();
            prop_assert!(lhs <= rhs + 1e-7 * (1.0 + rhs.abs()), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn stepsize_starts_at_one_and_decreases(a_h in 0.01..1000.0f64, n in 1usize..10_000) {
        let rule = StepsizeRule { a_h };
        prop_assert_eq!(rule.alpha(1), 1.0);
        let (now, next) = (rule.alpha(n), rule.alpha(n + 1));
        prop_assert!(now > 0.0 && now <= 1.0);
        prop_assert!(next < now);
    }

    #[test]
    fn lifted_period_matches_sample_steps(x in prop::array::uniform7(-5.0..5.0f64), gas in 0.9..3.4f64) {
        let arma = ArmaParams::default();
        let lift = build_period_lift(&arma);
        let start = AugmentedCcgtState(x);
        let mut s = start;
        for _ in 0..arma.samples_per_period {
            s = step(&s, gas, &arma);
        }
        let lifted = lift.apply(&start, gas);
        for k in 0..7 {
            prop_assert!((lifted.0[k] - s.0[k]).abs() <= 1e-9 * (1.0 + s.0[k].abs()));
        }
    }

    #[test]
    fn output_shift_moves_heat_exactly(x in prop::array::uniform7(-5.0..5.0f64), delta in -10.0..10.0f64) {
        let arma = ArmaParams::default();
        let s = AugmentedCcgtState(x);
        let shifted = shift_output(&s, delta, &arma).unwrap();
        let moved = heat_output(&shifted, &arma) - heat_output(&s, &arma);
        prop_assert!((moved - delta).abs() <= 1e-9);
    }

    /// Any feasible point bounds the optimum from above.
    #[test]
    fn lp_optimum_is_feasible_and_no_worse_than_a_known_point(
        n in 1usize..8,
        seed in prop::collection::vec((-5.0..5.0f64, 0.5..6.0f64, -10.0..10.0f64), 8),
        rows in prop::collection::vec((prop::collection::vec(-3.0..3.0f64, 8), 0.0..2.0f64, 0u8..3), 0..5),
    ) {
        let mut lp = LinearProgram::new();
        let x0: Vec<f64> = seed[..n].iter().map(|&(lo, w, _)| lo + 0.5 * w).collect();
        let vars: Vec<_> = seed[..n]
            .iter()
            .enumerate()
            .map(|(j, &(lo, w, c))| lp.add_var(format!("x{j}"), lo, lo + w, c))
            .collect();
        for (i, (a, slack, sense)) in rows.iter().enumerate() {
            let at: f64 = (0..n).map(|j| a[j] * x0[j]).sum();
            let coeffs = (0..n).map(|j| (vars[j], a[j])).collect();
            let (sense, rhs) = match sense {
                0 => (Sense::Le, at + slack),
                1 => (Sense::Ge, at - slack),
                _ => (Sense::Eq, at),
            };
            lp.add_row(format!("r{i}"), coeffs, sense, rhs);
        }
        let sol = solve_lp(&lp).unwrap().into_result().unwrap();
        let (viol, _) = lp.max_violation(&sol.x);
        prop_assert!(viol <= 1e-7, "violation {viol}");
        prop_assert!(sol.objective <= lp.objective_value(&x0) + 1e-7);
        prop_assert!((sol.objective - lp.objective_value(&sol.x)).abs() <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Realized days depend on the seed and scenario index only, not on how
    /// many scenarios are drawn.
    #[test]
    fn scenarios_are_reproducible_and_count_independent(seed in any::<u64>(), k in 0usize..5) {
        let mut config = Config { seed, ..Config::default() };
        let small = config.evaluation_set(5).unwrap();
        let large = config.evaluation_set(12).unwrap();
        prop_assert_eq!(small.realized(k), large.realized(k));
        prop_assert_eq!(small.realized(k), config.evaluation_set(5).unwrap().realized(k));
        config.seed = seed.wrapping_add(1);
        prop_assert_ne!(small.realized(k), config.evaluation_set(5).unwrap().realized(k));
    }
}
