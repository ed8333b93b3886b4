//! Every example compiles into this test and runs to completion.

#[allow(dead_code)]
#[path = "../examples/ccgt_dynamics.rs"]
mod ccgt_dynamics;

#[allow(dead_code)]
#[path = "../examples/lp_solve.rs"]
mod lp_solve;

#[allow(dead_code)]
#[path = "../examples/period_dispatch.rs"]
mod period_dispatch;

#[allow(dead_code)]
#[path = "../examples/multi_period_milp.rs"]
mod multi_period_milp;

#[allow(dead_code)]
#[path = "../examples/scenarios.rs"]
mod scenarios;

#[allow(dead_code)]
#[path = "../examples/train_vfa.rs"]
mod train_vfa;

#[allow(dead_code)]
#[path = "../examples/compare_policies.rs"]
mod compare_policies;

#[allow(dead_code)]
#[path = "../examples/static_vs_dynamic.rs"]
mod static_vs_dynamic;

#[allow(dead_code)]
#[path = "../examples/run_harness.rs"]
mod run_harness;

#[test]
fn ccgt_dynamics_settles_at_gain_times_gas() {
    let heat = ccgt_dynamics::run_example().unwrap();
    let settled = *heat.last().unwrap();
    assert!((settled - 2.0 * 15.1457).abs() < 1e-3, "{settled}");
    assert!(heat
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 || (w[1] - settled).abs() < 0.1));
}

#[test]
fn lp_solve_finds_known_optimum() {
    // 30 MW at 20 $ plus 20 MW at 45 $.
    assert!((lp_solve::run_example().unwrap() - 1500.0).abs() < 1e-9);
}

#[test]
fn period_dispatch_value_raises_carried_heat() {
    let (myopic, valued) = period_dispatch::run_example().unwrap();
    assert!(valued > myopic + 1.0);
}

#[test]
fn multi_period_milp_relaxation_is_a_bound() {
    let (relaxed, exact) = multi_period_milp::run_example().unwrap();
    assert!(relaxed <= exact + 1e-7);
}

#[test]
fn scenarios_error_is_small_and_nonzero() {
    let mae = scenarios::run_example().unwrap();
    assert!(mae > 0.0 && mae < 5.0);
}

#[test]
fn train_vfa_stops_within_budget() {
    assert!(train_vfa::run_example().unwrap() <= 60);
}

#[test]
fn compare_policies_orders_costs() {
    let m = compare_policies::run_example().unwrap();
    assert!(m[1] < m[0] && m[2] < m[0]);
}

#[test]
fn static_model_jumps_further() {
    let (dynamic, fixed) = static_vs_dynamic::run_example().unwrap();
    assert!(dynamic < fixed);
}

#[test]
fn run_harness_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let files = run_harness::run_example_in(dir.path().to_path_buf()).unwrap();
    for f in [
        "vfa.json",
        "convergence.csv",
        "summary_adp.json",
        "profiles.csv",
    ] {
        assert!(files.iter().any(|x| x == f), "missing {f}");
    }
}
