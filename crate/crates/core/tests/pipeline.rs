//! Whole-pipeline behavior on generic (non-exact) data: determinism,
//! cross-grid stability, and the shape of the evaluated field.

use mixfrac::{solve_problem, DiscretizationConfig, Func, ProblemSpec};

fn generic_spec(lambda: f64) -> ProblemSpec {
    // smooth data, compatible at the corners: phi1(1) fixes u(1,0), the
    // non-local condition at t = 0 fixes u(0,0)
    ProblemSpec {
        lambda,
        phi1: Func::from_expr("t^2", "t").unwrap(),
        phi2: Func::from_expr("1 + t^2 / 2", "t").unwrap(),
        a1: Func::from_expr("2 + t", "t").unwrap(),
        a2: Func::constant(1.0),
        a3: Func::from_expr("sin(t)", "t").unwrap(),
        coupling: None,
    }
}

#[test]
fn deterministic_across_runs() {
    let config = DiscretizationConfig { n: 32, ..Default::default() };
    let spec = generic_spec(0.7);
    let a = solve_problem(&spec, &config).unwrap();
    let b = solve_problem(&spec, &config).unwrap();
    assert_eq!(a.traces.tau2, b.traces.tau2);
    assert_eq!(a.traces.tau3, b.traces.tau3);
    assert_eq!(a.traces.nu2, b.traces.nu2);
    let pa = a.eval(0.4, 0.6).unwrap().u;
    let pb = b.eval(0.4, 0.6).unwrap().u;
    assert_eq!(pa.to_bits(), pb.to_bits());
}

#[test]
fn traces_stable_under_refinement() {
    let spec = generic_spec(0.6);
    let coarse =
        solve_problem(&spec, &DiscretizationConfig { n: 32, ..Default::default() }).unwrap();
    let fine =
        solve_problem(&spec, &DiscretizationConfig { n: 64, ..Default::default() }).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=32 {
        worst = worst
            .max((coarse.traces.tau2[k] - fine.traces.tau2[2 * k]).abs())
            .max((coarse.traces.tau3[k] - fine.traces.tau3[2 * k]).abs());
    }
    assert!(worst < 5e-3, "trace drift between grids: {worst}");
}

#[test]
fn field_is_continuous_across_interfaces() {
    let spec = generic_spec(0.5);
    let field =
        solve_problem(&spec, &DiscretizationConfig { n: 64, ..Default::default() }).unwrap();
    // walk across the bottom and lateral interfaces with small steps; the
    // piecewise-defined field must not jump
    let eps = 1e-3;
    for k in 1..8 {
        let x = k as f64 / 8.0;
        let above = field.eval(x, eps).unwrap().u;
        let below = field.eval(x, -eps).unwrap().u;
        assert!((above - below).abs() < 0.05, "jump at (x={x}, 0): {above} vs {below}");
    }
    for k in 1..8 {
        let y = k as f64 / 8.0;
        let inside = field.eval(eps, y).unwrap().u;
        let outside = field.eval(-eps, y).unwrap().u;
        assert!((inside - outside).abs() < 0.05, "jump at (0, y={y})");
        let inside = field.eval(1.0 - eps, y).unwrap().u;
        let outside = field.eval(1.0 + eps, y).unwrap().u;
        assert!((inside - outside).abs() < 0.05, "jump at (1, y={y})");
    }
}

#[test]
fn corner_compatibility_is_enforced() {
    // phi1(1) = 1 but the non-local condition pins u(0,0) = sin(0)/(a1+a2):
    // compatible. Break phi2 instead: phi2(0) must equal phi1(1).
    let mut spec = generic_spec(0.6);
    spec.phi2 = Func::from_expr("5 + t", "t").unwrap();
    let config = DiscretizationConfig { n: 32, ..Default::default() };
    // the pipeline itself still runs; the mismatch must show up as a large
    // characteristic residual rather than silent acceptance
    let field = solve_problem(&spec, &config).unwrap();
    let d = mixfrac::verify_conditions(&field).unwrap();
    assert!(
        d.char_right > 0.1,
        "incompatible phi2 should light up the characteristic residual: {}",
        d.report()
    );
}
