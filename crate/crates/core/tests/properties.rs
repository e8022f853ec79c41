//! Randomized invariants: properties that must hold for arbitrary admissible
//! inputs, not just the hand-picked fixtures.

use mixfrac::fracquad::{abel_weights, caputo_l1};
use mixfrac::hyperbolic::{integrate_linear, interp};
use mixfrac::oracle::fd_solve;
use mixfrac::specfun::{wright_decay_bound, wright_e, WrightParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn caputo_l1_exact_on_affine(a in -5.0f64..5.0, b in -5.0f64..5.0,
                                 lambda in 0.1f64..1.0, n in 4usize..64) {
        let h = 1.0 / n as f64;
        let g: Vec<f64> = (0..=n).map(|k| a + b * k as f64 * h).collect();
        let d = caputo_l1(&g, h, lambda).unwrap();
        // D^lambda (a + b y) = b y^{1-lambda} / Gamma(2 - lambda)
        let gamma2 = statrs::function::gamma::gamma(2.0 - lambda);
        for k in 1..=n {
            let y = k as f64 * h;
            let want = b * y.powf(1.0 - lambda) / gamma2;
            prop_assert!((d[k] - want).abs() <= 1e-11 * (1.0 + want.abs()),
                "node {k}: {} vs {want}", d[k]);
        }
    }

    #[test]
    fn abel_weights_reproduce_constants(rho in 0.05f64..0.95, n in 2usize..128) {
        let h = 1.0 / n as f64;
        let w = abel_weights(n, h, rho).unwrap();
        let total: f64 = w.weights.iter().sum();
        let want = 1.0f64.powf(1.0 - rho) / (1.0 - rho);
        prop_assert!((total - want).abs() <= 1e-13 * want,
            "sum {total} vs {want} at rho={rho}, n={n}");
    }

    #[test]
    fn wright_values_respect_decay_bound(rho in 0.1f64..0.45, r in 0.1f64..20.0) {
        let p = WrightParams::new(1.0, rho, 1.0, 1.0);
        let v = wright_e(&p, -r, 1e-13, 30.0).unwrap();
        prop_assert!(v.abs() <= wright_decay_bound(rho, r) + 1e-12,
            "value {v} exceeds bound at rho={rho}, r={r}");
    }

    #[test]
    fn linear_interp_integral_is_trapezoid(vals in prop::collection::vec(-3.0f64..3.0, 2..40)) {
        let n = vals.len() - 1;
        let h = 1.0 / n as f64;
        let whole = integrate_linear(&vals, 0.0, 1.0);
        let trap: f64 = (0..n).map(|k| 0.5 * h * (vals[k] + vals[k + 1])).sum();
        prop_assert!((whole - trap).abs() <= 1e-12);
        // additivity over a random split point
        let mid = 0.37;
        let split = integrate_linear(&vals, 0.0, mid) + integrate_linear(&vals, mid, 1.0);
        prop_assert!((whole - split).abs() <= 1e-12);
        // orientation
        prop_assert!((integrate_linear(&vals, 1.0, 0.0) + whole).abs() <= 1e-12);
    }

    #[test]
    fn interp_stays_within_sample_hull(vals in prop::collection::vec(-3.0f64..3.0, 2..40),
                                       s in 0.0f64..1.0) {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let v = interp(&vals, s);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }
}

proptest! {
    // the implicit march is the expensive case; fewer cases suffice
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn classical_fd_obeys_maximum_principle(seedl in -2.0f64..2.0, seedr in -2.0f64..2.0,
                                            amp in 0.0f64..2.0) {
        // lambda = 1: implicit Euler + central differences is monotone, so
        // the solution stays inside the extremes of its initial/boundary data
        let init = move |x: f64| amp * (3.1 * x).sin();
        let left = move |y: f64| seedl * (1.0 - (-2.0 * y).exp());
        let right = move |y: f64| seedr * y;
        let s = fd_solve(1.0, 24, 48, init, left, right, |_, _| 0.0).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=24 {
            let x = i as f64 / 24.0;
            lo = lo.min(init(x));
            hi = hi.max(init(x));
        }
        for k in 0..=48 {
            let y = k as f64 / 48.0;
            for v in [left(y), right(y)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        for row in &s.u {
            for &v in row {
                prop_assert!(v >= lo - 1e-10 && v <= hi + 1e-10,
                    "value {v} escapes data hull [{lo}, {hi}]");
            }
        }
    }
}
