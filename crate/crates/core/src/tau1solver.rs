//! Closed-form solution of the two-point problem satisfied by the bottom
//! trace tau1(x) = u(x, 0):
//!
//! ```text
//! tau1'' (x) + c tau1'(x) = c g(x),   x in (0, 1),
//! tau1(0) = alpha,  tau1(1) = beta,
//! ```
//!
//! where g carries the characteristic boundary data and c > 0 is the trace
//! coupling constant produced by the fractional transmission relation.
//!
//! Variation of parameters gives
//!
//! ```text
//! tau1(x)  = alpha + kappa (1 - e^{-c x}) / c + I0(x) - E(x),
//! tau1'(x) = kappa e^{-c x} + c E(x),
//! ```
//!
//! with `I0(x) = int_0^x g`, `E(x) = int_0^x e^{-c(x-t)} g(t) dt` and the slope
//! `kappa = tau1'(0)` fixed by the right boundary value.  Both cumulative
//! integrals are accumulated cell by cell with Gauss-Legendre panels, so no
//! large exponentials ever appear even for large c.

use crate::error::{Error, Result};
use crate::fracquad::gl15;

/// Grid solution of the trace problem: values and exact derivative at the
/// nodes x_k = k / n.
#[derive(Debug, Clone)]
pub struct Tau1Solution {
    pub tau1: Vec<f64>,
    pub tau1p: Vec<f64>,
    pub slope0: f64,
}

pub fn solve_tau1(
    g: &dyn Fn(f64) -> Result<f64>,
    c: f64,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<Tau1Solution> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::DegenerateCoefficients(format!(
            "trace coupling constant must be positive and finite, got {c}"
        )));
    }
    if n < 2 {
        return Err(Error::DegenerateGrid("tau1 grid needs >= 2 cells".into()));
    }
    let h = 1.0 / n as f64;
    let fade = (-c * h).exp();

    // cumulative plain and exponentially weighted integrals of g
    let mut i0 = vec![0.0; n + 1];
    let mut e = vec![0.0; n + 1];
    for k in 0..n {
        let a = k as f64 * h;
        let mut cell_plain = 0.0;
        let mut cell_weighted = 0.0;
        let rule = gl15();
        for (&t, &w) in rule.0.iter().zip(rule.1.iter()) {
            let x = a + 0.5 * h * (t + 1.0);
            let gv = g(x)?;
            cell_plain += w * gv;
            // weight relative to the right end of the cell, exponent <= 0
            cell_weighted += w * gv * (-c * (a + h - x)).exp();
        }
        i0[k + 1] = i0[k] + 0.5 * h * cell_plain;
        e[k + 1] = e[k] * fade + 0.5 * h * cell_weighted;
    }

    let denom = -(-c).exp_m1(); // 1 - e^{-c}
    if denom.abs() < 1e-300 {
        return Err(Error::DegenerateCoefficients(
            "trace problem is singular: 1 - e^{-c} vanished".into(),
        ));
    }
    // int_0^1 g(t)(1 - e^{-c(1-t)}) dt = I0(1) - E(1)
    let kappa = c * (beta - alpha - (i0[n] - e[n])) / denom;

    let mut tau1 = vec![0.0; n + 1];
    let mut tau1p = vec![0.0; n + 1];
    for k in 0..=n {
        let x = k as f64 * h;
        let ramp = -(-c * x).exp_m1(); // 1 - e^{-c x}
        tau1[k] = alpha + kappa * ramp / c + i0[k] - e[k];
        tau1p[k] = kappa * (-c * x).exp() + c * e[k];
    }
    Ok(Tau1Solution { tau1, tau1p, slope0: kappa })
}

/// Maximum interior residual |tau1'' + c tau1' - c g| with tau1'' formed by
/// central differences of the exact nodal derivative.
pub fn tau1_residual(
    sol: &Tau1Solution,
    g: &dyn Fn(f64) -> Result<f64>,
    c: f64,
) -> Result<f64> {
    let n = sol.tau1.len() - 1;
    let h = 1.0 / n as f64;
    let mut worst = 0.0f64;
    for k in 1..n {
        let x = k as f64 * h;
        let second = (sol.tau1p[k + 1] - sol.tau1p[k - 1]) / (2.0 * h);
        let r = second + c * sol.tau1p[k] - c * g(x)?;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn linear_solution_is_exact() {
        // g = 1, alpha = 0, beta = 1 -> tau1(x) = x
        let sol = solve_tau1(&|_| Ok(1.0), 1.3, 0.0, 1.0, 64).unwrap();
        for (k, &v) in sol.tau1.iter().enumerate() {
            assert_abs_diff_eq!(v, k as f64 / 64.0, epsilon = 1e-13);
        }
        for &d in &sol.tau1p {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn manufactured_solution() {
        // tau = sin(pi x) + x, c = 2:  g = (tau'' + c tau') / c
        let c = 2.0;
        let exact = |x: f64| (PI * x).sin() + x;
        let exact_p = |x: f64| PI * (PI * x).cos() + 1.0;
        let g = move |x: f64| {
            Ok((-PI * PI * (PI * x).sin() + c * exact_p(x)) / c)
        };
        let n = 128;
        let sol = solve_tau1(&g, c, 0.0, 1.0, n).unwrap();
        for k in 0..=n {
            let x = k as f64 / n as f64;
            assert_abs_diff_eq!(sol.tau1[k], exact(x), epsilon = 1e-10);
            assert_abs_diff_eq!(sol.tau1p[k], exact_p(x), epsilon = 1e-10);
        }
        assert!(tau1_residual(&sol, &g, c).unwrap() < 1e-2);
    }

    #[test]
    fn large_coupling_stays_finite() {
        let sol = solve_tau1(&|x| Ok(x * x), 500.0, 0.5, -0.25, 256).unwrap();
        assert!(sol.tau1.iter().all(|v| v.is_finite()));
        assert!(sol.tau1p.iter().all(|v| v.is_finite()));
        assert_abs_diff_eq!(sol.tau1[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.tau1[256], -0.25, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_tau1(&|_| Ok(0.0), -1.0, 0.0, 0.0, 16).is_err());
        assert!(solve_tau1(&|_| Ok(0.0), f64::NAN, 0.0, 0.0, 16).is_err());
        assert!(solve_tau1(&|_| Ok(0.0), 1.0, 0.0, 0.0, 1).is_err());
    }
}
