//! Fractional-calculus discretizations and weakly singular quadrature.
//!
//! * L1 discretization of the Caputo derivative (exact on affine functions,
//!   reduces to the backward difference quotient at lambda = 1),
//! * product-integration weights for Abel integrals with kernel
//!   (y_n - s)^{-rho},
//! * adaptive Gauss-Legendre quadrature (open rule: no endpoint evaluation),
//! * a doubly-singular integrator for integrals of the form
//!   `int_0^y y1^{-lambda} (y - y1)^{rho-1} F(y1) dy1`
//!   with smooth F, using power substitutions that flatten both endpoint
//!   singularities exactly.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;
use std::sync::OnceLock;

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on the
/// recurrence (deterministic, accurate to ~1e-15).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg_attr(not(test), allow(dead_code))]
fn gl7() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(7))
}

pub(crate) fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(15))
}

fn gl_apply<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Adaptive Gauss-Legendre quadrature of `f` over [a, b] to absolute tolerance
/// `tol` (per-panel tolerance is distributed by panel length). The rule never
/// evaluates at a or b, so integrable endpoint behaviour is permitted.
///
/// A panel budget bounds the work: integrands with a noise floor (e.g. from
/// truncated series evaluations) can never satisfy a tolerance below
/// noise * width no matter how far the bisection goes, so once the budget is
/// spent remaining panels are accepted as-is. The result is then still
/// accurate to roughly the integrand's own noise level.
pub fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_gl_noisy(f, a, b, tol, 0.0)
}

/// `adaptive_gl` for integrands carrying an absolute evaluation noise floor
/// (e.g. truncated series with cancellation). A panel whose refinement error
/// is below `noise * width` is indistinguishable from converged and is
/// accepted; without this the bisection tree explodes whenever `tol` is
/// below what the integrand can physically deliver.
pub fn adaptive_gl_noisy<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    noise: f64,
) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::DegenerateTime(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        noise: f64,
        whole: f64,
        depth: usize,
        budget: &mut u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl_apply(f, a, m, gl15());
        let right = gl_apply(f, m, b, gl15());
        let err = (left + right - whole).abs();
        if err <= tol.max(noise * (b - a)) || depth >= 48 || *budget == 0 {
            return left + right;
        }
        *budget -= 1;
        rec(f, a, m, 0.5 * tol, noise, left, depth + 1, budget)
            + rec(f, m, b, 0.5 * tol, noise, right, depth + 1, budget)
    }
    // Start from a modest uniform partition so narrow features away from the
    // panel midlines are not invisible to the first error estimate.
    let mut budget: u32 = 2000;
    let mut total = 0.0;
    let k = 16usize;
    for i in 0..k {
        let pa = a + (b - a) * i as f64 / k as f64;
        let pb = a + (b - a) * (i + 1) as f64 / k as f64;
        let whole = gl_apply(f, pa, pb, gl15());
        total += rec(f, pa, pb, tol / k as f64, noise, whole, 0, &mut budget);
    }
    Ok(total)
}

/// L1 discretization of the Caputo derivative of order lambda in (0,1] of the
/// samples `g` on the uniform grid y_k = k h. Output value at node 0 is 0.
///
/// At lambda = 1 this is the backward difference quotient. For lambda < 1 the
/// scheme is exact on affine functions of y.
pub fn caputo_l1(g: &[f64], h: f64, lambda: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || g.len() < 2 {
        return Err(Error::DegenerateGrid(format!(
            "caputo_l1 needs h > 0 and at least two samples, got h={h}, len={}",
            g.len()
        )));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidProblem(format!(
            "caputo_l1 expects lambda in (0,1], got {lambda}"
        )));
    }
    let n = g.len();
    let mut out = vec![0.0; n];
    if lambda == 1.0 {
        for k in 1..n {
            out[k] = (g[k] - g[k - 1]) / h;
        }
        return Ok(out);
    }
    let e = 1.0 - lambda;
    // a_j = (j+1)^{1-lambda} - j^{1-lambda}
    let a: Vec<f64> = (0..n).map(|j| ((j + 1) as f64).powf(e) - (j as f64).powf(e)).collect();
    let scale = h.powf(-lambda) / gamma(2.0 - lambda);
    for k in 1..n {
        let mut s = 0.0;
        for j in 1..=k {
            s += a[k - j] * (g[j] - g[j - 1]);
        }
        out[k] = scale * s;
    }
    Ok(out)
}

/// Product-integration weights for the Abel integral
/// `int_0^{y_n} (y_n - s)^{-rho} m(s) ds ~= sum_k w_k m(s_k)`
/// with the density treated as constant on each cell `[y_k, y_{k+1}]`
/// (evaluated at the midpoint s_k = (k + 1/2) h).
#[derive(Debug, Clone)]
pub struct SingularWeights {
    pub n: usize,
    pub h: f64,
    pub rho: f64,
    /// w_k for k = 0..n-1
    pub weights: Vec<f64>,
}

pub fn abel_weights(n: usize, h: f64, rho: f64) -> Result<SingularWeights> {
    if n == 0 || !(h > 0.0) {
        return Err(Error::DegenerateGrid(format!(
            "abel_weights needs n >= 1 and h > 0, got n={n}, h={h}"
        )));
    }
    if !(rho >= 0.0 && rho < 1.0) {
        return Err(Error::InvalidProblem(format!(
            "abel_weights expects rho in [0,1), got {rho}"
        )));
    }
    let e = 1.0 - rho;
    let he = h.powf(e);
    let weights = (0..n)
        .map(|k| {
            let j = (n - k) as f64; // distance from the cell's left edge to y_n, in cells
            he * (j.powf(e) - (j - 1.0).powf(e)) / e
        })
        .collect();
    Ok(SingularWeights { n, h, rho, weights })
}

/// `int_0^y y1^{-lambda} (y-y1)^{rho-1} F(y1, y-y1) dy1` for smooth bounded F,
/// lambda in (0,1), rho in (0,1).
///
/// Split at y/2; on [0, y/2] substitute y1 = v^{1/(1-lambda)} and on [y/2, y]
/// substitute y - y1 = s^{1/rho}; both substitutions remove the endpoint
/// singularity exactly, leaving smooth integrands for the adaptive rule.
///
/// F receives the distance y - y1 as a second argument, carried exactly
/// through the upper substitution. Near y1 = y the distance s^{1/rho} drops
/// below the spacing of floats around y while still mattering (its rho-th
/// power does not vanish), so recomputing it as y - y1 inside F would round
/// to zero over a visible slice of the transformed interval.
pub fn quad_double_singular<F: Fn(f64, f64) -> f64>(
    f: &F,
    y: f64,
    lambda: f64,
    rho: f64,
    tol: f64,
) -> Result<f64> {
    quad_double_singular_noisy(f, y, lambda, rho, tol, 0.0)
}

/// `quad_double_singular` with an absolute noise floor on F (see
/// [`adaptive_gl_noisy`]). The floor is rescaled by the substitution
/// jacobians so it bounds the transformed integrands' noise.
pub fn quad_double_singular_noisy<F: Fn(f64, f64) -> f64>(
    f: &F,
    y: f64,
    lambda: f64,
    rho: f64,
    tol: f64,
    noise: f64,
) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::DegenerateTime(format!("upper limit must be positive, got {y}")));
    }
    if !(lambda > 0.0 && lambda < 1.0 && rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidProblem(format!(
            "quad_double_singular expects lambda, rho in (0,1), got lambda={lambda}, rho={rho}"
        )));
    }
    let half = 0.5 * y;
    // lower part: y1 = v^p, p = 1/(1-lambda); integrand p (y-y1)^{rho-1} F(y1)
    let p = 1.0 / (1.0 - lambda);
    let lower = {
        let vmax = half.powf(1.0 - lambda);
        let g = |v: f64| {
            let y1 = v.powf(p);
            p * (y - y1).powf(rho - 1.0) * f(y1, y - y1)
        };
        // jacobian bound on [0, y/2]: p (y/2)^{rho-1}
        let jn = noise * p * half.powf(rho - 1.0);
        adaptive_gl_noisy(&g, 0.0, vmax, 0.5 * tol, jn)?
    };
    // upper part: y - y1 = s^q, q = 1/rho; integrand q y1^{-lambda} F(y1)
    let q = 1.0 / rho;
    let upper = {
        let smax = half.powf(rho);
        let g = |s: f64| {
            let d = s.powf(q);
            let y1 = y - d;
            q * y1.powf(-lambda) * f(y1, d)
        };
        let jn = noise * q * half.powf(-lambda);
        adaptive_gl_noisy(&g, 0.0, smax, 0.5 * tol, jn)?
    };
    Ok(lower + upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use statrs::function::gamma::gamma;

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // GL15 integrates degree-29 polynomials exactly
        let f = |x: f64| x.powi(28) + 3.0 * x.powi(13) - x;
        let got = gl_apply(&f, -1.0, 1.0, gl15());
        assert_abs_diff_eq!(got, 2.0 / 29.0, epsilon = 1e-14);
        let g7 = gl_apply(&|x: f64| x.powi(12), -1.0, 1.0, gl7());
        assert_abs_diff_eq!(g7, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_gl_smooth_and_peaked() {
        let got = adaptive_gl(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_abs_diff_eq!(got, 2.0, epsilon = 1e-11);
        // sharp peak
        let got = adaptive_gl(&|x: f64| (-(x - 0.3137).powi(2) / 1e-6).exp(), 0.0, 1.0, 1e-12)
            .unwrap();
        let want = 1e-3 * std::f64::consts::PI.sqrt();
        assert_abs_diff_eq!(got, want, epsilon = 1e-11);
    }

    #[test]
    fn caputo_l1_exact_on_affine() {
        // D^lambda (a + b y) = b y^{1-lambda} / Gamma(2-lambda), exactly under L1
        let h = 1.0 / 64.0;
        let lambda = 0.6;
        let (a, b) = (0.7, -1.3);
        let g: Vec<f64> = (0..65).map(|k| a + b * (k as f64) * h).collect();
        let d = caputo_l1(&g, h, lambda).unwrap();
        for k in 1..65 {
            let y = k as f64 * h;
            let want = b * y.powf(1.0 - lambda) / gamma(2.0 - lambda);
            assert_abs_diff_eq!(d[k], want, epsilon = 1e-14);
        }
    }

    #[test]
    fn caputo_l1_classical_limit() {
        let h = 0.25;
        let g = [1.0, 2.0, 4.0, 8.0];
        let d = caputo_l1(&g, h, 1.0).unwrap();
        assert_eq!(d[0], 0.0);
        assert_abs_diff_eq!(d[1], 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], 16.0, epsilon = 1e-15);
    }

    #[test]
    fn caputo_l1_quadratic_convergence_order() {
        // error on g = y^2 should shrink at order 2 - lambda
        let lambda = 0.5;
        let errs: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let h = 1.0 / n as f64;
                let g: Vec<f64> = (0..=n).map(|k| ((k as f64) * h).powi(2)).collect();
                let d = caputo_l1(&g, h, lambda).unwrap();
                let exact = |y: f64| 2.0 * y.powf(2.0 - lambda) / gamma(3.0 - lambda);
                (1..=n)
                    .map(|k| (d[k] - exact(k as f64 * h)).abs())
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let order = (errs[0] / errs[2]).log2() / 2.0;
        assert!(order > 1.3, "observed order {order}, errors {errs:?}");
    }

    #[test]
    fn abel_weights_sum_and_limits() {
        let n = 32;
        let h = 1.0 / n as f64;
        for &rho in &[1e-9, 0.25, 0.5, 0.75] {
            let w = abel_weights(n, h, rho).unwrap();
            assert!(w.weights.iter().all(|&x| x > 0.0));
            let total: f64 = w.weights.iter().sum();
            let want = 1.0f64.powf(1.0 - rho) / (1.0 - rho);
            assert_abs_diff_eq!(total, want, epsilon = 1e-12);
        }
        // rho -> 0 limit: every weight is h
        let w = abel_weights(8, 0.125, 0.0).unwrap();
        for wk in &w.weights {
            assert_abs_diff_eq!(*wk, 0.125, epsilon = 1e-14);
        }
    }

    #[test]
    fn abel_weights_reproduce_power_integral() {
        // int_0^1 (1-s)^{-rho} ds with m = 1 must match exactly; with m = s the
        // midpoint rule has O(h^2) error
        let n = 256;
        let h = 1.0 / n as f64;
        let rho = 0.5;
        let w = abel_weights(n, h, rho).unwrap();
        let with_linear: f64 = w
            .weights
            .iter()
            .enumerate()
            .map(|(k, wk)| wk * (k as f64 + 0.5) * h)
            .sum();
        // int_0^1 (1-s)^{-1/2} s ds = B(2, 1/2) = 4/3; the midpoint density is
        // O(h^2) away from the singular end but the last cell alone contributes
        // an O(h^{3/2}) defect, which dominates.
        let h32 = h.powf(1.5);
        assert!((with_linear - 4.0 / 3.0).abs() < h32, "err {}", (with_linear - 4.0 / 3.0).abs());
    }

    #[test]
    fn double_singular_beta_function() {
        // F = 1:  int_0^y y1^{-lambda} (y-y1)^{rho-1} dy1 = y^{rho-lambda} B(1-lambda, rho)
        for &(lambda, rho, y) in &[(0.5, 0.25, 1.0), (0.3, 0.15, 0.7), (0.8, 0.4, 0.31)] {
            let got = quad_double_singular(&|_, _| 1.0, y, lambda, rho, 1e-12).unwrap();
            let want =
                y.powf(rho - lambda) * gamma(1.0 - lambda) * gamma(rho) / gamma(1.0 - lambda + rho);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs(),
                "beta test failed lambda={lambda} rho={rho} y={y}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn double_singular_smooth_factor() {
        // F = y1: shifts the beta parameters
        let (lambda, rho, y) = (0.6, 0.3, 0.9);
        let got = quad_double_singular(&|y1, _| y1, y, lambda, rho, 1e-12).unwrap();
        let want =
            y.powf(1.0 + rho - lambda) * gamma(2.0 - lambda) * gamma(rho) / gamma(2.0 - lambda + rho);
        assert!((got - want).abs() <= 1e-10 * want.abs());
    }
}
