//! The reduced system for the lateral boundary traces.
//!
//! Eliminating the wave-region solutions and the interior representation
//! leaves a 2x2 system of weakly singular Volterra equations for the trace
//! derivatives m2 = tau2', m3 = tau3':
//!
//! ```text
//! m2(y) + int_0^y m2 K1(y-y1) dy1 - int_0^y m3 K2(y-y1) dy1 = f1(y)
//! m3(y) + int_0^y m3 K1(y-y1) dy1 - int_0^y m2 K2(y-y1) dy1 = f2(y)
//! ```
//!
//! K1 carries an Abel-type (y-y1)^{-rho} singularity; K2 is smooth. The
//! right-hand sides combine the nonlocal condition (through the derivative of
//! its resolved form) with the initial-trace flux contributions GT1/GT2 at
//! the two lateral edges.
//!
//! Discretization: product integration on the uniform grid, with the density
//! taken as the cell average (m_k + m_{k+1})/2 -- exact Abel weights for the
//! singular part, midpoint values for the smooth parts. Every step solves a
//! 2x2 linear system; the scheme is O(h^{2-rho}).

use crate::error::{Error, Result};
use crate::func::Func;
use crate::greens::GreensKernels;

/// Everything the trace march consumes from earlier pipeline stages.
pub struct TraceSystem<'a> {
    pub kernels: &'a GreensKernels,
    /// initial trace tau1 and its derivative on the uniform grid over [0,1]
    pub tau1: &'a [f64],
    pub tau1p: &'a [f64],
    /// transmission flux on the same grid
    pub nu1: &'a [f64],
    /// nonlocal-condition coefficients, evaluated at s = y/2
    pub a1: &'a Func,
    pub a2: &'a Func,
    pub a3: &'a Func,
    /// right characteristic datum; only its derivative enters here
    pub phi2: &'a Func,
    /// corner value tau3(0), i.e. the left characteristic datum at s = 1
    pub tau30: f64,
}

/// Lateral traces and fluxes produced by the march.
#[derive(Debug, Clone)]
pub struct TraceSolution {
    pub h: f64,
    pub tau20: f64,
    pub tau30: f64,
    pub mu2: Vec<f64>,
    pub mu3: Vec<f64>,
    pub tau2: Vec<f64>,
    pub tau3: Vec<f64>,
    pub nu2: Vec<f64>,
    pub nu3: Vec<f64>,
    /// assembled right-hand sides, kept for diagnostics
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

/// Cumulative trapezoid of uniform samples; out[0] = 0.
fn cumtrapz(v: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for k in 1..v.len() {
        out[k] = out[k - 1] + 0.5 * h * (v[k - 1] + v[k]);
    }
    out
}

/// Product-integration convolution `int_0^{y_j} m(y1) K(y_j - y1) dy1` for
/// all j, with per-lag weights `w[m] ~ int_{cell} K` and cell-average density.
fn pconv(mu: &[f64], w: &[f64]) -> Vec<f64> {
    let n = mu.len() - 1;
    let mut out = vec![0.0; n + 1];
    for j in 1..=n {
        let mut s = 0.0;
        for k in 0..j {
            s += w[j - k] * 0.5 * (mu[k] + mu[k + 1]);
        }
        out[j] = s;
    }
    out
}

/// One-lag-at-a-time march of the coupled pair. `k1w[m]`/`k2w[m]` are the
/// integrated kernel weights over the cell at lag m (index 0 unused);
/// initial values are the analytic y -> 0 limits of the right-hand sides.
/// Public so convergence studies can drive it with manufactured right-hand
/// sides directly.
pub fn march(
    k1w: &[f64],
    k2w: &[f64],
    f1: &[f64],
    f2: &[f64],
    mu20: f64,
    mu30: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = f1.len() - 1;
    let mut mu2 = vec![0.0; n + 1];
    let mut mu3 = vec![0.0; n + 1];
    mu2[0] = mu20;
    mu3[0] = mu30;
    for j in 1..=n {
        // known part of history: all cells, with the last cell's unknown
        // endpoint split off
        let mut h2 = 0.0; // int m2 K1 without the mu2[j] share
        let mut g2 = 0.0; // int m2 K2 without the mu2[j] share
        let mut h3 = 0.0;
        let mut g3 = 0.0;
        for k in 0..j {
            let d2 = if k + 1 == j { 0.5 * mu2[k] } else { 0.5 * (mu2[k] + mu2[k + 1]) };
            let d3 = if k + 1 == j { 0.5 * mu3[k] } else { 0.5 * (mu3[k] + mu3[k + 1]) };
            h2 += k1w[j - k] * d2;
            g2 += k2w[j - k] * d2;
            h3 += k1w[j - k] * d3;
            g3 += k2w[j - k] * d3;
        }
        // [1 + w1/2,   -w2/2] [mu2_j]   [f1_j - h2 + g3]
        // [ -w2/2,  1 + w1/2] [mu3_j] = [f2_j - h3 + g2]
        let a = 1.0 + 0.5 * k1w[1];
        let b = -0.5 * k2w[1];
        let r1 = f1[j] - h2 + g3;
        let r2 = f2[j] - h3 + g2;
        let det = a * a - b * b;
        mu2[j] = (a * r1 - b * r2) / det;
        mu3[j] = (a * r2 - b * r1) / det;
    }
    (mu2, mu3)
}

pub fn solve_traces(sys: &TraceSystem) -> Result<TraceSolution> {
    let n = sys.tau1.len() - 1;
    if n < 4 || sys.tau1p.len() != n + 1 || sys.nu1.len() != n + 1 {
        return Err(Error::DegenerateGrid(format!(
            "trace march needs matching grids with at least 4 cells, got {} / {} / {}",
            sys.tau1.len(),
            sys.tau1p.len(),
            sys.nu1.len()
        )));
    }
    let h = 1.0 / n as f64;
    let kern = sys.kernels;
    let rho = kern.rho;

    let denom = sys.a1.eval(0.0)? + sys.a2.eval(0.0)?;
    if denom.abs() < 1e-12 {
        return Err(Error::InvalidProblem(
            "nonlocal coefficients a1 + a2 vanish at y = 0".to_owned(),
        ));
    }
    let tau20 = sys.a3.eval(0.0)? / denom;
    let tau30 = sys.tau30;

    // resolved nonlocal condition and its derivative
    let int_nu1 = cumtrapz(sys.nu1, h);
    let mut rhsp = vec![0.0; n + 1];
    for j in 0..=n {
        let s = 0.5 * j as f64 * h;
        let a = sys.a1.eval(s)?;
        if a.abs() < 1e-12 {
            return Err(Error::InvalidProblem(format!(
                "nonlocal coefficient a1 vanishes at s = {s}"
            )));
        }
        let b = sys.a2.eval(s)?;
        let c = sys.a3.eval(s)?;
        let (ap, bp, cp) = (0.5 * sys.a1.deriv(s)?, 0.5 * sys.a2.deriv(s)?, 0.5 * sys.a3.deriv(s)?);
        let s1 = sys.tau1[0] + sys.tau1[j] - int_nu1[j];
        let s1p = sys.tau1p[j] - sys.nu1[j];
        let rhs = (c - 0.5 * b * s1) / a;
        rhsp[j] = (cp - 0.5 * bp * s1 - 0.5 * b * s1p) / a - rhs * ap / a;
    }

    // initial-trace flux contributions at both edges
    let ys: Vec<f64> = (1..=n).map(|j| j as f64 * h).collect();
    let gt1_pos = kern.gt_edge_table(sys.tau1, &ys)?;
    let rev: Vec<f64> = sys.tau1.iter().rev().cloned().collect();
    let gt2_neg = kern.gt_edge_table(&rev, &ys)?;

    // kernel point values at the nodes and integrated weights per lag
    let sing = kern.k1_singular_scale();
    let e = 1.0 - rho;
    let mut k1n = vec![0.0; n + 1];
    let mut k2n = vec![0.0; n + 1];
    let mut k1w = vec![0.0; n + 1];
    let mut k2w = vec![0.0; n + 1];
    for m in 1..=n {
        let y = m as f64 * h;
        k1n[m] = kern.k1(y);
        k2n[m] = kern.k2(y);
        let mid = (m as f64 - 0.5) * h;
        k1w[m] = sing * h.powf(e) * ((m as f64).powf(e) - (m as f64 - 1.0).powf(e)) / e
            + h * kern.k1_smooth(mid);
        k2w[m] = h * kern.k2(mid);
    }

    // right-hand sides; the j = 0 entries are the analytic limits
    let mut f1 = vec![0.0; n + 1];
    let mut f2 = vec![0.0; n + 1];
    f1[0] = 2.0 * rhsp[0] + sys.tau1p[0];
    f2[0] = sys.phi2.deriv(0.0)? - sys.tau1p[n];
    for j in 1..=n {
        let y = j as f64 * h;
        f1[j] = 2.0 * rhsp[j] + gt1_pos[j - 1] - tau20 * k1n[j] + tau30 * k2n[j];
        f2[j] = sys.phi2.deriv(0.5 * y)? + gt2_neg[j - 1] - tau30 * k1n[j] + tau20 * k2n[j];
    }

    let (mu2, mu3) = march(&k1w, &k2w, &f1, &f2, f1[0], f2[0]);

    let tau2: Vec<f64> = cumtrapz(&mu2, h).iter().map(|v| tau20 + v).collect();
    let tau3: Vec<f64> = cumtrapz(&mu3, h).iter().map(|v| tau30 + v).collect();

    let c12 = pconv(&mu2, &k1w);
    let c32 = pconv(&mu3, &k2w);
    let mut nu2 = vec![0.0; n + 1];
    nu2[0] = sys.tau1p[0];
    for j in 1..=n {
        nu2[j] = gt1_pos[j - 1] - tau20 * k1n[j] - c12[j] + tau30 * k2n[j] + c32[j];
    }
    let mut nu3 = vec![0.0; n + 1];
    for j in 0..=n {
        nu3[j] = -mu3[j] + sys.phi2.deriv(0.5 * j as f64 * h)?;
    }

    Ok(TraceSolution { h, tau20, tau30, mu2, mu3, tau2, tau3, nu2, nu3, f1, f2 })
}

/// Independent reconstruction of the edge fluxes from a finished trace set,
/// using point values of the smooth kernel parts under adaptive quadrature
/// instead of the product weights. Used as a cross-check: agreement with
/// `TraceSolution::nu2`/`nu3` bounds the quadrature-consistency error.
pub fn cross_check_fluxes(
    sys: &TraceSystem,
    sol: &TraceSolution,
    at: &[usize],
) -> Result<Vec<(f64, f64)>> {
    let kern = sys.kernels;
    let n = sol.mu2.len() - 1;
    let h = sol.h;
    let rho = kern.rho;
    let sing = kern.k1_singular_scale();
    let interp = |v: &[f64], y: f64| crate::hyperbolic::interp(v, y);
    let ys: Vec<f64> = at.iter().map(|&j| j as f64 * h).collect();
    let gt1 = kern.gt_edge_table(sys.tau1, &ys)?;
    let rev: Vec<f64> = sys.tau1.iter().rev().cloned().collect();
    let gt2 = kern.gt_edge_table(&rev, &ys)?;

    let mut out = Vec::with_capacity(at.len());
    for (i, &j) in at.iter().enumerate() {
        if j == 0 || j > n {
            return Err(Error::DegenerateGrid(format!("cross-check index {j} out of range")));
        }
        let y = j as f64 * h;
        // singular part of int mu K1: peel the Abel kernel analytically per
        // quadrature through the substitution y - y1 = u^{1/(1-rho)}
        let conv1 = |mu: &[f64]| -> Result<f64> {
            let p = 1.0 / (1.0 - rho);
            let umax = y.powf(1.0 - rho);
            let singular = crate::fracquad::adaptive_gl_noisy(
                &|u: f64| {
                    let y1 = y - u.powf(p);
                    p * sing * interp(mu, y1)
                },
                0.0,
                umax,
                1e-10,
                1e-9,
            )?;
            let smooth = crate::fracquad::adaptive_gl_noisy(
                &|y1: f64| {
                    let d = y - y1;
                    if d <= 0.0 {
                        0.0
                    } else {
                        kern.k1_smooth(d) * interp(mu, y1)
                    }
                },
                0.0,
                y,
                1e-10,
                1e-7,
            )?;
            Ok(singular + smooth)
        };
        let conv2 = |mu: &[f64]| -> Result<f64> {
            crate::fracquad::adaptive_gl_noisy(
                &|y1: f64| {
                    let d = y - y1;
                    if d <= 0.0 {
                        0.0
                    } else {
                        kern.k2(d) * interp(mu, y1)
                    }
                },
                0.0,
                y,
                1e-10,
                1e-7,
            )
        };
        let nu2 = gt1[i] - sol.tau20 * kern.k1(y) - conv1(&sol.mu2)?
            + sol.tau30 * kern.k2(y)
            + conv2(&sol.mu3)?;
        let nu3 = -gt2[i] + sol.tau30 * kern.k1(y) + conv1(&sol.mu3)?
            - sol.tau20 * kern.k2(y)
            - conv2(&sol.mu2)?;
        out.push((nu2, nu3));
    }
    Ok(out)
}
