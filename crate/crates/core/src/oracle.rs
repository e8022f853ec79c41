//! Independent finite-difference solver for the parabolic region.
//!
//! The main pipeline reconstructs the square-region solution from boundary
//! traces through Green's-function quadratures. This module solves the same
//! initial-boundary-value problem `D_y^lambda u = u_xx` by a completely
//! different route -- implicit L1 time stepping with central second
//! differences -- so that the two can be compared on interior probe points.
//!
//! The L1 scheme is first order at lambda = 1 and O(h^{2-lambda}) for smooth
//! solutions; solutions of the fractional equation typically behave like
//! y^lambda near y = 0, which degrades the realized order close to the
//! initial line. Comparisons are therefore most meaningful away from y = 0.

use crate::error::{Error, Result};
use crate::greens::GreensKernels;
use crate::hyperbolic::interp;
use statrs::function::gamma::gamma;

/// Dense space-time grid of finite-difference values, `u[k][i]` at
/// (x, y) = (i hx, k hy).
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub u: Vec<Vec<f64>>,
}

impl FdSolution {
    /// Bilinear interpolation inside the grid.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let tx = (x / self.hx).clamp(0.0, self.nx as f64);
        let ty = (y / self.hy).clamp(0.0, self.ny as f64);
        let i = (tx.floor() as usize).min(self.nx - 1);
        let k = (ty.floor() as usize).min(self.ny - 1);
        let (fx, fy) = (tx - i as f64, ty - k as f64);
        (1.0 - fy) * ((1.0 - fx) * self.u[k][i] + fx * self.u[k][i + 1])
            + fy * ((1.0 - fx) * self.u[k + 1][i] + fx * self.u[k + 1][i + 1])
    }
}

/// Thomas algorithm for a constant-coefficient tridiagonal system
/// `(diag, off)` with `off` on both sides; overwrites and returns `rhs`.
fn tridiag_const(diag: f64, off: f64, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    c[0] = off / diag;
    rhs[0] /= diag;
    for i in 1..n {
        let m = diag - off * c[i - 1];
        c[i] = off / m;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        let t = c[i] * rhs[i + 1];
        rhs[i] -= t;
    }
    rhs
}

/// Implicit L1 / central-difference march for
/// `D_y^lambda u = u_xx + f` on the unit square, with Dirichlet data
/// `left(y)`, `right(y)` and initial profile `init(x)`.
pub fn fd_solve<Fi, Fl, Fr, Fs>(
    lambda: f64,
    nx: usize,
    ny: usize,
    init: Fi,
    left: Fl,
    right: Fr,
    source: Fs,
) -> Result<FdSolution>
where
    Fi: Fn(f64) -> f64,
    Fl: Fn(f64) -> f64,
    Fr: Fn(f64) -> f64,
    Fs: Fn(f64, f64) -> f64,
{
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidProblem(format!(
            "fd_solve expects lambda in (0,1], got {lambda}"
        )));
    }
    if nx < 2 || ny < 1 {
        return Err(Error::DegenerateGrid(format!(
            "fd_solve needs nx >= 2 and ny >= 1, got {nx} x {ny}"
        )));
    }
    let hx = 1.0 / nx as f64;
    let hy = 1.0 / ny as f64;
    let scale = if lambda == 1.0 {
        1.0 / hy
    } else {
        hy.powf(-lambda) / gamma(2.0 - lambda)
    };
    // a_j = (j+1)^{1-lambda} - j^{1-lambda}; a_0 = 1 (also at lambda = 1,
    // where powf would evaluate 0^0 = 1 and zero it out)
    let e = 1.0 - lambda;
    let a: Vec<f64> = (0..ny)
        .map(|j| if j == 0 { 1.0 } else { ((j + 1) as f64).powf(e) - (j as f64).powf(e) })
        .collect();

    let mut u: Vec<Vec<f64>> = Vec::with_capacity(ny + 1);
    u.push((0..=nx).map(|i| init(i as f64 * hx)).collect());

    let r = 1.0 / (hx * hx);
    let diag = scale + 2.0 * r;
    let off = -r;
    for k in 1..=ny {
        let y = k as f64 * hy;
        let (ul, ur) = (left(y), right(y));
        // history term of the L1 sum: scale * sum_{j<k} (a_{k-j-1} - a_{k-j}) u^j
        // after Abel summation of the differences, plus scale * a_{k-1} u^0
        let mut rhs = vec![0.0; nx - 1];
        for (i, slot) in rhs.iter_mut().enumerate() {
            let x = (i + 1) as f64 * hx;
            let mut hist = a[k - 1] * u[0][i + 1];
            for j in 1..k {
                hist += (a[k - j - 1] - a[k - j]) * u[j][i + 1];
            }
            *slot = scale * hist + source(x, y);
        }
        rhs[0] += r * ul;
        rhs[nx - 2] += r * ur;
        let inner = tridiag_const(diag, off, rhs);
        let mut row = Vec::with_capacity(nx + 1);
        row.push(ul);
        row.extend(inner);
        row.push(ur);
        u.push(row);
    }
    Ok(FdSolution { nx, ny, hx, hy, u })
}

/// Maximum difference between the Green's-representation evaluation and the
/// finite-difference solve of the same data, taken over a probe sub-lattice
/// of the `(nx+1) x (ny+1)` grid restricted to `y >= y_min`.
///
/// The traces are uniform tables on [0, 1]. The comparison deliberately
/// avoids the start-up region near y = 0, where the L1 march -- not the
/// representation -- carries an order-reducing error layer.
pub fn compare_representation(
    kernels: &GreensKernels,
    tau1: &[f64],
    tau2: &[f64],
    tau3: &[f64],
    nx: usize,
    ny: usize,
    y_min: f64,
) -> Result<f64> {
    let fd = fd_solve(
        kernels.lambda,
        nx,
        ny,
        |x| interp(tau1, x),
        |y| interp(tau2, y),
        |y| interp(tau3, y),
        |_, _| 0.0,
    )?;
    let xstep = (nx / 16).max(1);
    let ystep = (ny / 16).max(1);
    let k_min = ((y_min / fd.hy).ceil() as usize).max(1);
    let ys: Vec<f64> = (k_min..=ny).step_by(ystep).map(|k| k as f64 * fd.hy).collect();
    let mut worst = 0.0f64;
    for i in (xstep..nx).step_by(xstep) {
        let x = i as f64 * fd.hx;
        let init = kernels.gbar_moment_table(tau1, x, &ys)?;
        for (j, &y) in ys.iter().enumerate() {
            let u = init[j]
                + kernels.edge_potential(x, tau2, y)
                + kernels.edge_potential(1.0 - x, tau3, y);
            let k = k_min + j * ystep;
            worst = worst.max((u - fd.u[k][i]).abs());
        }
    }
    Ok(worst)
}
