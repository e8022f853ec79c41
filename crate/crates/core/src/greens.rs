//! Green's function of the first boundary problem for the fractional
//! diffusion operator on the strip 0 < x < 1, its boundary-flux kernels, and
//! exact integration of piecewise-linear traces against all of them.
//!
//! Everything is built from the one-parameter Wright family
//! `e_d(z) = sum_n z^n / (n! Gamma(d - rho n))` with rho = lambda / 2.
//! The Green's function is the image sum
//!
//! ```text
//! G(x,y; x1,y1) = (D^{rho-1} / 2) sum_n [ e_rho(-|x-x1+2n| / s)
//!                                       - e_rho(-|x+x1+2n| / s) ],
//! ```
//!
//! with D = y - y1 and s = D^rho. Differentiating at the lateral edges gives
//! the flux kernel `W(xi, D) = D^{-1} sum_n sgn(xi+2n) e_0(-|xi+2n| / s)`
//! (2-periodic and odd in xi) and the edge-to-edge convolution kernels
//!
//! ```text
//! K1(D) = D^{-rho} [ 1/Gamma(1-rho) + 2 sum_{n>=1} e_{1-rho}(-2n / s) ],
//! K2(D) = 2 D^{-rho} sum_{n>=0} e_{1-rho}(-(2n+1) / s),
//! ```
//!
//! which appear when the lateral potentials are integrated by parts in time.
//!
//! Traces are piecewise linear on uniform grids, so every trace integral is
//! done cell by cell with closed-form antiderivatives of `e_d`; the only
//! numerical quadrature left is the smooth, desingularized time integral that
//! applies the memory weight y1^{-lambda}.

use crate::error::{Error, Result};
use crate::fracquad::quad_double_singular_noisy;
use crate::specfun::WrightSeries;
use statrs::function::gamma::gamma;

/// Default series truncation tolerance for the cached Wright evaluators.
pub const DEFAULT_SERIES_TOL: f64 = 1e-13;
/// Default hard cutoff for Wright arguments; the decay-bound shortcut
/// normally triggers much earlier.
pub const DEFAULT_Z_CUTOFF: f64 = 30.0;

/// Absolute error floor of a single series evaluation: near the truncation
/// radius the true value crosses below the summation noise and is clamped to
/// exactly 0, leaving a deterministic defect of up to ~1e-7. Passed to the
/// time quadrature so it stops refining once panels are floor-limited.
const EVAL_NOISE: f64 = 1e-7;

/// Uniform-grid cubic (4-point Lagrange) interpolant on [0, hi].
struct Curve {
    h: f64,
    vals: Vec<f64>,
}

impl Curve {
    fn build<F: Fn(f64) -> f64>(f: &F, hi: f64, n: usize) -> Self {
        let h = hi / n as f64;
        Curve { h, vals: (0..=n).map(|i| f(i as f64 * h)).collect() }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.vals.len() - 1;
        let t = (x / self.h).clamp(0.0, n as f64);
        let i = (t.floor() as usize).clamp(1, n - 2);
        let u = t - i as f64;
        let (a, b, c, d) = (self.vals[i - 1], self.vals[i], self.vals[i + 1], self.vals[i + 2]);
        // Lagrange basis at local nodes -1, 0, 1, 2
        -a * u * (u - 1.0) * (u - 2.0) / 6.0
            + b * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
            - c * (u + 1.0) * u * (u - 2.0) / 2.0
            + d * (u + 1.0) * u * (u - 1.0) / 6.0
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Cached Wright evaluators for one value of lambda, plus the quadrature
/// tolerance used by the smoothed (memory-weighted) time integrals.
pub struct GreensKernels {
    pub lambda: f64,
    pub rho: f64,
    pub quad_tol: f64,
    /// e_0, the flux-kernel density
    e0: WrightSeries,
    /// e_rho, the Green's function density
    erho: WrightSeries,
    /// e_{2 rho}, first spatial antiderivative level
    e2rho: WrightSeries,
    /// e_{3 rho}, second spatial antiderivative level
    e3rho: WrightSeries,
    /// e_{1-rho}, the K1/K2 density
    e1mrho: WrightSeries,
    /// e_{2-rho}, time antiderivative of e_0 against dD
    e2mrho: WrightSeries,
    /// e_1, time antiderivative of e_0 against dD/D
    e1: WrightSeries,
    /// image-sum culling radius: arguments beyond this evaluate to exactly 0
    support: f64,
    /// 1 / Gamma(1 - rho), the singular K1 amplitude
    k1_sing: f64,
}

impl GreensKernels {
    pub fn new(lambda: f64, series_tol: f64, z_cutoff: f64, quad_tol: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidProblem(format!(
                "diffusion order lambda must lie in (0, 1], got {lambda}"
            )));
        }
        let rho = 0.5 * lambda;
        let mk = |delta: f64| WrightSeries::new(rho, delta, series_tol, z_cutoff);
        let e0 = mk(0.0)?;
        let erho = mk(rho)?;
        let e2rho = mk(2.0 * rho)?;
        let e3rho = mk(3.0 * rho)?;
        let e1mrho = mk(1.0 - rho)?;
        let e2mrho = mk(2.0 - rho)?;
        let e1 = mk(1.0)?;
        let support = [&e0, &erho, &e2rho, &e3rho, &e1mrho, &e2mrho, &e1]
            .iter()
            .map(|s| s.support_radius())
            .fold(0.0f64, f64::max);
        Ok(Self {
            lambda,
            rho,
            quad_tol,
            e0,
            erho,
            e2rho,
            e3rho,
            e1mrho,
            e2mrho,
            e1,
            support,
            k1_sing: 1.0 / gamma(1.0 - rho),
        })
    }

    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// G(x, y; x1, y1) by the image sum; requires y > y1.
    pub fn green_eval(&self, x: f64, y: f64, x1: f64, y1: f64) -> Result<f64> {
        let d = y - y1;
        if !(d > 0.0) {
            return Err(Error::DegenerateTime(format!(
                "green_eval needs y > y1, got y={y}, y1={y1}"
            )));
        }
        let s = d.powf(self.rho);
        Ok(0.5 * d.powf(self.rho - 1.0) * self.green_image_sum(x, x1, s))
    }

    /// Image sum for the Green's function at scale s = (y - y1)^rho;
    /// G = s / (2 D) times this.
    fn green_image_sum(&self, x: f64, x1: f64, s: f64) -> f64 {
        let r = self.support * s;
        let nlo = ((-r - x.max(x + x1)) / 2.0).floor() as i64 - 1;
        let nhi = ((r + x.max(1.0)) / 2.0).ceil() as i64 + 1;
        let mut sum = 0.0;
        for n in nlo..=nhi {
            let shift = 2.0 * n as f64;
            let a = (x - x1 + shift).abs();
            let b = (x + x1 + shift).abs();
            if a <= r {
                sum += self.erho.eval(-a / s);
            }
            if b <= r {
                sum -= self.erho.eval(-b / s);
            }
        }
        sum
    }

    /// Lateral flux kernel W(xi, D) = G_{x1} at the left edge (xi = x) or at
    /// the right edge (xi = x + 1).
    pub fn flux_kernel(&self, xi: f64, d: f64) -> f64 {
        debug_assert!(d > 0.0);
        let s = d.powf(self.rho);
        let r = self.support * s;
        let nlo = ((-r - xi) / 2.0).floor() as i64;
        let nhi = ((r - xi) / 2.0).ceil() as i64;
        let mut sum = 0.0;
        for n in nlo..=nhi {
            let u = xi + 2.0 * n as f64;
            if u.abs() <= r {
                sum += sgn(u) * self.e0.eval(-u.abs() / s);
            }
        }
        if sum == 0.0 {
            0.0
        } else {
            sum / d
        }
    }

    /// Amplitude of the singular part of K1: K1(D) = k1_singular_scale() *
    /// D^{-rho} + k1_smooth(D).
    pub fn k1_singular_scale(&self) -> f64 {
        self.k1_sing
    }

    /// Smooth remainder of K1; vanishes (with all derivatives) as D -> 0.
    pub fn k1_smooth(&self, d: f64) -> f64 {
        debug_assert!(d > 0.0);
        let s = d.powf(self.rho);
        if 2.0 > self.support * s {
            return 0.0;
        }
        let nmax = (self.support * s / 2.0).floor() as i64;
        let mut sum = 0.0;
        for n in 1..=nmax {
            sum += self.e1mrho.eval(-2.0 * n as f64 / s);
        }
        2.0 * sum / s
    }

    pub fn k1(&self, d: f64) -> f64 {
        self.k1_sing * d.powf(-self.rho) + self.k1_smooth(d)
    }

    /// Opposite-edge kernel K2; smooth and bounded, K2(0+) = 0.
    pub fn k2(&self, d: f64) -> f64 {
        debug_assert!(d > 0.0);
        let s = d.powf(self.rho);
        if 1.0 > self.support * s {
            return 0.0;
        }
        let nmax = ((self.support * s - 1.0) / 2.0).floor() as i64;
        let mut sum = 0.0;
        for n in 0..=nmax {
            sum += self.e1mrho.eval(-(2.0 * n as f64 + 1.0) / s);
        }
        2.0 * sum / s
    }

    // ---- continuous antiderivatives in the spatial variable, at fixed s ----
    // For the Green's density e_rho:
    //   p0c'(xi) = e_rho(-|xi|/s),   p1'(xi) = xi e_rho(-|xi|/s),
    // and for the flux density sgn(xi) e_0:
    //   a0'(xi) = sgn(xi) e_0(-|xi|/s),   a1c'(xi) = |xi| e_0(-|xi|/s).
    // p0c and a1c carry a constant offset per half-line so that they are
    // continuous across xi = 0 (the raw primitives jump there).

    fn p0c(&self, xi: f64, s: f64) -> f64 {
        -s * sgn(xi) * (self.e2rho.eval(-xi.abs() / s) - self.e2rho.at_zero())
    }

    fn p1(&self, xi: f64, s: f64) -> f64 {
        let a = xi.abs();
        -s * a * self.e2rho.eval(-a / s) - s * s * self.e3rho.eval(-a / s)
    }

    fn a0(&self, xi: f64, s: f64) -> f64 {
        -s * self.erho.eval(-xi.abs() / s)
    }

    fn a1c(&self, xi: f64, s: f64) -> f64 {
        let a = xi.abs();
        -sgn(xi)
            * (s * s * (self.e2rho.eval(-a / s) - self.e2rho.at_zero())
                + s * a * self.erho.eval(-a / s))
    }

    /// s-scaled flux moment: returns `D * int_0^1 W(x1, D) t(x1) dx1` where t
    /// is the piecewise-linear interpolant of `trace`. Smooth in s = D^rho
    /// down to s = 0, which is what the desingularized time quadrature needs.
    fn flux_moment_core(&self, trace: &[f64], s: f64) -> f64 {
        let ncell = trace.len() - 1;
        let h = 1.0 / ncell as f64;
        let r = self.support * s;
        let mut total = 0.0;
        for k in 0..ncell {
            let p = k as f64 * h;
            let q = p + h;
            let b = (trace[k + 1] - trace[k]) / h;
            let a = trace[k] - b * p;
            // images with [p+2n, q+2n] meeting [-r, r]
            let nlo = ((-r - q) / 2.0).floor() as i64;
            let nhi = ((r - p) / 2.0).ceil() as i64;
            for n in nlo..=nhi {
                let shift = 2.0 * n as f64;
                let (lo, hi) = (p + shift, q + shift);
                if lo > r || hi < -r {
                    continue;
                }
                let lin = a + b * (-shift); // t(x1) = (a - 2bn) + b xi
                total += lin * (self.a0(hi, s) - self.a0(lo, s))
                    + b * (self.a1c(hi, s) - self.a1c(lo, s));
            }
        }
        total
    }

    /// `int_0^1 W(x1, D) t(x1) dx1` for piecewise-linear t, exactly per cell.
    pub fn flux_moment(&self, trace: &[f64], d: f64) -> f64 {
        debug_assert!(d > 0.0);
        self.flux_moment_core(trace, d.powf(self.rho)) / d
    }

    /// s-scaled Green moment: `D^{1-rho} int_0^1 G(x,y;x1,y1) t(x1) dx1` as a
    /// smooth function of s = D^rho.
    fn green_moment_core(&self, trace: &[f64], x: f64, s: f64) -> f64 {
        let ncell = trace.len() - 1;
        let h = 1.0 / ncell as f64;
        let r = self.support * s;
        let mut total = 0.0;
        for k in 0..ncell {
            let p = k as f64 * h;
            let q = p + h;
            let b = (trace[k + 1] - trace[k]) / h;
            let a = trace[k] - b * p;
            // direct images: xi = x - x1 + 2n runs [x-q+2n, x-p+2n]
            let nlo = ((-r - (x - p)) / 2.0).floor() as i64;
            let nhi = ((r - (x - q)) / 2.0).ceil() as i64;
            for n in nlo..=nhi {
                let shift = 2.0 * n as f64;
                let (lo, hi) = (x - q + shift, x - p + shift);
                if lo > r || hi < -r {
                    continue;
                }
                // t = (a + b(x+2n)) - b xi, and dx1 = -dxi
                let lin = a + b * (x + shift);
                total += lin * (self.p0c(hi, s) - self.p0c(lo, s))
                    - b * (self.p1(hi, s) - self.p1(lo, s));
            }
            // reflected images: xi = x + x1 + 2n runs [x+p+2n, x+q+2n]
            let nlo = ((-r - (x + q)) / 2.0).floor() as i64;
            let nhi = ((r - (x + p)) / 2.0).ceil() as i64;
            for n in nlo..=nhi {
                let shift = 2.0 * n as f64;
                let (lo, hi) = (x + p + shift, x + q + shift);
                if lo > r || hi < -r {
                    continue;
                }
                // t = (a - b(x+2n)) + b xi, with an overall minus sign
                let lin = a - b * (x + shift);
                total -= lin * (self.p0c(hi, s) - self.p0c(lo, s))
                    + b * (self.p1(hi, s) - self.p1(lo, s));
            }
        }
        0.5 * total
    }

    /// `int_0^1 G(x, y; x1, y1) t(x1) dx1`, exactly per cell.
    pub fn green_moment(&self, trace: &[f64], x: f64, d: f64) -> f64 {
        debug_assert!(d > 0.0);
        let s = d.powf(self.rho);
        d.powf(self.rho - 1.0) * self.green_moment_core(trace, x, s)
    }

    /// Memory-weighted time smoothing
    /// `(1/Gamma(1-lambda)) int_0^y y1^{-lambda} D^{rho-1} core(D^rho) dy1`
    /// with D = y - y1; at lambda = 1 this degenerates to `core(y^rho) * y^{rho-1}`.
    fn smoothed<F: Fn(f64) -> f64>(&self, core: F, y: f64) -> Result<f64> {
        if self.lambda == 1.0 {
            return Ok(y.powf(self.rho - 1.0) * core(y.powf(self.rho)));
        }
        let f = |_y1: f64, d: f64| {
            if d <= 0.0 {
                0.0
            } else {
                core(d.powf(self.rho))
            }
        };
        let v = quad_double_singular_noisy(&f, y, self.lambda, self.rho, self.quad_tol, EVAL_NOISE)?;
        Ok(v / gamma(1.0 - self.lambda))
    }

    /// `gt_edge` for a whole batch of (strictly positive) times. The s-scaled
    /// flux moment is sampled once on a uniform grid and interpolated inside
    /// the time quadrature, which turns the O(n_y * n_cell) kernel work per
    /// quadrature node into O(1).
    pub fn gt_edge_table(&self, trace: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        if self.lambda == 1.0 {
            return ys.iter().map(|&y| self.gt_edge(trace, y)).collect();
        }
        let ymax = ys.iter().cloned().fold(0.0, f64::max);
        if !(ymax > 0.0) {
            return Err(Error::DegenerateTime(
                "gt_edge_table needs positive times".to_owned(),
            ));
        }
        // the s -> 0 limit of the scaled moment is carried by the first cell
        let m0 = trace[0] * self.erho.at_zero();
        let m = |s: f64| {
            if s > 0.0 {
                self.flux_moment_core(trace, s) / s
            } else {
                m0
            }
        };
        // boundary-layer features in s have width ~ the trace cell size, so
        // sample a few nodes per cell
        let nsamp = (6 * (trace.len() - 1)).max(1024);
        let cache = Curve::build(&m, ymax.powf(self.rho), nsamp);
        let g = 1.0 / gamma(1.0 - self.lambda);
        ys.iter()
            .map(|&y| {
                let f = |_y1: f64, d: f64| {
                    if d <= 0.0 {
                        0.0
                    } else {
                        cache.eval(d.powf(self.rho))
                    }
                };
                Ok(g * quad_double_singular_noisy(
                    &f,
                    y,
                    self.lambda,
                    self.rho,
                    self.quad_tol,
                    EVAL_NOISE,
                )?)
            })
            .collect()
    }

    /// `gbar_moment` batched over times at one spatial point, with the same
    /// interpolation cache as [`Self::gt_edge_table`].
    pub fn gbar_moment_table(&self, trace: &[f64], x: f64, ys: &[f64]) -> Result<Vec<f64>> {
        if self.lambda == 1.0 {
            return ys.iter().map(|&y| self.gbar_moment(trace, x, y)).collect();
        }
        let ymax = ys.iter().cloned().fold(0.0, f64::max);
        if !(ymax > 0.0) {
            return Err(Error::DegenerateTime(
                "gbar_moment_table needs positive times".to_owned(),
            ));
        }
        // the kernel mass scales like s, so the scaled moment vanishes at 0
        let m = |s: f64| {
            if s > 0.0 {
                self.green_moment_core(trace, x, s)
            } else {
                0.0
            }
        };
        let nsamp = (6 * (trace.len() - 1)).max(1024);
        let cache = Curve::build(&m, ymax.powf(self.rho), nsamp);
        let g = 1.0 / gamma(1.0 - self.lambda);
        ys.iter()
            .map(|&y| {
                let f = |_y1: f64, d: f64| {
                    if d <= 0.0 {
                        0.0
                    } else {
                        cache.eval(d.powf(self.rho))
                    }
                };
                Ok(g * quad_double_singular_noisy(
                    &f,
                    y,
                    self.lambda,
                    self.rho,
                    self.quad_tol,
                    EVAL_NOISE,
                )?)
            })
            .collect()
    }

    /// Initial-trace contribution to the lateral flux:
    /// the memory-weighted integral of `int_0^1 W(x1, D) t(x1) dx1`.
    /// For the right edge pass the reversed trace and negate (the right-edge
    /// kernel is -W(1-x1, D)).
    pub fn gt_edge(&self, trace: &[f64], y: f64) -> Result<f64> {
        self.smoothed(|s| if s > 0.0 { self.flux_moment_core(trace, s) / s } else { 0.0 }, y)
    }

    /// Initial-trace contribution to the solution in the interior:
    /// `int_0^1 Gbar(x, y; x1) t(x1) dx1` where Gbar is the memory-weighted
    /// Green's function.
    pub fn gbar_moment(&self, trace: &[f64], x: f64, y: f64) -> Result<f64> {
        self.smoothed(|s| self.green_moment_core(trace, x, s), y)
    }

    /// Point value of the memory-weighted Green's function Gbar(x, y; x1).
    pub fn gbar_eval(&self, x: f64, y: f64, x1: f64) -> Result<f64> {
        if self.lambda == 1.0 {
            return self.green_eval(x, y, x1, 0.0);
        }
        // D^{1-rho} * G is the smooth factor required by the weight split
        let g = |_y1: f64, d: f64| {
            if d <= 0.0 {
                return 0.0;
            }
            0.5 * self.green_image_sum(x, x1, d.powf(self.rho))
        };
        let v = quad_double_singular_noisy(&g, y, self.lambda, self.rho, self.quad_tol, EVAL_NOISE)?;
        Ok(v / gamma(1.0 - self.lambda))
    }

    /// Point value of the memory-weighted edge flux kernel Wbar(x1, y) =
    /// Gbar_x at the left edge.
    pub fn wbar(&self, x1: f64, y: f64) -> Result<f64> {
        if self.lambda == 1.0 {
            return Ok(self.flux_kernel(x1, y));
        }
        let g = |_y1: f64, d: f64| {
            if d <= 0.0 {
                return 0.0;
            }
            d.powf(1.0 - self.rho) * self.flux_kernel(x1, d)
        };
        let v = quad_double_singular_noisy(&g, y, self.lambda, self.rho, self.quad_tol, EVAL_NOISE)?;
        Ok(v / gamma(1.0 - self.lambda))
    }

    /// Lateral layer potential `int_0^y W(xe, y - y1) t(y1) dy1` with t
    /// piecewise linear on the uniform grid over [0, 1], integrated exactly
    /// per cell by the time antiderivatives
    /// `int e_0(-c D^{-rho}) dD/D = e_1` and
    /// `int e_0(-c D^{-rho}) dD = rho c D^{1-rho} e_{2-rho}`.
    pub fn edge_potential(&self, xe: f64, trace: &[f64], y: f64) -> f64 {
        debug_assert!(y > 0.0);
        let ncell = trace.len() - 1;
        let h = 1.0 / ncell as f64;
        let kmax = ((y / h).ceil() as usize).min(ncell);
        let mut total = 0.0;
        for k in 0..kmax {
            let p = k as f64 * h;
            let q = (p + h).min(y);
            let b = (trace[k + 1] - trace[k]) / h;
            let a = trace[k] - b * p;
            // t(y1) = (a + b y) - b D
            let a_t = a + b * y;
            let (dlo, dhi) = (y - q, y - p);
            let rmax = self.support * dhi.powf(self.rho);
            let nlo = ((-rmax - xe) / 2.0).floor() as i64;
            let nhi = ((rmax - xe) / 2.0).ceil() as i64;
            for n in nlo..=nhi {
                let u = xe + 2.0 * n as f64;
                let c = u.abs();
                if c == 0.0 || c > rmax {
                    continue;
                }
                let t_at = |d: f64| -> (f64, f64) {
                    if d <= 0.0 {
                        return (0.0, 0.0);
                    }
                    let z = -c * d.powf(-self.rho);
                    (
                        self.e1.eval(z),
                        self.rho * c * d.powf(1.0 - self.rho) * self.e2mrho.eval(z),
                    )
                };
                let (t0hi, t1hi) = t_at(dhi);
                let (t0lo, t1lo) = t_at(dlo);
                total += sgn(u) * (a_t * (t0hi - t0lo) - b * (t1hi - t1lo));
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracquad::adaptive_gl_noisy;
    use crate::specfun::mittag_leffler;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn kern(lambda: f64) -> GreensKernels {
        GreensKernels::new(lambda, DEFAULT_SERIES_TOL, DEFAULT_Z_CUTOFF, 1e-9).unwrap()
    }

    /// reference quadrature for integrands built from the cached series,
    /// which carry a ~1e-8 cancellation noise floor
    fn agl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, _tol: f64) -> crate::error::Result<f64> {
        adaptive_gl_noisy(f, a, b, 1e-9, EVAL_NOISE)
    }

    /// classical heat kernel on the strip by direct image summation
    fn heat_green(x: f64, y: f64, x1: f64, y1: f64) -> f64 {
        let d = y - y1;
        let mut s = 0.0;
        for n in -40i64..=40 {
            let shift = 2.0 * n as f64;
            s += (-(x - x1 + shift).powi(2) / (4.0 * d)).exp()
                - (-(x + x1 + shift).powi(2) / (4.0 * d)).exp();
        }
        s / (2.0 * (PI * d).sqrt())
    }

    #[test]
    fn batched_tables_match_pointwise_evaluation() {
        let n = 32;
        let h = 1.0 / n as f64;
        let trace: Vec<f64> = (0..=n).map(|j| (PI * j as f64 * h).sin() + 0.3).collect();
        let ys = [0.05, 0.3, 0.7, 1.0];
        for &lambda in &[1.0, 0.6] {
            let k = kern(lambda);
            let gt = k.gt_edge_table(&trace, &ys).unwrap();
            let gb = k.gbar_moment_table(&trace, 0.4, &ys).unwrap();
            for (i, &y) in ys.iter().enumerate() {
                assert_abs_diff_eq!(gt[i], k.gt_edge(&trace, y).unwrap(), epsilon = 1e-5);
                assert_abs_diff_eq!(gb[i], k.gbar_moment(&trace, 0.4, y).unwrap(), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn classical_limit_matches_heat_kernel() {
        let k = kern(1.0);
        for &(x, x1, d) in &[(0.3, 0.7, 0.2), (0.5, 0.5, 0.05), (0.9, 0.1, 1.0), (0.2, 0.25, 0.6)] {
            let got = k.green_eval(x, d, x1, 0.0).unwrap();
            let want = heat_green(x, d, x1, 0.0);
            assert_abs_diff_eq!(got, want, epsilon = 5e-7);
        }
    }

    #[test]
    fn dirichlet_property_at_edges() {
        for &lambda in &[1.0, 0.6] {
            let k = kern(lambda);
            for &d in &[0.1, 0.7] {
                assert_abs_diff_eq!(k.green_eval(0.4, d, 0.0, 0.0).unwrap(), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(k.green_eval(0.4, d, 1.0, 0.0).unwrap(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn flux_kernel_symmetries_and_fd() {
        let k = kern(0.7);
        let (x, d) = (0.37, 0.21);
        let w = k.flux_kernel(x, d);
        assert_abs_diff_eq!(k.flux_kernel(x + 2.0, d), w, epsilon = 1e-12 * w.abs().max(1.0));
        assert_abs_diff_eq!(k.flux_kernel(-x, d), -w, epsilon = 1e-12 * w.abs().max(1.0));
        // W(x, D) = G_{x1}(x, y; 0, y1): forward difference at the edge
        let eps = 1e-6;
        let fd = k.green_eval(x, d, eps, 0.0).unwrap() / eps;
        assert!((fd - w).abs() < 1e-4 * w.abs().max(1.0), "fd {fd} vs w {w}");
    }

    #[test]
    fn classical_k1_k2_closed_forms() {
        // at lambda = 1: e_{1/2}(z) = exp(-z^2/4)/sqrt(pi), so
        // K1 = D^{-1/2}/sqrt(pi) (1 + 2 sum exp(-n^2/D)),
        // K2 = 2 D^{-1/2}/sqrt(pi) sum exp(-(2n+1)^2/(4D))
        let k = kern(1.0);
        for &d in &[0.05, 0.3, 1.0] {
            let mut k1w = 1.0;
            let mut k2w = 0.0;
            for n in 1..60 {
                k1w += 2.0 * (-(n as f64).powi(2) / d).exp();
            }
            for n in 0..60 {
                k2w += 2.0 * (-(2.0 * n as f64 + 1.0).powi(2) / (4.0 * d)).exp();
            }
            let scale = 1.0 / (PI * d).sqrt();
            assert_abs_diff_eq!(k.k1(d), scale * k1w, epsilon = 5e-7);
            assert_abs_diff_eq!(k.k2(d), scale * k2w, epsilon = 5e-7);
        }
    }

    #[test]
    fn flux_moment_matches_quadrature() {
        let k = kern(0.8);
        let n = 64;
        let trace: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                0.3 + x * x - 0.5 * x
            })
            .collect();
        for &d in &[0.04, 0.2, 0.8] {
            let got = k.flux_moment(&trace, d);
            let f = |x1: f64| {
                let i = (x1 * n as f64).floor().min(n as f64 - 1.0);
                let w = x1 * n as f64 - i;
                let t = trace[i as usize] * (1.0 - w) + trace[i as usize + 1] * w;
                k.flux_kernel(x1, d) * t
            };
            let want = agl(&f, 0.0, 1.0, 1e-11).unwrap();
            assert!((got - want).abs() < 5e-6, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn green_moment_matches_quadrature() {
        let k = kern(0.5);
        let n = 64;
        let trace: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).sin()).collect();
        for &(x, d) in &[(0.3, 0.1), (0.7, 0.5)] {
            let got = k.green_moment(&trace, x, d);
            let f = |x1: f64| {
                let i = (x1 * n as f64).floor().min(n as f64 - 1.0);
                let w = x1 * n as f64 - i;
                let t = trace[i as usize] * (1.0 - w) + trace[i as usize + 1] * w;
                k.green_eval(x, d, x1, 0.0).unwrap() * t
            };
            let want = agl(&f, 0.0, 1.0, 1e-11).unwrap();
            assert!((got - want).abs() < 5e-6, "x={x} d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn edge_potential_matches_quadrature() {
        let k = kern(0.9);
        let n = 96;
        let trace: Vec<f64> = (0..=n)
            .map(|i| {
                let y = i as f64 / n as f64;
                1.0 + 0.5 * y - 0.2 * y * y
            })
            .collect();
        let y = 0.73;
        for &xe in &[0.2, 0.55, 1.4] {
            let got = k.edge_potential(xe, &trace, y);
            let f = |y1: f64| {
                let i = (y1 * n as f64).floor().min(n as f64 - 1.0);
                let w = y1 * n as f64 - i;
                let t = trace[i as usize] * (1.0 - w) + trace[i as usize + 1] * w;
                k.flux_kernel(xe, y - y1) * t
            };
            let want = agl(&f, 0.0, y, 1e-11).unwrap();
            assert!((got - want).abs() < 5e-6, "xe={xe}: {got} vs {want}");
        }
    }

    #[test]
    fn eigenfunction_identity() {
        // int_0^1 Gbar(x, y; x1) sin(pi x1) dx1 = E_lambda(-pi^2 y^lambda) sin(pi x)
        let n = 400;
        let trace: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).sin()).collect();
        for &lambda in &[1.0, 0.6, 0.35] {
            let k = kern(lambda);
            for &(x, y) in &[(0.3, 0.4), (0.62, 0.15)] {
                let got = k.gbar_moment(&trace, x, y).unwrap();
                let want = mittag_leffler(lambda, -PI * PI * y.powf(lambda)).unwrap()
                    * (PI * x).sin();
                assert!(
                    (got - want).abs() < 5e-5,
                    "lambda={lambda} x={x} y={y}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn constant_and_linear_moment_identities() {
        // int_0^1 Wbar(x1, y) dx1      = K1(y) - K2(y)
        // int_0^1 Wbar(x1, y) x1 dx1   = 1 - K2(y)
        let n = 64;
        let ones = vec![1.0; n + 1];
        let lin: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        for &lambda in &[1.0, 0.6] {
            let k = kern(lambda);
            for &y in &[0.1, 0.45, 0.9] {
                let m0 = k.gt_edge(&ones, y).unwrap();
                let m1 = k.gt_edge(&lin, y).unwrap();
                let want0 = k.k1(y) - k.k2(y);
                let want1 = 1.0 - k.k2(y);
                assert!(
                    (m0 - want0).abs() < 1e-7 * want0.abs().max(1.0),
                    "lambda={lambda} y={y}: m0 {m0} vs {want0}"
                );
                assert!(
                    (m1 - want1).abs() < 1e-7 * want1.abs().max(1.0),
                    "lambda={lambda} y={y}: m1 {m1} vs {want1}"
                );
            }
        }
    }

    #[test]
    fn flux_density_identity() {
        // e_0(z) = -rho z e_{1-rho}(z), the delta = 1 recurrence
        let k = kern(0.7);
        for i in 1..40 {
            let z = -0.2 * i as f64;
            let lhs = k.e0.eval(z);
            let rhs = -k.rho * z * k.e1mrho.eval(z);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn wbar_classical_reduces_to_flux_kernel() {
        let k = kern(1.0);
        let w = k.wbar(0.3, 0.2).unwrap();
        assert_abs_diff_eq!(w, k.flux_kernel(0.3, 0.2), epsilon = 1e-13);
    }
}
