//! d'Alembert evaluation in the three characteristic triangles and the trace
//! relations along the characteristics bounding them.
//!
//! Domain pieces (unit square Omega0 is the parabolic region):
//!
//! * `Omega1`: triangle below the bottom edge, vertices (0,0), (1,0), (1/2,-1/2);
//!   Cauchy data tau1 = u(x,0), nu1 = u_y(x,0-).
//! * `Omega2`: triangle left of the left edge, vertices (0,0), (0,1), (-1/2,1/2);
//!   data tau2 = u(0,y), nu2 = u_x(0+,y).
//! * `Omega3`: triangle right of the right edge, vertices (1,0), (1,1), (3/2,1/2);
//!   data tau3 = u(1,y), nu3 = u_x(1-,y).

use crate::error::{Error, Result};

pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Omega0,
    Omega1,
    Omega2,
    Omega3,
}

impl Domain {
    pub fn tag(self) -> &'static str {
        match self {
            Domain::Omega0 => "omega0",
            Domain::Omega1 => "omega1",
            Domain::Omega2 => "omega2",
            Domain::Omega3 => "omega3",
        }
    }

    /// Classify a point; boundary points go to the parabolic region, the
    /// shared corners to the lower-indexed triangle.
    pub fn classify(x: f64, y: f64) -> Option<Domain> {
        let t = GEOM_TOL;
        if x >= -t && x <= 1.0 + t && y >= -t && y <= 1.0 + t {
            return Some(Domain::Omega0);
        }
        if y < 0.0 && x + y >= -t && x - y <= 1.0 + t {
            return Some(Domain::Omega1);
        }
        if x < 0.0 && y + x >= -t && y - x <= 1.0 + t {
            return Some(Domain::Omega2);
        }
        if x > 1.0 && y - (x - 1.0) >= -t && y + (x - 1.0) <= 1.0 + t {
            return Some(Domain::Omega3);
        }
        None
    }
}

/// Boundary/initial traces sampled on the uniform grid s_k = k h, k = 0..n,
/// together with the marching unknowns mu2 = tau2', mu3 = tau3'.
#[derive(Debug, Clone)]
pub struct TraceTable {
    pub h: f64,
    /// u(x, 0) on the bottom edge
    pub tau1: Vec<f64>,
    /// d tau1 / dx
    pub tau1p: Vec<f64>,
    /// u_y(x, 0-) from the lower triangle
    pub nu1: Vec<f64>,
    /// u(0, y)
    pub tau2: Vec<f64>,
    /// u_x(0+, y)
    pub nu2: Vec<f64>,
    /// u(1, y)
    pub tau3: Vec<f64>,
    /// u_x(1-, y)
    pub nu3: Vec<f64>,
    /// tau2'
    pub mu2: Vec<f64>,
    /// tau3'
    pub mu3: Vec<f64>,
}

impl TraceTable {
    pub fn n(&self) -> usize {
        self.tau1.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tau1.len();
        if n < 2 {
            return Err(Error::DegenerateGrid("trace table needs >= 2 samples".into()));
        }
        for (name, v) in [
            ("tau1p", &self.tau1p),
            ("nu1", &self.nu1),
            ("tau2", &self.tau2),
            ("nu2", &self.nu2),
            ("tau3", &self.tau3),
            ("nu3", &self.nu3),
            ("mu2", &self.mu2),
            ("mu3", &self.mu3),
        ] {
            if v.len() != n {
                return Err(Error::DegenerateGrid(format!(
                    "trace `{name}` has {} samples, expected {n}",
                    v.len()
                )));
            }
        }
        let tol = 1e-8;
        if (self.tau2[0] - self.tau1[0]).abs() > tol {
            return Err(Error::InvalidProblem(format!(
                "corner mismatch at (0,0): tau2(0)={} vs tau1(0)={}",
                self.tau2[0], self.tau1[0]
            )));
        }
        if (self.tau3[0] - self.tau1[n - 1]).abs() > tol {
            return Err(Error::InvalidProblem(format!(
                "corner mismatch at (1,0): tau3(0)={} vs tau1(1)={}",
                self.tau3[0],
                self.tau1[n - 1]
            )));
        }
        Ok(())
    }
}

/// Linear interpolation of uniform samples on [0, 1].
pub fn interp(samples: &[f64], s: f64) -> f64 {
    let n = samples.len() - 1;
    let t = (s * n as f64).clamp(0.0, n as f64);
    let k = (t.floor() as usize).min(n - 1);
    let w = t - k as f64;
    samples[k] * (1.0 - w) + samples[k + 1] * w
}

/// Exact integral of the piecewise-linear interpolant of `samples` over
/// [a, b] inside [0, 1]; handles a > b with orientation.
pub fn integrate_linear(samples: &[f64], a: f64, b: f64) -> f64 {
    if a > b {
        return -integrate_linear(samples, b, a);
    }
    let n = samples.len() - 1;
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    let k0 = ((a / h).floor() as usize).min(n - 1);
    let k1 = ((b / h).ceil() as usize).clamp(1, n);
    for k in k0..k1 {
        let lo = (k as f64 * h).max(a);
        let hi = ((k + 1) as f64 * h).min(b);
        if hi <= lo {
            continue;
        }
        let vl = interp(samples, lo);
        let vh = interp(samples, hi);
        total += 0.5 * (vl + vh) * (hi - lo);
    }
    total
}

fn in_range(v: f64) -> bool {
    (-GEOM_TOL..=1.0 + GEOM_TOL).contains(&v)
}

/// d'Alembert evaluation of the wave solution at (x, y) inside the requested
/// triangle.
pub fn dalembert_eval(domain: Domain, tt: &TraceTable, x: f64, y: f64) -> Result<f64> {
    match domain {
        Domain::Omega0 => Err(Error::OutOfDomain(
            "dalembert_eval applies to the wave triangles only".into(),
        )),
        Domain::Omega1 => {
            let (p, q) = (x + y, x - y);
            if y > GEOM_TOL || !in_range(p) || !in_range(q) {
                return Err(Error::OutOfDomain(format!("({x}, {y}) not in Omega1")));
            }
            let u = 0.5 * (interp(&tt.tau1, p.clamp(0.0, 1.0)) + interp(&tt.tau1, q.clamp(0.0, 1.0)))
                + 0.5 * integrate_linear(&tt.nu1, q.clamp(0.0, 1.0), p.clamp(0.0, 1.0));
            Ok(u)
        }
        Domain::Omega2 => {
            let (p, q) = (y + x, y - x);
            if x > GEOM_TOL || !in_range(p) || !in_range(q) {
                return Err(Error::OutOfDomain(format!("({x}, {y}) not in Omega2")));
            }
            let u = 0.5 * (interp(&tt.tau2, p.clamp(0.0, 1.0)) + interp(&tt.tau2, q.clamp(0.0, 1.0)))
                + 0.5 * integrate_linear(&tt.nu2, q.clamp(0.0, 1.0), p.clamp(0.0, 1.0));
            Ok(u)
        }
        Domain::Omega3 => {
            let xi = x - 1.0;
            let (p, q) = (y + xi, y - xi);
            if xi < -GEOM_TOL || !in_range(p) || !in_range(q) {
                return Err(Error::OutOfDomain(format!("({x}, {y}) not in Omega3")));
            }
            let u = 0.5 * (interp(&tt.tau3, p.clamp(0.0, 1.0)) + interp(&tt.tau3, q.clamp(0.0, 1.0)))
                + 0.5 * integrate_linear(&tt.nu3, q.clamp(0.0, 1.0), p.clamp(0.0, 1.0));
            Ok(u)
        }
    }
}

/// nu1 from the characteristic data on the lower-right characteristic:
/// differentiating u(x, x-1) = phi1(x) along the characteristic gives
/// nu1(s) = -tau1'(s) + phi1'((s+1)/2).
pub fn trace_nu1(
    tau1p: &[f64],
    phi1_prime: &dyn Fn(f64) -> Result<f64>,
    s: f64,
) -> Result<f64> {
    Ok(-interp(tau1p, s) + phi1_prime((s + 1.0) / 2.0)?)
}

/// nu3 from the characteristic data on the right triangle's lower
/// characteristic: nu3(s) = -tau3'(s) + phi2'(s/2).
pub fn trace_nu3(
    mu3: &[f64],
    phi2_prime: &dyn Fn(f64) -> Result<f64>,
    s: f64,
) -> Result<f64> {
    Ok(-interp(mu3, s) + phi2_prime(s / 2.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharTrace {
    /// u(t, -t) along the characteristic into the lower triangle
    Lower,
    /// u(-t, t) along the characteristic into the left triangle
    Left,
}

/// Value of u on the two characteristics entering the non-local condition,
/// t in [0, 1/2].
pub fn char_trace(which: CharTrace, tt: &TraceTable, t: f64) -> Result<f64> {
    if !(0.0..=0.5 + GEOM_TOL).contains(&t) {
        return Err(Error::DegenerateTime(format!(
            "characteristic parameter must lie in [0, 1/2], got {t}"
        )));
    }
    let s = (2.0 * t).clamp(0.0, 1.0);
    match which {
        CharTrace::Lower => Ok(0.5
            * (tt.tau1[0] + interp(&tt.tau1, s) - integrate_linear(&tt.nu1, 0.0, s))),
        CharTrace::Left => Ok(0.5
            * (tt.tau2[0] + interp(&tt.tau2, s) - integrate_linear(&tt.nu2, 0.0, s))),
    }
}

/// Wave-operator residual u_xx - u_yy of the d'Alembert evaluation at (x, y)
/// by 5-point central differences with step `step` (the stencil must stay
/// inside the triangle).
pub fn wave_residual(domain: Domain, tt: &TraceTable, x: f64, y: f64, step: f64) -> Result<f64> {
    let u = |xx: f64, yy: f64| dalembert_eval(domain, tt, xx, yy);
    let uxx = (u(x + step, y)? - 2.0 * u(x, y)? + u(x - step, y)?) / (step * step);
    let uyy = (u(x, y + step)? - 2.0 * u(x, y)? + u(x, y - step)?) / (step * step);
    Ok(uxx - uyy)
}
