//! End-to-end pipeline: problem data in, solution field and residual
//! diagnostics out.
//!
//! Stages, in order:
//!
//! 1. the bottom trace tau1 from its closed-form two-point problem (the
//!    transmission relation turns the equation restricted to y = 0 into
//!    `tau1'' + c tau1' = c g` with g built from the lower characteristic
//!    datum);
//! 2. the lateral traces tau2/tau3 and fluxes from the reduced Volterra
//!    system;
//! 3. evaluation anywhere: Green's-representation quadratures in the square,
//!    d'Alembert formulas in the three wave triangles.
//!
//! `verify_conditions` re-tests the five defining conditions of the problem
//! (equation in both regions, characteristic data, non-local coupling,
//! transmission) against the finished field, using evaluation routes that
//! differ from the ones the construction used wherever possible.

use crate::error::{Error, Result};
use crate::fracquad::caputo_l1;
use crate::func::Func;
use crate::greens::{GreensKernels, DEFAULT_SERIES_TOL, DEFAULT_Z_CUTOFF};
use crate::hyperbolic::{char_trace, dalembert_eval, wave_residual, CharTrace, Domain, TraceTable};
use crate::tau1solver::solve_tau1;
use crate::volterra::{cross_check_fluxes, solve_traces, TraceSolution, TraceSystem};
use statrs::function::gamma::gamma;

/// Data of one boundary-value problem.
///
/// * `phi1` -- Dirichlet datum on the lower-right characteristic
///   `u(x, x-1) = phi1(x)`, x in [1/2, 1];
/// * `phi2` -- Dirichlet datum on the right triangle's lower characteristic
///   `u(1+t, t) = phi2(t)`, t in [0, 1/2];
/// * `a1, a2, a3` -- coefficients of the non-local coupling
///   `a1(t) u(-t, t) + a2(t) u(t, -t) = a3(t)`, t in [0, 1/2];
/// * `coupling` -- the transmission constant c relating the normal derivative
///   jump at y = 0; `None` selects the natural value Gamma(lambda).
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub lambda: f64,
    pub phi1: Func,
    pub phi2: Func,
    pub a1: Func,
    pub a2: Func,
    pub a3: Func,
    pub coupling: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct DiscretizationConfig {
    /// trace grid cells on each edge
    pub n: usize,
    pub quad_tol: f64,
    pub series_tol: f64,
    pub z_cutoff: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            n: 128,
            quad_tol: 1e-9,
            series_tol: DEFAULT_SERIES_TOL,
            z_cutoff: DEFAULT_Z_CUTOFF,
        }
    }
}

/// One evaluated point, tagged with the domain piece that produced it.
#[derive(Debug, Clone, Copy)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub domain: Domain,
}

/// The assembled solution: traces plus everything needed to evaluate u.
pub struct SolutionField {
    pub spec: ProblemSpec,
    pub config: DiscretizationConfig,
    pub coupling: f64,
    pub traces: TraceTable,
    kernels: GreensKernels,
}

impl SolutionField {
    pub fn kernels(&self) -> &GreensKernels {
        &self.kernels
    }

    /// Evaluate at a point of the full domain; errors outside it.
    pub fn eval(&self, x: f64, y: f64) -> Result<SamplePoint> {
        let domain = Domain::classify(x, y).ok_or_else(|| {
            Error::OutOfDomain(format!("({x}, {y}) lies outside every domain piece"))
        })?;
        let u = match domain {
            Domain::Omega0 => self.eval_square(x, y)?,
            d => dalembert_eval(d, &self.traces, x, y)?,
        };
        Ok(SamplePoint { x, y, u, domain })
    }

    /// Green's representation in the closed unit square:
    /// memory-weighted initial-trace moment plus the two lateral layer
    /// potentials.
    pub fn eval_square(&self, x: f64, y: f64) -> Result<f64> {
        if !(-1e-12..=1.0 + 1e-12).contains(&x) || !(-1e-12..=1.0 + 1e-12).contains(&y) {
            return Err(Error::OutOfDomain(format!("({x}, {y}) not in the unit square")));
        }
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        if y == 0.0 {
            return Ok(crate::hyperbolic::interp(&self.traces.tau1, x));
        }
        if x == 0.0 {
            return Ok(crate::hyperbolic::interp(&self.traces.tau2, y));
        }
        if x == 1.0 {
            return Ok(crate::hyperbolic::interp(&self.traces.tau3, y));
        }
        let init = self.kernels.gbar_moment(&self.traces.tau1, x, y)?;
        let left = self.kernels.edge_potential(x, &self.traces.tau2, y);
        let right = self.kernels.edge_potential(1.0 - x, &self.traces.tau3, y);
        Ok(init + left + right)
    }

    /// Square-region values along a vertical line, sharing the initial-trace
    /// interpolation cache across all times. Much faster than repeated
    /// [`Self::eval_square`] when `ys` is dense.
    pub fn eval_square_line(&self, x: f64, ys: &[f64]) -> Result<Vec<f64>> {
        if ys.iter().any(|&y| y <= 0.0) {
            return Err(Error::DegenerateTime(
                "eval_square_line needs strictly positive times".to_owned(),
            ));
        }
        let init = self.kernels.gbar_moment_table(&self.traces.tau1, x, ys)?;
        Ok(ys
            .iter()
            .zip(init)
            .map(|(&y, i)| {
                i + self.kernels.edge_potential(x, &self.traces.tau2, y)
                    + self.kernels.edge_potential(1.0 - x, &self.traces.tau3, y)
            })
            .collect())
    }

    /// Uniform sample grid over the full domain (square plus triangles),
    /// spacing 1/m; points outside every piece are skipped.
    pub fn sample_grid(&self, m: usize) -> Result<Vec<SamplePoint>> {
        let mut out = Vec::new();
        let h = 1.0 / m as f64;
        let lo = -(m as i64) / 2;
        let hi = m as i64 + (m as i64) / 2;
        for ky in lo..=hi {
            let y = ky as f64 * h;
            for kx in lo..=hi {
                let x = kx as f64 * h;
                if Domain::classify(x, y).is_some() {
                    out.push(self.eval(x, y)?);
                }
            }
        }
        Ok(out)
    }
}

pub fn solve_problem(spec: &ProblemSpec, config: &DiscretizationConfig) -> Result<SolutionField> {
    if !(spec.lambda > 0.0 && spec.lambda <= 1.0) {
        return Err(Error::InvalidProblem(format!(
            "diffusion order must lie in (0, 1], got {}",
            spec.lambda
        )));
    }
    if config.n < 4 {
        return Err(Error::DegenerateGrid(format!(
            "trace grid needs at least 4 cells, got {}",
            config.n
        )));
    }
    let c = spec.coupling.unwrap_or_else(|| gamma(spec.lambda));
    let kernels =
        GreensKernels::new(spec.lambda, config.series_tol, config.z_cutoff, config.quad_tol)?;

    // corner values pinned by the data: u(0,0) from the non-local condition
    // at t = 0, u(1,0) from the characteristic datum
    let denom = spec.a1.eval(0.0)? + spec.a2.eval(0.0)?;
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateCoefficients(
            "a1(0) + a2(0) vanishes; the corner value u(0,0) is undetermined".to_owned(),
        ));
    }
    let alpha = spec.a3.eval(0.0)? / denom;
    let beta = spec.phi1.eval(1.0)?;

    // bottom trace: transmission relation tau1'' = c nu1 with
    // nu1 = -tau1' + phi1'((x+1)/2)
    let phi1 = &spec.phi1;
    let g = |x: f64| phi1.deriv((x + 1.0) / 2.0);
    let t1 = solve_tau1(&g, c, alpha, beta, config.n)?;
    let h = 1.0 / config.n as f64;
    let mut nu1 = vec![0.0; config.n + 1];
    for (k, slot) in nu1.iter_mut().enumerate() {
        let x = k as f64 * h;
        *slot = -t1.tau1p[k] + spec.phi1.deriv((x + 1.0) / 2.0)?;
    }

    let sys = TraceSystem {
        kernels: &kernels,
        tau1: &t1.tau1,
        tau1p: &t1.tau1p,
        nu1: &nu1,
        a1: &spec.a1,
        a2: &spec.a2,
        a3: &spec.a3,
        phi2: &spec.phi2,
        tau30: beta,
    };
    let vol = solve_traces(&sys)?;

    let traces = TraceTable {
        h,
        tau1: t1.tau1,
        tau1p: t1.tau1p,
        nu1,
        tau2: vol.tau2,
        nu2: vol.nu2,
        tau3: vol.tau3,
        nu3: vol.nu3,
        mu2: vol.mu2,
        mu3: vol.mu3,
    };
    traces.validate()?;

    Ok(SolutionField {
        spec: spec.clone(),
        config: *config,
        coupling: c,
        traces,
        kernels,
    })
}

/// Maximum residuals of the defining conditions, measured on the finished
/// field.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    /// non-local coupling along the two characteristics from the origin
    pub nonlocal: f64,
    /// Dirichlet datum on the lower-right characteristic vs phi1
    pub char_lower: f64,
    /// Dirichlet datum on the right triangle's characteristic vs phi2
    pub char_right: f64,
    /// transmission relation tau1'' = c nu1 at the bottom edge
    pub transmission: f64,
    /// fractional diffusion equation at interior probes of the square
    pub pde_parabolic: f64,
    /// wave equation at interior probes of the triangles
    pub pde_wave: f64,
    /// interior limits at the lateral edges vs the marched traces
    pub continuity: f64,
    /// edge fluxes recomputed by adaptive quadrature vs the marched values
    pub flux_consistency: f64,
}

impl Diagnostics {
    pub fn max_residual(&self) -> f64 {
        [
            self.nonlocal,
            self.char_lower,
            self.char_right,
            self.transmission,
            self.pde_parabolic,
            self.pde_wave,
            self.continuity,
            self.flux_consistency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn report(&self) -> String {
        format!(
            "residuals:\n  non-local condition      {:10.3e}\n  characteristic (lower)   {:10.3e}\n  characteristic (right)   {:10.3e}\n  transmission at y = 0    {:10.3e}\n  diffusion equation       {:10.3e}\n  wave equation            {:10.3e}\n  edge continuity          {:10.3e}\n  flux cross-check         {:10.3e}\n  worst                    {:10.3e}",
            self.nonlocal,
            self.char_lower,
            self.char_right,
            self.transmission,
            self.pde_parabolic,
            self.pde_wave,
            self.continuity,
            self.flux_consistency,
            self.max_residual()
        )
    }
}

pub fn verify_conditions(field: &SolutionField) -> Result<Diagnostics> {
    let spec = &field.spec;
    let tt = &field.traces;
    let n = tt.n();
    let h = tt.h;
    let m = 24usize;

    // non-local condition along u(-t, t) and u(t, -t)
    let mut nonlocal = 0.0f64;
    for k in 0..=m {
        let t = 0.5 * k as f64 / m as f64;
        let left = char_trace(CharTrace::Left, tt, t)?;
        let lower = char_trace(CharTrace::Lower, tt, t)?;
        let r = spec.a1.eval(t)? * left + spec.a2.eval(t)? * lower - spec.a3.eval(t)?;
        nonlocal = nonlocal.max(r.abs());
    }

    // characteristic data, evaluated through the d'Alembert formulas
    let mut char_lower = 0.0f64;
    for k in 0..=m {
        let x = 0.5 + 0.5 * k as f64 / m as f64;
        let u = dalembert_eval(Domain::Omega1, tt, x, x - 1.0)?;
        char_lower = char_lower.max((u - spec.phi1.eval(x)?).abs());
    }
    let mut char_right = 0.0f64;
    for k in 0..=m {
        let t = 0.5 * k as f64 / m as f64;
        let u = dalembert_eval(Domain::Omega3, tt, 1.0 + t, t)?;
        char_right = char_right.max((u - spec.phi2.eval(t)?).abs());
    }

    // transmission: second difference of tau1 against the wave-side flux
    let mut transmission = 0.0f64;
    for k in 1..n {
        let second = (tt.tau1p[k + 1] - tt.tau1p[k - 1]) / (2.0 * h);
        transmission = transmission.max((second - field.coupling * tt.nu1[k]).abs());
    }

    // fractional diffusion equation at interior probes: L1 derivative of the
    // field down a vertical line against the central second x-difference
    let mut pde_parabolic = 0.0f64;
    {
        let ny = 24usize;
        let hy = 1.0 / ny as f64;
        let ys: Vec<f64> = (1..=ny).map(|k| k as f64 * hy).collect();
        let dx = 0.02;
        for &x in &[0.3, 0.7] {
            let mut lines = Vec::new();
            for &xx in &[x - dx, x, x + dx] {
                let mut line = vec![crate::hyperbolic::interp(&tt.tau1, xx)];
                line.extend(field.eval_square_line(xx, &ys)?);
                lines.push(line);
            }
            let dfrac = caputo_l1(&lines[1], hy, spec.lambda)?;
            // skip the first nodes: the L1 kernel sees the y^lambda start-up
            // layer there and the comparison would measure it, not the field
            for k in (ny / 2)..=ny {
                let uxx = (lines[0][k] - 2.0 * lines[1][k] + lines[2][k]) / (dx * dx);
                pde_parabolic = pde_parabolic.max((dfrac[k] - uxx).abs());
            }
        }
    }

    // wave equation at interior probes of each triangle
    let mut pde_wave = 0.0f64;
    for &(d, x, y) in &[
        (Domain::Omega1, 0.5, -0.25),
        (Domain::Omega1, 0.35, -0.1),
        (Domain::Omega2, -0.2, 0.5),
        (Domain::Omega2, -0.1, 0.75),
        (Domain::Omega3, 1.2, 0.5),
        (Domain::Omega3, 1.1, 0.3),
    ] {
        pde_wave = pde_wave.max(wave_residual(d, tt, x, y, 0.02)?.abs());
    }

    // lateral-edge continuity: first-order Taylor test of the interior
    // representation against the marched trace and flux
    let mut continuity = 0.0f64;
    {
        let delta = 0.02;
        for k in (n / 8..=n).step_by(n / 8) {
            let y = k as f64 * h;
            let ul = field.eval_square(delta, y)?;
            let ur = field.eval_square(1.0 - delta, y)?;
            continuity = continuity
                .max((ul - (tt.tau2[k] + delta * tt.nu2[k])).abs())
                .max((ur - (tt.tau3[k] - delta * tt.nu3[k])).abs());
        }
    }

    // fluxes recomputed with adaptive quadrature instead of product weights;
    // rebuilt from the trace table so tampered tables are caught too
    let idx = [n / 4, n / 2, n];
    let sys = TraceSystem {
        kernels: &field.kernels,
        tau1: &tt.tau1,
        tau1p: &tt.tau1p,
        nu1: &tt.nu1,
        a1: &spec.a1,
        a2: &spec.a2,
        a3: &spec.a3,
        phi2: &spec.phi2,
        tau30: tt.tau3[0],
    };
    let sol = TraceSolution {
        h,
        tau20: tt.tau2[0],
        tau30: tt.tau3[0],
        mu2: tt.mu2.clone(),
        mu3: tt.mu3.clone(),
        tau2: tt.tau2.clone(),
        tau3: tt.tau3.clone(),
        nu2: tt.nu2.clone(),
        nu3: tt.nu3.clone(),
        f1: Vec::new(),
        f2: Vec::new(),
    };
    let cc = cross_check_fluxes(&sys, &sol, &idx)?;
    let mut flux_consistency = 0.0f64;
    for (&j, &(n2, n3)) in idx.iter().zip(cc.iter()) {
        flux_consistency =
            flux_consistency.max((n2 - tt.nu2[j]).abs()).max((n3 - tt.nu3[j]).abs());
    }

    Ok(Diagnostics {
        nonlocal,
        char_lower,
        char_right,
        transmission,
        pde_parabolic,
        pde_wave,
        continuity,
        flux_consistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_spec(lambda: f64) -> ProblemSpec {
        // u = 1 everywhere: phi1 = phi2 = 1, 2 u(-t,t) + u(t,-t) = 3
        ProblemSpec {
            lambda,
            phi1: Func::constant(1.0),
            phi2: Func::constant(1.0),
            a1: Func::constant(2.0),
            a2: Func::constant(1.0),
            a3: Func::constant(3.0),
            coupling: None,
        }
    }

    fn linear_spec(lambda: f64) -> ProblemSpec {
        // u = x: phi1(x) = x, phi2(t) = 1 + t, u(-t,t) + u(t,-t) = 0
        ProblemSpec {
            lambda,
            phi1: Func::from_expr("t", "t").unwrap(),
            phi2: Func::from_expr("1 + t", "t").unwrap(),
            a1: Func::constant(1.0),
            a2: Func::constant(1.0),
            a3: Func::constant(0.0),
            coupling: None,
        }
    }

    #[test]
    fn flat_solution_end_to_end() {
        let config = DiscretizationConfig { n: 64, ..Default::default() };
        for &lambda in &[1.0, 0.6] {
            let field = solve_problem(&flat_spec(lambda), &config).unwrap();
            for &(x, y) in &[
                (0.5, 0.5),
                (0.1, 0.9),
                (0.9, 0.05),
                (0.5, -0.3),
                (-0.3, 0.5),
                (1.3, 0.5),
                (0.0, 0.4),
                (0.5, 0.0),
            ] {
                let p = field.eval(x, y).unwrap();
                assert!(
                    (p.u - 1.0).abs() < 1e-3,
                    "lambda={lambda} u({x},{y}) = {} [{}]",
                    p.u,
                    p.domain.tag()
                );
            }
        }
    }

    #[test]
    fn linear_solution_end_to_end() {
        let config = DiscretizationConfig { n: 64, ..Default::default() };
        let field = solve_problem(&linear_spec(0.5), &config).unwrap();
        for &(x, y) in &[
            (0.5, 0.5),
            (0.25, 0.8),
            (0.75, 0.1),
            (0.5, -0.3),
            (-0.25, 0.4),
            (1.25, 0.4),
        ] {
            let p = field.eval(x, y).unwrap();
            assert!((p.u - x).abs() < 3e-3, "u({x},{y}) = {} [{}]", p.u, p.domain.tag());
        }
    }

    #[test]
    fn flat_solution_verifies() {
        let config = DiscretizationConfig { n: 64, ..Default::default() };
        let field = solve_problem(&flat_spec(0.6), &config).unwrap();
        let d = verify_conditions(&field).unwrap();
        assert!(d.nonlocal < 1e-3, "{}", d.report());
        assert!(d.char_lower < 1e-3, "{}", d.report());
        assert!(d.char_right < 1e-3, "{}", d.report());
        assert!(d.transmission < 1e-3, "{}", d.report());
        assert!(d.pde_wave < 1e-3, "{}", d.report());
    }

    #[test]
    fn rejects_invalid_order() {
        let mut s = flat_spec(0.5);
        s.lambda = 1.5;
        assert!(solve_problem(&s, &DiscretizationConfig::default()).is_err());
        s.lambda = 0.0;
        assert!(solve_problem(&s, &DiscretizationConfig::default()).is_err());
    }
}
