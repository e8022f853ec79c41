//! Problem-data functions: expression-backed or sampled tables.
//!
//! Boundary data and coupling coefficients enter the solver only through
//! point evaluation of the function and its first derivative, so both storage
//! forms sit behind one descriptor.

use crate::error::{Error, Result};
use crate::exprlang::{parse, Expr};

#[derive(Debug, Clone)]
pub enum Func {
    /// Parsed expression plus its symbolic derivative.
    Expr { f: Expr, df: Expr, src: String, var: String },
    /// Uniformly sampled values and derivative values on [lo, hi],
    /// evaluated by linear interpolation.
    Table { lo: f64, hi: f64, values: Vec<f64>, derivs: Vec<f64> },
}

impl Func {
    pub fn from_expr(src: &str, var: &str) -> Result<Self> {
        let f = parse(src, var)?;
        let df = f.differentiate()?;
        Ok(Func::Expr { f, df, src: src.to_owned(), var: var.to_owned() })
    }

    pub fn constant(c: f64) -> Self {
        Func::Expr {
            f: Expr::Const(c),
            df: Expr::Const(0.0),
            src: format!("{c}"),
            var: "t".to_owned(),
        }
    }

    pub fn from_table(lo: f64, hi: f64, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() != derivs.len() || !(hi > lo) {
            return Err(Error::InvalidProblem(format!(
                "table function needs matching values/derivs (>= 2 samples) and hi > lo, got {} / {} on [{lo}, {hi}]",
                values.len(),
                derivs.len()
            )));
        }
        Ok(Func::Table { lo, hi, values, derivs })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Func::Expr { f, .. } => f.eval(t),
            Func::Table { lo, hi, values, .. } => interp(*lo, *hi, values, t),
        }
    }

    pub fn deriv(&self, t: f64) -> Result<f64> {
        match self {
            Func::Expr { df, .. } => df.eval(t),
            Func::Table { lo, hi, derivs, .. } => interp(*lo, *hi, derivs, t),
        }
    }

    /// Human-readable form for diagnostics reports.
    pub fn describe(&self) -> String {
        match self {
            Func::Expr { src, .. } => src.clone(),
            Func::Table { lo, hi, values, .. } => {
                format!("table[{} samples on [{lo}, {hi}]]", values.len())
            }
        }
    }
}

fn interp(lo: f64, hi: f64, v: &[f64], t: f64) -> Result<f64> {
    let slack = 1e-12 * (hi - lo);
    if t < lo - slack || t > hi + slack {
        return Err(Error::OutOfDomain(format!(
            "table argument {t} outside [{lo}, {hi}]"
        )));
    }
    let n = v.len() - 1;
    let s = ((t - lo) / (hi - lo) * n as f64).clamp(0.0, n as f64);
    let k = (s.floor() as usize).min(n - 1);
    let w = s - k as f64;
    Ok(v[k] * (1.0 - w) + v[k + 1] * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expr_func_eval_deriv() {
        let f = Func::from_expr("t^2 + 1", "t").unwrap();
        assert_abs_diff_eq!(f.eval(2.0).unwrap(), 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.deriv(2.0).unwrap(), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn table_func_linear_exact() {
        let n = 11;
        let values: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 / (n - 1) as f64 - 0.5).collect();
        let derivs = vec![2.0; n];
        let f = Func::from_table(0.0, 1.0, values, derivs).unwrap();
        assert_abs_diff_eq!(f.eval(0.333).unwrap(), 2.0 * 0.333 - 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.deriv(0.7).unwrap(), 2.0, epsilon = 1e-15);
        assert!(f.eval(1.5).is_err());
    }
}
