//! Tiny expression language for problem data supplied in config files.
//!
//! Grammar (usual precedence, `^` binds tightest and is right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-')* power
//! power  := atom ('^' factor)?
//! atom   := number | 'pi' | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! One free variable (name chosen by the caller), functions exp, log, sin,
//! cos, sqrt. Symbolic differentiation supports `^` only for constant
//! exponents, which is all the boundary-data derivatives require.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            UnaryFn::Exp => x.exp(),
            UnaryFn::Log => x.ln(),
            UnaryFn::Sin => x.sin(),
            UnaryFn::Cos => x.cos(),
            UnaryFn::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(UnaryFn, Box<Expr>),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { offset: self.pos, msg: msg.into() }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?; // right-associative, allows -2 exponents
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.bump() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // exponent suffix: 1e-3, 2.5E+4
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut p = self.pos + 1;
            if p < self.src.len() && (self.src[p] == b'+' || self.src[p] == b'-') {
                p += 1;
            }
            if p < self.src.len() && self.src[p].is_ascii_digit() {
                self.pos = p;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Syntax { offset: start, msg: format!("bad number `{text}`") })
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned();
        if name == self.var {
            return Ok(Expr::Var);
        }
        if name == "pi" {
            return Ok(Expr::Const(std::f64::consts::PI));
        }
        let f = match name.as_str() {
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "sqrt" => UnaryFn::Sqrt,
            _ => return Err(Error::UnknownIdentifier(name)),
        };
        if self.peek() != Some(b'(') {
            return Err(self.err(format!("function `{}` needs parenthesized argument", f.name())));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.bump() != Some(b')') {
            return Err(self.err("expected `)`"));
        }
        Ok(Expr::Call(f, Box::new(arg)))
    }
}

/// Parse `src` with a single free variable named `var`.
pub fn parse(src: &str, var: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, var };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.eval_raw(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("non-finite value at argument {x}")))
        }
    }

    fn eval_raw(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval_raw(x) + b.eval_raw(x),
            Expr::Sub(a, b) => a.eval_raw(x) - b.eval_raw(x),
            Expr::Mul(a, b) => a.eval_raw(x) * b.eval_raw(x),
            Expr::Div(a, b) => a.eval_raw(x) / b.eval_raw(x),
            Expr::Pow(a, b) => a.eval_raw(x).powf(b.eval_raw(x)),
            Expr::Neg(a) => -a.eval_raw(x),
            Expr::Call(f, a) => f.apply(a.eval_raw(x)),
        }
    }

    /// Symbolic derivative with respect to the free variable, with light
    /// constant folding so simple data like `t^2` differentiates to `2 * t`.
    pub fn differentiate(&self) -> Result<Expr> {
        let d = match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Add(a, b) => add(a.differentiate()?, b.differentiate()?),
            Expr::Sub(a, b) => sub(a.differentiate()?, b.differentiate()?),
            Expr::Mul(a, b) => add(
                mul(a.differentiate()?, (**b).clone()),
                mul((**a).clone(), b.differentiate()?),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.differentiate()?, (**b).clone()),
                    mul((**a).clone(), b.differentiate()?),
                ),
                Expr::Pow(b.clone(), Box::new(Expr::Const(2.0))),
            ),
            Expr::Pow(a, b) => match **b {
                Expr::Const(p) => {
                    let reduced = if p - 1.0 == 1.0 {
                        (**a).clone()
                    } else {
                        Expr::Pow(a.clone(), Box::new(Expr::Const(p - 1.0)))
                    };
                    mul(mul(Expr::Const(p), reduced), a.differentiate()?)
                }
                _ => {
                    return Err(Error::UnsupportedDerivative(
                        "non-constant exponent".to_owned(),
                    ))
                }
            },
            Expr::Neg(a) => neg(a.differentiate()?),
            Expr::Call(f, a) => {
                let outer = match f {
                    UnaryFn::Exp => Expr::Call(UnaryFn::Exp, a.clone()),
                    UnaryFn::Log => div(Expr::Const(1.0), (**a).clone()),
                    UnaryFn::Sin => Expr::Call(UnaryFn::Cos, a.clone()),
                    UnaryFn::Cos => neg(Expr::Call(UnaryFn::Sin, a.clone())),
                    UnaryFn::Sqrt => div(
                        Expr::Const(0.5),
                        Expr::Call(UnaryFn::Sqrt, a.clone()),
                    ),
                };
                mul(outer, a.differentiate()?)
            }
        };
        Ok(d)
    }

    /// Render using the variable name `var`; `parse(pretty(e), var)` evaluates
    /// identically to `e`, and printing is a fixed point on parsed output.
    pub fn pretty(&self, var: &str) -> String {
        let mut s = String::new();
        self.fmt_prec(var, 0, &mut s);
        s
    }

    fn fmt_prec(&self, var: &str, prec: u8, out: &mut String) {
        use fmt::Write;
        let my = match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        };
        let wrap = my < prec;
        if wrap {
            out.push('(');
        }
        match self {
            Expr::Const(c) => {
                let _ = write!(out, "{c}");
            }
            Expr::Var => out.push_str(var),
            Expr::Add(a, b) => {
                a.fmt_prec(var, 1, out);
                out.push_str(" + ");
                b.fmt_prec(var, 2, out);
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(var, 1, out);
                out.push_str(" - ");
                b.fmt_prec(var, 2, out);
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(var, 2, out);
                out.push_str(" * ");
                b.fmt_prec(var, 3, out);
            }
            Expr::Div(a, b) => {
                a.fmt_prec(var, 2, out);
                out.push_str(" / ");
                b.fmt_prec(var, 3, out);
            }
            Expr::Pow(a, b) => {
                a.fmt_prec(var, 5, out);
                out.push_str("^");
                b.fmt_prec(var, 4, out);
            }
            Expr::Neg(a) => {
                out.push('-');
                a.fmt_prec(var, 3, out);
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.fmt_prec(var, 0, out);
                out.push(')');
            }
        }
        if wrap {
            out.push(')');
        }
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(c), _) if *c == 0.0 => b,
        (_, Expr::Const(c)) if *c == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (_, Expr::Const(c)) if *c == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(c), _) if *c == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(c)) if *c == 0.0 => Expr::Const(0.0),
        (Expr::Const(c), _) if *c == 1.0 => b,
        (_, Expr::Const(c)) if *c == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(c), _) if *c == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(c)) if *c == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match &a {
        Expr::Const(x) => Expr::Const(-x),
        _ => Expr::Neg(Box::new(a)),
    }
}
