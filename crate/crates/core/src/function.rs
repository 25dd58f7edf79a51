//! Target functions the operator can be applied to.
//!
//! Every built-in catalog entry is a member of the exponential-polynomial
//! family `Re sum_j p_j(t) e^{z_j t}` with complex coefficients and rates.
//! That family is closed under differentiation and multiplication, and its
//! Gamma-kernel expectations have closed forms, so the whole catalog avoids
//! quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Growth class of a target function on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Polynomial { order: u32 },
    Exponential { rate: f64 },
}

impl Growth {
    /// Exponential rate `A`, zero for sub-exponential classes.
    pub fn rate(&self) -> f64 {
        match *self {
            Growth::Exponential { rate } => rate,
            _ => 0.0,
        }
    }
}

/// One term `p(t) e^{rate t}` of an [`ExpPoly`]; `coeffs[k]` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyTerm {
    pub coeffs: Vec<Complex64>,
    pub rate: Complex64,
}

impl ExpPolyTerm {
    pub fn new(coeffs: Vec<Complex64>, rate: Complex64) -> Self {
        let mut term = Self { coeffs, rate };
        term.trim();
        term
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn eval_complex(&self, t: f64) -> Complex64 {
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c);
        if self.rate == Complex64::new(0.0, 0.0) {
            poly
        } else {
            poly * (self.rate * t).exp()
        }
    }

    fn derivative(&self) -> Self {
        // (p' + z p) e^{zt}
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += self.rate * c;
            if k > 0 {
                out[k - 1] += c * k as f64;
            }
        }
        Self::new(out, self.rate)
    }

    fn multiply(&self, other: &Self, conjugate_other: bool) -> Self {
        let (oc, orate): (Vec<Complex64>, Complex64) = if conjugate_other {
            (other.coeffs.iter().map(|c| c.conj()).collect(), other.rate.conj())
        } else {
            (other.coeffs.clone(), other.rate)
        };
        if self.is_zero() || oc.is_empty() {
            return Self::new(Vec::new(), self.rate + orate);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + oc.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in oc.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out, self.rate + orate)
    }
}

/// `f(t) = Re sum_j p_j(t) e^{z_j t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub terms: Vec<ExpPolyTerm>,
}

impl ExpPoly {
    pub fn new(terms: Vec<ExpPolyTerm>) -> Self {
        Self {
            terms: terms.into_iter().filter(|t| !t.is_zero()).collect(),
        }
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::new(vec![ExpPolyTerm::new(
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
            Complex64::new(0.0, 0.0),
        )])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval_complex(t).re).sum()
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.terms.iter().map(ExpPolyTerm::derivative).collect())
    }

    /// Pointwise product. Uses `Re(a) Re(b) = (Re(ab) + Re(a conj(b))) / 2`.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut direct = a.multiply(b, false);
                let mut mixed = a.multiply(b, true);
                for c in direct.coeffs.iter_mut().chain(mixed.coeffs.iter_mut()) {
                    *c *= 0.5;
                }
                terms.push(direct);
                terms.push(mixed);
            }
        }
        Self::new(terms)
    }

    /// True when every term has a zero rate, i.e. the function is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.rate == Complex64::new(0.0, 0.0))
    }

    /// Real polynomial coefficients when [`is_polynomial`](Self::is_polynomial).
    pub fn polynomial_coeffs(&self) -> Option<Vec<f64>> {
        if !self.is_polynomial() {
            return None;
        }
        let len = self.terms.iter().map(|t| t.coeffs.len()).max().unwrap_or(0);
        let mut out = vec![0.0; len];
        for t in &self.terms {
            for (k, c) in t.coeffs.iter().enumerate() {
                out[k] += c.re;
            }
        }
        Some(out)
    }

    pub fn growth(&self) -> Growth {
        let max_rate = self.terms.iter().map(|t| t.rate.re).fold(f64::NEG_INFINITY, f64::max);
        if self.terms.is_empty() || max_rate < 0.0 {
            return Growth::Bounded;
        }
        if max_rate > 0.0 {
            return Growth::Exponential { rate: max_rate };
        }
        let order = self
            .terms
            .iter()
            .filter(|t| t.rate.re == 0.0)
            .map(|t| t.degree())
            .max()
            .unwrap_or(0) as u32;
        if order == 0 {
            Growth::Bounded
        } else {
            Growth::Polynomial { order }
        }
    }
}

/// Tabulated function with linear interpolation and constant continuation
/// outside the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid("abscissae and values differ in length"));
        }
        if xs.len() < 2 {
            return Err(Error::invalid("a sampled function needs at least two points"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled data must be finite"));
        }
        if xs[0] < 0.0 {
            return Err(Error::invalid("sampled abscissae must be non-negative"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::UnsortedAbscissae);
        }
        Ok(Self { xs, ys })
    }

    /// Parses `x,y` lines. Blank lines, `#` comments and one leading
    /// non-numeric header line are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut header_allowed = true;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(Error::parse(idx + 1, "expected two comma-separated fields")),
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if header_allowed && xs.is_empty() => {}
                _ => return Err(Error::parse(idx + 1, format!("not a number pair: {line}"))),
            }
            header_allowed = false;
        }
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn sup_abs(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.range();
        if t <= lo {
            return self.ys[0];
        }
        if t >= hi {
            return *self.ys.last().unwrap();
        }
        let k = self.xs.partition_point(|&x| x <= t) - 1;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let w = (t - x0) / (x1 - x0);
        self.ys[k] * (1.0 - w) + self.ys[k + 1] * w
    }
}

/// A target function `f` for the operator.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetFunction {
    /// `t^m`
    Monomial(u32),
    /// `sum_k c_k t^k`, ascending coefficients.
    Polynomial(Vec<f64>),
    /// `e^{-c t}`
    ExpDecay(f64),
    /// `t^2 sin(pi t)`
    X2SinPi,
    /// `t e^{-7t}`
    XExpM7,
    /// `(t^2 + 1) e^t`
    QuadExp,
    /// Arbitrary member of the closed-form family (products, derivatives).
    ExpPoly(ExpPoly),
    Sampled(SampledFunction),
}

impl TargetFunction {
    /// The six catalog entries used by sweeps and the acceptance grid.
    pub fn catalog() -> Vec<TargetFunction> {
        vec![
            TargetFunction::Monomial(2),
            TargetFunction::Polynomial(vec![1.0, -2.0, 0.5, 0.25]),
            TargetFunction::ExpDecay(1.0),
            TargetFunction::X2SinPi,
            TargetFunction::XExpM7,
            TargetFunction::QuadExp,
        ]
    }

    pub fn constant(c: f64) -> Self {
        TargetFunction::Polynomial(vec![c])
    }

    /// Closed-form representation, `None` for sampled data.
    pub fn closed_form(&self) -> Option<ExpPoly> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let zero = c(0.0, 0.0);
        Some(match self {
            TargetFunction::Monomial(m) => {
                let mut coeffs = vec![zero; *m as usize + 1];
                coeffs[*m as usize] = c(1.0, 0.0);
                ExpPoly::new(vec![ExpPolyTerm::new(coeffs, zero)])
            }
            TargetFunction::Polynomial(coeffs) => ExpPoly::polynomial(coeffs),
            TargetFunction::ExpDecay(rate) => ExpPoly::new(vec![ExpPolyTerm::new(vec![c(1.0, 0.0)], c(-rate, 0.0))]),
            // t^2 sin(pi t) = Re(-i t^2 e^{i pi t})
            TargetFunction::X2SinPi => ExpPoly::new(vec![ExpPolyTerm::new(vec![zero, zero, c(0.0, -1.0)], c(0.0, PI))]),
            TargetFunction::XExpM7 => ExpPoly::new(vec![ExpPolyTerm::new(vec![zero, c(1.0, 0.0)], c(-7.0, 0.0))]),
            TargetFunction::QuadExp => ExpPoly::new(vec![ExpPolyTerm::new(
                vec![c(1.0, 0.0), zero, c(1.0, 0.0)],
                c(1.0, 0.0),
            )]),
            TargetFunction::ExpPoly(e) => e.clone(),
            TargetFunction::Sampled(_) => return None,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TargetFunction::Monomial(m) => t.powi(*m as i32),
            TargetFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a),
            TargetFunction::ExpDecay(rate) => (-rate * t).exp(),
            TargetFunction::X2SinPi => t * t * (PI * t).sin(),
            TargetFunction::XExpM7 => t * (-7.0 * t).exp(),
            TargetFunction::QuadExp => (t * t + 1.0) * t.exp(),
            TargetFunction::ExpPoly(e) => e.eval(t),
            TargetFunction::Sampled(s) => s.eval(t),
        }
    }

    /// Analytic derivative of the given order.
    pub fn derivative(&self, order: u32) -> Result<TargetFunction> {
        let mut e = self
            .closed_form()
            .ok_or_else(|| Error::MissingDerivative(self.to_string()))?;
        for _ in 0..order {
            e = e.derivative();
        }
        Ok(TargetFunction::ExpPoly(e))
    }

    /// Pointwise product, available within the closed-form family.
    pub fn product(&self, other: &TargetFunction) -> Result<TargetFunction> {
        match (self.closed_form(), other.closed_form()) {
            (Some(a), Some(b)) => Ok(TargetFunction::ExpPoly(a.multiply(&b))),
            _ => Err(Error::invalid("products of sampled functions are not supported")),
        }
    }

    pub fn growth(&self) -> Growth {
        match self {
            TargetFunction::Sampled(_) => Growth::Bounded,
            other => other.closed_form().map(|e| e.growth()).unwrap_or(Growth::Bounded),
        }
    }

    pub fn has_derivatives(&self) -> bool {
        !matches!(self, TargetFunction::Sampled(_))
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFunction::Monomial(m) => write!(f, "monomial:{m}"),
            TargetFunction::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            TargetFunction::ExpDecay(rate) => write!(f, "exp_decay:{rate}"),
            TargetFunction::X2SinPi => write!(f, "x2_sin_pi"),
            TargetFunction::XExpM7 => write!(f, "x_exp_m7"),
            TargetFunction::QuadExp => write!(f, "quad_exp"),
            TargetFunction::ExpPoly(e) => write!(f, "exp_poly[{} terms]", e.terms.len()),
            TargetFunction::Sampled(s) => write!(f, "sampled[{} points]", s.xs().len()),
        }
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    /// Accepts `monomial:m`, `t^m`, `poly:c0,c1,...`, `const:c`,
    /// `exp_decay:c`, `x2_sin_pi`, `x_exp_m7` and `quad_exp`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::parse(1, format!("{msg}: {s:?}"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            let v: f64 = a
                .ok_or_else(|| bad("missing argument"))?
                .parse()
                .map_err(|_| bad("argument is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad("argument must be finite"))
            }
        };
        let order = |a: &str| -> Result<u32> {
            let m: u32 = a.parse().map_err(|_| bad("order is not a non-negative integer"))?;
            if m > 64 {
                return Err(bad("monomial order above 64"));
            }
            Ok(m)
        };
        match head {
            "monomial" => Ok(TargetFunction::Monomial(order(
                arg.ok_or_else(|| bad("missing order"))?,
            )?)),
            "poly" => {
                let list = arg.ok_or_else(|| bad("missing coefficients"))?;
                let coeffs = list
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("coefficient is not a number"))?;
                if coeffs.is_empty() || coeffs.len() > 65 || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(bad("need 1 to 65 finite coefficients"));
                }
                Ok(TargetFunction::Polynomial(coeffs))
            }
            "const" => Ok(TargetFunction::constant(number(arg)?)),
            "exp_decay" => Ok(TargetFunction::ExpDecay(number(arg)?)),
            "x2_sin_pi" if arg.is_none() => Ok(TargetFunction::X2SinPi),
            "x_exp_m7" if arg.is_none() => Ok(TargetFunction::XExpM7),
            "quad_exp" if arg.is_none() => Ok(TargetFunction::QuadExp),
            _ => {
                if let Some(m) = s.strip_prefix("t^") {
                    return Ok(TargetFunction::Monomial(order(m.trim())?));
                }
                Err(bad("unknown function"))
            }
        }
    }
}
