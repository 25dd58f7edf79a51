//! Basis weights, Gamma-kernel integrals and evaluation of the operator
//!
//! ```text
//! U(f; x) = sum_i r_i(x) * n * int_0^inf e^{-nu} (nu)^i / i! f(u) du
//! ```
//!
//! The weight `r_i(x) = (1 + n a)^{-x/a} (a + 1/n)^{-i} x(x+a)...(x+(i-1)a) / i!`
//! is the negative binomial mass with size `x/a` and mean `n x`, which turns
//! into the Poisson mass with mean `n x` as `a -> 0`. Each inner integral is
//! the expectation of `f` under a Gamma law with shape `i + 1` and rate `n`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{ExpPoly, SampledFunction, TargetFunction};
use crate::quadrature::{GaussLegendre, QuadraturePolicy};
use crate::special::{self, CompensatedSum};

/// Below `DEGENERATE_SCALE / n` the step parameter is treated as zero.
pub const DEGENERATE_SCALE: f64 = 1e-12;

/// Operator index `n` and step parameter `alpha`, with `0 <= alpha <= 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorParams {
    n: u64,
    alpha: f64,
    degenerate: bool,
}

impl OperatorParams {
    pub fn new(n: u64, alpha: f64) -> Result<Self> {
        let nf = n as f64;
        // a few ulps of slack so that alpha = 1/n typed as a decimal is accepted
        if n == 0 || !alpha.is_finite() || alpha < 0.0 || alpha * nf > 1.0 + 4.0 * f64::EPSILON {
            return Err(Error::InadmissibleParams { n, alpha });
        }
        Ok(Self {
            n,
            alpha,
            degenerate: alpha < DEGENERATE_SCALE / nf,
        })
    }

    /// `alpha = 1/n`, the largest admissible step.
    pub fn max_alpha(n: u64) -> Result<Self> {
        Self::new(n, 1.0 / n as f64)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True when the Poisson limit branch is used.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Ratio limit `n a / (1 + n a)` of consecutive weights; zero in the
    /// Poisson branch.
    pub fn geometric_ratio(&self) -> f64 {
        if self.degenerate {
            0.0
        } else {
            let na = self.nf() * self.alpha;
            na / (1.0 + na)
        }
    }
}

/// Truncation rule for the index series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPolicy {
    /// Weight mass that may be left out.
    pub eps_tail: f64,
    /// Largest index ever visited.
    pub i_cap: usize,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            eps_tail: 1e-12,
            i_cap: 10_000_000,
        }
    }
}

impl SeriesPolicy {
    pub fn new(eps_tail: f64, i_cap: usize) -> Result<Self> {
        let p = Self { eps_tail, i_cap };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tail > 0.0 && self.eps_tail < 1.0) {
            return Err(Error::invalid("eps_tail must lie in (0, 1)"));
        }
        if self.i_cap == 0 {
            return Err(Error::invalid("i_cap must be positive"));
        }
        Ok(())
    }

    // Relative size below which a single term of a weighted sum is dropped.
    fn term_tolerance(&self) -> f64 {
        (self.eps_tail * 1e-5).max(1e-18)
    }
}

fn check_point(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativePoint(x))
    }
}

fn ln_weight(params: &OperatorParams, x: f64, i: u64) -> f64 {
    let mean = params.nf() * x;
    if x == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if params.degenerate {
        special::ln_poisson_pmf(i, mean)
    } else {
        special::ln_negative_binomial_pmf(i, x / params.alpha, mean)
    }
}

/// The basis weight `r_i(x)`.
pub fn basis_weight(params: &OperatorParams, x: f64, i: u64) -> Result<f64> {
    check_point(x)?;
    Ok(ln_weight(params, x, i).exp())
}

/// Leading weights `r_0, r_1, ...` whose mass reaches `1 - eps_tail`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisWeightSet {
    pub x: f64,
    /// `weights[i]` is `r_i(x)`.
    pub weights: Vec<f64>,
    pub tail_mass_bound: f64,
}

impl BasisWeightSet {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().copied().enumerate()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }
}

/// Weights from `i = 0` until the mass is at least `1 - eps_tail` and the index
/// has passed the mean `n x`.
pub fn basis_weights_truncated(params: &OperatorParams, x: f64, policy: &SeriesPolicy) -> Result<BasisWeightSet> {
    check_point(x)?;
    policy.validate()?;
    if x == 0.0 {
        return Ok(BasisWeightSet {
            x,
            weights: vec![1.0],
            tail_mass_bound: 0.0,
        });
    }
    let mean = params.nf() * x;
    let mut weights = Vec::new();
    let mut mass = CompensatedSum::new();
    for i in 0..policy.i_cap {
        let w = ln_weight(params, x, i as u64).exp();
        weights.push(w);
        mass.add(w);
        if mass.value() >= 1.0 - policy.eps_tail && i as f64 > mean {
            let m = mass.value();
            return Ok(BasisWeightSet {
                x,
                weights,
                tail_mass_bound: (1.0 - m).max(0.0),
            });
        }
    }
    Err(Error::TruncationFailure {
        achieved_mass: mass.value(),
        cap: policy.i_cap,
    })
}

/// `int_0^inf e^{-nu} (nu)^i / i! u^m du = (i+m)! / (i! n^{m+1})`.
pub fn kernel_integral(n: u64, i: u64, m: u32) -> f64 {
    let nf = n as f64;
    let ln_rising: f64 = (1..=m as u64).map(|k| ((i + k) as f64).ln()).sum();
    let ln_value = ln_rising - (m as f64 + 1.0) * nf.ln();
    if ln_value.abs() < 600.0 {
        // direct product keeps every digit for moderate sizes
        let mut v = 1.0 / nf;
        for k in 1..=m as u64 {
            v *= (i + k) as f64 / nf;
        }
        v
    } else {
        ln_value.exp()
    }
}

/// Operator value with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Combined truncation, quadrature and rounding estimate.
    pub error_estimate: f64,
    /// Number of index terms summed.
    pub terms: usize,
    /// Sampled data was continued as a constant past its range.
    pub extrapolated: bool,
}

/// `U(f; x)`.
pub fn apply(
    params: &OperatorParams,
    f: &TargetFunction,
    x: f64,
    series: &SeriesPolicy,
    quad: &QuadraturePolicy,
) -> Result<Evaluation> {
    check_point(x)?;
    series.validate()?;
    match f {
        TargetFunction::Sampled(s) => {
            quad.validate()?;
            apply_sampled(params, s, x, series, quad)
        }
        other => {
            let e = other.closed_form().expect("non-sampled functions have closed forms");
            apply_exp_poly(params, &e, x, series)
        }
    }
}

/// `apply` over a list of points, in parallel, preserving order.
pub fn apply_grid(
    params: &OperatorParams,
    f: &TargetFunction,
    xs: &[f64],
    series: &SeriesPolicy,
    quad: &QuadraturePolicy,
) -> Result<Vec<Evaluation>> {
    let results: Vec<Result<Evaluation>> = xs.par_iter().map(|&x| apply(params, f, x, series, quad)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::GridPoint {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

// Precomputed per-term data: ln(s) with s = n / (n - z), and 1 / (n - z).
struct TermPlan {
    coeffs: Vec<Complex64>,
    ln_s: Complex64,
    inv_shift: Complex64,
}

fn plan_exp_poly(params: &OperatorParams, e: &ExpPoly) -> Result<Vec<TermPlan>> {
    let n = params.nf();
    let q = params.geometric_ratio();
    let mut plans = Vec::with_capacity(e.terms.len());
    for term in &e.terms {
        let z = term.rate;
        if z.re >= n {
            return Err(Error::DivergentIntegral {
                n: params.n(),
                rate: z.re,
            });
        }
        let shift = Complex64::new(n, 0.0) - z;
        let s = Complex64::new(n, 0.0) / shift;
        let ratio = q * s.norm();
        if ratio >= 1.0 {
            return Err(Error::DivergentSeries { rate: z.re, ratio });
        }
        plans.push(TermPlan {
            coeffs: term.coeffs.clone(),
            ln_s: s.ln(),
            inv_shift: shift.inv(),
        });
    }
    Ok(plans)
}

fn apply_exp_poly(params: &OperatorParams, e: &ExpPoly, x: f64, series: &SeriesPolicy) -> Result<Evaluation> {
    let plans = plan_exp_poly(params, e)?;
    if plans.is_empty() {
        return Ok(Evaluation {
            value: 0.0,
            error_estimate: 0.0,
            terms: 1,
            extrapolated: false,
        });
    }
    let mean = params.nf() * x;
    let term_tol = series.term_tolerance();
    let q = params.geometric_ratio();
    let s_max = plans.iter().map(|p| p.ln_s.re.exp()).fold(0.0, f64::max);

    let mut acc = CompensatedSum::new();
    let mut abs_acc = 0.0;
    let mut mass = CompensatedSum::new();
    let mut prev_bound = f64::INFINITY;
    for i in 0..series.i_cap {
        let ln_w = ln_weight(params, x, i as u64);
        let w = ln_w.exp();
        mass.add(w);
        let mut contrib = 0.0;
        let mut bound = 0.0;
        if ln_w > f64::NEG_INFINITY {
            let shape = (i + 1) as f64;
            for p in &plans {
                // E[G^k e^{zG}] = s^{i+1} (i+1)_k / (n - z)^k
                let lead = (Complex64::new(ln_w, 0.0) + p.ln_s * shape).exp();
                let lead_abs = lead.norm();
                let mut rising = Complex64::new(1.0, 0.0);
                let mut sum = Complex64::new(0.0, 0.0);
                let mut sum_abs = 0.0;
                for (k, c) in p.coeffs.iter().enumerate() {
                    if k > 0 {
                        rising *= p.inv_shift * (shape + (k - 1) as f64);
                    }
                    sum += c * rising;
                    sum_abs += c.norm() * rising.norm();
                }
                contrib += (lead * sum).re;
                bound += lead_abs * sum_abs;
            }
        }
        acc.add(contrib);
        abs_acc += bound;
        let done_mass = mass.value() >= 1.0 - series.eps_tail && i as f64 > mean;
        if done_mass && bound <= term_tol * abs_acc && bound <= prev_bound {
            let rho = if prev_bound.is_finite() && prev_bound > 0.0 {
                (bound / prev_bound).max(q * s_max).min(0.999)
            } else {
                q * s_max
            };
            let tail = if bound == 0.0 { 0.0 } else { bound * rho / (1.0 - rho) };
            let rounding = 8.0 * f64::EPSILON * abs_acc;
            return Ok(Evaluation {
                value: acc.value(),
                error_estimate: tail + rounding,
                terms: i + 1,
                extrapolated: false,
            });
        }
        prev_bound = bound;
    }
    Err(Error::TruncationFailure {
        achieved_mass: mass.value(),
        cap: series.i_cap,
    })
}

fn apply_sampled(
    params: &OperatorParams,
    s: &SampledFunction,
    x: f64,
    series: &SeriesPolicy,
    quad: &QuadraturePolicy,
) -> Result<Evaluation> {
    let n = params.nf();
    let mean = n * x;
    let rule = GaussLegendre::new(quad.nodes_per_panel);
    let sup = s.sup_abs();
    let (lo, hi) = s.range();
    let term_tol = series.term_tolerance();

    let mut acc = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    let mut abs_acc = 0.0;
    let mut residual = 0.0;
    let mut extrapolated = false;
    for i in 0..series.i_cap {
        let w = ln_weight(params, x, i as u64).exp();
        mass.add(w);
        if w > 0.0 {
            let shape = (i + 1) as u64;
            let mu = shape as f64 / n;
            let sigma = (shape as f64).sqrt() / n;
            let wdt = quad.window_sigmas;
            // the Gamma law is right-skewed, so the right edge gets extra room
            let a = (mu - wdt * sigma).max(0.0);
            let b = mu + wdt * sigma + wdt / n;
            let expectation = rule.integrate(|u| special::gamma_density(shape, n, u) * s.eval(u), a, b, quad.panels);
            let density_mass = rule.integrate(|u| special::gamma_density(shape, n, u), a, b, quad.panels);
            acc.add(w * expectation);
            abs_acc += w * sup;
            residual += w * (density_mass - 1.0).abs() * sup;
            if w > series.eps_tail * 1e-3 && (b > hi || a < lo) {
                extrapolated = true;
            }
        }
        if mass.value() >= 1.0 - series.eps_tail
            && i as f64 > mean
            && w * sup <= term_tol * abs_acc.max(f64::MIN_POSITIVE)
        {
            let tail = (1.0 - mass.value()).max(0.0) * sup;
            return Ok(Evaluation {
                value: acc.value(),
                error_estimate: tail + residual + 8.0 * f64::EPSILON * abs_acc,
                terms: i + 1,
                extrapolated,
            });
        }
    }
    Err(Error::TruncationFailure {
        achieved_mass: mass.value(),
        cap: series.i_cap,
    })
}
