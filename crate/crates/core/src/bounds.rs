//! Right-hand sides of the quantitative error bounds, each paired with the
//! measured error `|U(f; x) - f(x)|`.
//!
//! Moduli over `[0, inf)` are replaced by grid estimates on a finite window,
//! by default `[0, x + 1/n + 12 sqrt(Theta_2)]` where the kernel carries
//! essentially all of its mass. Free constants are caller input and are echoed
//! in every report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::TargetFunction;
use crate::moments::{central_moment, central_moment_numeric};
use crate::operator::{apply, Evaluation, OperatorParams, SeriesPolicy};
use crate::quadrature::QuadraturePolicy;
use crate::smoothness::{lipschitz_maximal, omega1, omega2, omega_restricted, weighted_modulus, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    DirectK,
    LipschitzMaximal,
    ModifiedLipschitz,
    Steklov,
    WeightedGrowth,
    QuantitativeVoronovskaya,
    Gruss,
    BoundedVariation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub x: f64,
    pub ingredients: BTreeMap<String, f64>,
    pub free_constants: BTreeMap<String, f64>,
    pub bound_value: f64,
    pub measured_error: f64,
    /// Numerical uncertainty of `measured_error`.
    pub measured_slack: f64,
    /// Interval the moduli were estimated on.
    pub modulus_domain: Option<Interval>,
}

impl BoundReport {
    fn new(theorem: Theorem, x: f64, measured: &Measured) -> Self {
        Self {
            theorem,
            x,
            ingredients: BTreeMap::new(),
            free_constants: BTreeMap::new(),
            bound_value: 0.0,
            measured_error: measured.error,
            measured_slack: measured.slack,
            modulus_domain: None,
        }
    }

    fn ingredient(&mut self, name: &str, value: f64) {
        self.ingredients.insert(name.to_string(), value);
    }

    fn constant(&mut self, name: &str, value: f64) {
        self.free_constants.insert(name.to_string(), value);
    }

    /// `measured <= bound` up to the numerical slack of the measurement.
    pub fn dominates(&self) -> bool {
        self.measured_error <= self.bound_value + self.measured_slack
    }
}

/// Numerical settings shared by the bound evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSettings {
    pub series: SeriesPolicy,
    pub quadrature: QuadraturePolicy,
    /// Grid points per modulus step; the grid resolution is `delta / steps`.
    pub steps_per_delta: usize,
    /// Kernel window half-width in units of `sqrt(Theta_2)`.
    pub window_sigmas: f64,
    /// Overrides the kernel window when set.
    pub domain: Option<Interval>,
}

impl Default for BoundSettings {
    fn default() -> Self {
        Self {
            series: SeriesPolicy::default(),
            quadrature: QuadraturePolicy::default(),
            steps_per_delta: 20,
            window_sigmas: 12.0,
            domain: None,
        }
    }
}

impl BoundSettings {
    /// Interval for the moduli at `x`.
    pub fn modulus_domain(&self, params: &OperatorParams, x: f64) -> Result<Interval> {
        if let Some(d) = self.domain {
            return Ok(d);
        }
        let theta2 = central_moment(params, x, 2)?;
        Interval::new(0.0, x + 1.0 / params.nf() + self.window_sigmas * theta2.sqrt())
    }

    fn resolution(&self, delta: f64) -> f64 {
        delta / self.steps_per_delta.max(10) as f64
    }
}

struct Measured {
    error: f64,
    slack: f64,
}

fn measure(f: &TargetFunction, params: &OperatorParams, x: f64, settings: &BoundSettings) -> Result<Measured> {
    let Evaluation {
        value, error_estimate, ..
    } = apply(params, f, x, &settings.series, &settings.quadrature)?;
    let fx = f.value(x);
    Ok(Measured {
        error: (value - fx).abs(),
        slack: error_estimate + 4.0 * f64::EPSILON * (value.abs() + fx.abs()),
    })
}

fn omega_at(f: &TargetFunction, delta: f64, domain: Interval, s: &BoundSettings) -> Result<f64> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    Ok(omega1(|t| f.value(t), delta, domain, s.resolution(delta))?.value)
}

fn omega2_at(f: &TargetFunction, delta: f64, domain: Interval, s: &BoundSettings) -> Result<f64> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    Ok(omega2(|t| f.value(t), delta, domain, s.resolution(delta))?.value)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be a positive number")))
    }
}

/// `M omega_2(f; sqrt(rho)) + omega(f; nu)` with `rho = Theta_2 + 1/n^2` and
/// `nu = Theta_1 = 1/n`.
pub fn direct_k_bound(
    f: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    m: f64,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    positive("M", m)?;
    let measured = measure(f, params, x, settings)?;
    let n = params.nf();
    let theta2 = central_moment(params, x, 2)?;
    let rho = theta2 + 1.0 / (n * n);
    let nu = central_moment(params, x, 1)?;
    let domain = settings.modulus_domain(params, x)?;
    let w2 = omega2_at(f, rho.sqrt(), domain, settings)?;
    let w1 = omega_at(f, nu, domain, settings)?;
    let mut r = BoundReport::new(Theorem::DirectK, x, &measured);
    r.ingredient("theta2", theta2);
    r.ingredient("rho", rho);
    r.ingredient("nu", nu);
    r.ingredient("omega2_sqrt_rho", w2);
    r.ingredient("omega_nu", w1);
    r.constant("M", m);
    r.bound_value = m * w2 + w1;
    r.modulus_domain = Some(domain);
    Ok(r)
}

/// `kappa_r(f, x) Theta_2^{r/2}`.
pub fn lipschitz_maximal_bound(
    f: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    r: f64,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    let measured = measure(f, params, x, settings)?;
    let theta2 = central_moment(params, x, 2)?;
    let domain = settings.modulus_domain(params, x)?;
    let res = (theta2.sqrt() / 50.0).min(domain.width() / 2000.0);
    let kappa = lipschitz_maximal(|t| f.value(t), x, r, domain, res)?;
    let mut rep = BoundReport::new(Theorem::LipschitzMaximal, x, &measured);
    rep.ingredient("theta2", theta2);
    rep.ingredient("kappa", kappa);
    rep.constant("r", r);
    rep.bound_value = kappa * theta2.powf(r / 2.0);
    rep.modulus_domain = Some(domain);
    Ok(rep)
}

/// `M (Theta_2 / (x (x lambda1 + lambda2)))^{s/2}` for `f` in the modified
/// Lipschitz class with those parameters.
#[allow(clippy::too_many_arguments)]
pub fn modified_lipschitz_bound(
    f: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    m: f64,
    lambda1: f64,
    lambda2: f64,
    s: f64,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    positive("M", m)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("s must lie in (0, 1]"));
    }
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) || (lambda1 == 0.0 && lambda2 == 0.0) {
        return Err(Error::invalid(
            "lambda1, lambda2 must be non-negative and not both zero",
        ));
    }
    let denom = x * (x * lambda1 + lambda2);
    if !(denom > 0.0) {
        return Err(Error::SingularDenominator("x (x lambda1 + lambda2) vanishes"));
    }
    let measured = measure(f, params, x, settings)?;
    let theta2 = central_moment(params, x, 2)?;
    let mut r = BoundReport::new(Theorem::ModifiedLipschitz, x, &measured);
    r.ingredient("theta2", theta2);
    r.ingredient("denominator", denom);
    r.constant("M", m);
    r.constant("lambda1", lambda1);
    r.constant("lambda2", lambda2);
    r.constant("s", s);
    r.bound_value = m * (theta2 / denom).powf(s / 2.0);
    Ok(r)
}

/// `5 (omega(f, h) + 13/10 omega_2(f, h))` with `h = sqrt(Theta_2)`.
pub fn steklov_bound(
    f: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    let measured = measure(f, params, x, settings)?;
    let theta2 = central_moment(params, x, 2)?;
    let h = theta2.sqrt();
    let domain = settings.modulus_domain(params, x)?;
    let w1 = omega_at(f, h, domain, settings)?;
    let w2 = omega2_at(f, h, domain, settings)?;
    let mut r = BoundReport::new(Theorem::Steklov, x, &measured);
    r.ingredient("theta2", theta2);
    r.ingredient("h", h);
    r.ingredient("omega_h", w1);
    r.ingredient("omega2_h", w2);
    r.bound_value = 5.0 * (w1 + 1.3 * w2);
    r.modulus_domain = Some(domain);
    Ok(r)
}

/// `4 N_f (1 + x^2) Theta_2 + 2 omega_{l+1}(f; sqrt(Theta_2))` for `x <= l`.
pub fn weighted_growth_bound(
    f: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    n_f: f64,
    l: f64,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    positive("N_f", n_f)?;
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::invalid("l must be a finite non-negative number"));
    }
    if x > l {
        return Err(Error::PointOutsideRange { x, l });
    }
    let measured = measure(f, params, x, settings)?;
    let theta2 = central_moment(params, x, 2)?;
    let h = theta2.sqrt();
    let w = omega_restricted(|t| f.value(t), h, l, settings.resolution(h))?;
    let mut r = BoundReport::new(Theorem::WeightedGrowth, x, &measured);
    r.ingredient("theta2", theta2);
    r.ingredient("omega_restricted", w.value);
    r.constant("N_f", n_f);
    r.constant("l", l);
    r.bound_value = 4.0 * n_f * (1.0 + x * x) * theta2 + 2.0 * w.value;
    r.modulus_domain = Some(w.domain);
    Ok(r)
}

/// `n |U(g; x) - g(x) - g'(x) Theta_1 - g''(x) Theta_2 / 2|`.
pub fn voronovskaya_residual(
    g: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    settings: &BoundSettings,
) -> Result<f64> {
    if !g.has_derivatives() {
        return Err(Error::MissingDerivative(g.to_string()));
    }
    let u = apply(params, g, x, &settings.series, &settings.quadrature)?.value;
    let d1 = g.derivative(1)?.value(x);
    let d2 = g.derivative(2)?.value(x);
    let theta1 = central_moment(params, x, 1)?;
    let theta2 = central_moment(params, x, 2)?;
    Ok(params.nf() * (u - g.value(x) - d1 * theta1 - 0.5 * d2 * theta2).abs())
}

/// Residual of the quantitative Voronovskaya estimate next to its explicit
/// majorant `8 n (1 + x^2) Delta(g''; xi) (Theta_2 + Theta_6 / xi^4)` with
/// `xi = 1/sqrt(n)`.
pub fn quantitative_voronovskaya(
    g: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    x_cap: f64,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    let residual = voronovskaya_residual(g, params, x, settings)?;
    let n = params.nf();
    let xi = 1.0 / n.sqrt();
    let d2 = g.derivative(2)?;
    let delta = weighted_modulus(|t| d2.value(t), xi, x_cap, settings.resolution(xi))?;
    let theta2 = central_moment(params, x, 2)?;
    let theta6 = central_moment_numeric(params, x, 6, &settings.series)?;
    let measured = Measured {
        error: residual,
        slack: n * 1e-12 * (1.0 + g.value(x).abs()),
    };
    let mut r = BoundReport::new(Theorem::QuantitativeVoronovskaya, x, &measured);
    r.ingredient("theta2", theta2);
    r.ingredient("theta6", theta6.value);
    r.ingredient("weighted_modulus", delta.value);
    r.ingredient("xi", xi);
    r.constant("x_cap", x_cap);
    r.bound_value = 8.0 * n * (1.0 + x * x) * delta.value * (theta2 + theta6.value / xi.powi(4));
    r.modulus_domain = Some(delta.domain);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrussQuantity {
    /// `n (U(f g) - U(f) U(g))`.
    pub value: f64,
    /// `2 x f'(x) g'(x)`.
    pub limit_target: f64,
}

pub fn gruss_quantity(
    f: &TargetFunction,
    g: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    settings: &BoundSettings,
) -> Result<GrussQuantity> {
    let fg = f.product(g)?;
    let run =
        |h: &TargetFunction| -> Result<f64> { Ok(apply(params, h, x, &settings.series, &settings.quadrature)?.value) };
    let value = params.nf() * (run(&fg)? - run(f)? * run(g)?);
    let limit_target = 2.0 * x * f.derivative(1)?.value(x) * g.derivative(1)?.value(x);
    Ok(GrussQuantity { value, limit_target })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, a: f64) -> OperatorParams {
        OperatorParams::new(n, a).unwrap()
    }

    fn s() -> BoundSettings {
        BoundSettings::default()
    }

    #[test]
    fn direct_k_examples() {
        let c = TargetFunction::constant(2.0);
        let r = direct_k_bound(&c, &p(10, 0.05), 1.0, 1.0, &s()).unwrap();
        assert_eq!(r.bound_value, 0.0);
        assert!(r.measured_error < 1e-14);

        let r = direct_k_bound(&TargetFunction::Monomial(1), &p(10, 0.05), 1.0, 1.0, &s()).unwrap();
        assert!((r.bound_value - 0.1).abs() < 1e-12);
        assert!((r.measured_error - 0.1).abs() < 1e-12);
        assert!(r.dominates());

        let q = p(50, 0.02);
        let r = direct_k_bound(&TargetFunction::Monomial(2), &q, 1.0, 1.0, &s()).unwrap();
        let rho = central_moment(&q, 1.0, 2).unwrap() + 4e-4;
        assert!((r.ingredients["rho"] - rho).abs() < 1e-15);
        assert!((r.ingredients["omega2_sqrt_rho"] - 2.0 * rho).abs() < 1e-12);
        assert!(r.dominates());
        assert_eq!(r.free_constants["M"], 1.0);
    }

    #[test]
    fn lipschitz_examples() {
        let r = lipschitz_maximal_bound(&TargetFunction::constant(1.0), &p(4, 0.25), 1.0, 1.0, &s()).unwrap();
        assert_eq!(r.bound_value, 0.0);
        let r = lipschitz_maximal_bound(&TargetFunction::Monomial(1), &p(4, 0.25), 1.0, 1.0, &s()).unwrap();
        assert!((r.bound_value - 0.875f64.sqrt()).abs() < 1e-12);
        assert!((r.measured_error - 0.25).abs() < 1e-14);
        let fixed = BoundSettings {
            domain: Some(Interval::new(0.0, 2.0).unwrap()),
            ..s()
        };
        let q = p(100, 0.0);
        let r = lipschitz_maximal_bound(&TargetFunction::Monomial(2), &q, 1.0, 1.0, &fixed).unwrap();
        let theta2 = central_moment(&q, 1.0, 2).unwrap();
        assert!((r.bound_value - 3.0 * theta2.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn modified_lipschitz_examples() {
        let f = TargetFunction::Monomial(1);
        let q = p(4, 0.25);
        let r = modified_lipschitz_bound(&f, &q, 1.0, 1.0, 0.0, 1.0, 1.0, &s()).unwrap();
        assert!((r.bound_value - 0.875f64.sqrt()).abs() < 1e-15);
        let r = modified_lipschitz_bound(&f, &q, 1.0, 1.0, 0.0, 1.0, 0.5, &s()).unwrap();
        assert!((r.bound_value - 0.875f64.powf(0.25)).abs() < 1e-15);
        assert!(matches!(
            modified_lipschitz_bound(&f, &q, 0.0, 1.0, 0.0, 1.0, 1.0, &s()),
            Err(Error::SingularDenominator(_))
        ));
    }

    #[test]
    fn steklov_examples() {
        let q = p(100, 0.0);
        let r = steklov_bound(&TargetFunction::constant(3.0), &q, 1.0, &s()).unwrap();
        assert_eq!(r.bound_value, 0.0);
        let r = steklov_bound(&TargetFunction::Monomial(1), &q, 1.0, &s()).unwrap();
        assert!((r.bound_value - 5.0 * 0.0202f64.sqrt()).abs() < 1e-12);
        assert!((r.measured_error - 0.01).abs() < 1e-14);
        let r = steklov_bound(&TargetFunction::Monomial(2), &q, 1.0, &s()).unwrap();
        let h = 0.0202f64.sqrt();
        let w = r.ingredients["omega_h"];
        // sup of 2 t h + h^2 at the window's right end
        let hi = r.modulus_domain.unwrap().hi;
        let exact = 2.0 * (hi - h) * h + h * h;
        // grid lower estimate, accurate to resolution * sup|f'|
        assert!(w <= exact + 1e-12 && exact - w <= h / 20.0 * 2.0 * hi);
        assert!((r.bound_value - 5.0 * (w + 1.3 * 2.0 * 0.0202)).abs() < 1e-9);
        assert!(r.dominates());
    }

    #[test]
    fn weighted_growth_examples() {
        let q = p(100, 0.0);
        let r = weighted_growth_bound(&TargetFunction::constant(1.0), &q, 1.0, 1.0, 2.0, &s()).unwrap();
        assert!((r.bound_value - 8.0 * 0.0202).abs() < 1e-15);
        let r = weighted_growth_bound(&TargetFunction::Monomial(2), &q, 1.0, 1.0, 2.0, &s()).unwrap();
        let h = 0.0202f64.sqrt();
        let w = 9.0 - (3.0 - h) * (3.0 - h);
        let got = r.ingredients["omega_restricted"];
        assert!(got <= w + 1e-12 && w - got <= h / 20.0 * 6.0);
        assert!((r.bound_value - (8.0 * 0.0202 + 2.0 * got)).abs() < 1e-12);
        assert!(matches!(
            weighted_growth_bound(&TargetFunction::Monomial(2), &q, 3.0, 1.0, 2.0, &s()),
            Err(Error::PointOutsideRange { .. })
        ));
    }

    #[test]
    fn voronovskaya_examples() {
        let q = p(50, 0.01);
        let quad = TargetFunction::Polynomial(vec![1.0, -3.0, 2.0]);
        assert!(voronovskaya_residual(&quad, &q, 2.0, &s()).unwrap() < 1e-10);
        assert!(voronovskaya_residual(&TargetFunction::constant(5.0), &q, 2.0, &s()).unwrap() < 1e-12);
        let cube = TargetFunction::Monomial(3);
        let r2 = voronovskaya_residual(&cube, &OperatorParams::max_alpha(100).unwrap(), 1.0, &s()).unwrap();
        let r3 = voronovskaya_residual(&cube, &OperatorParams::max_alpha(1000).unwrap(), 1.0, &s()).unwrap();
        // n Theta_3 with alpha = 1/n is (23 x + 6/n)/n
        assert!((r2 - 0.2306).abs() < 1e-11);
        assert!((r3 - (23.0 + 0.006) / 1000.0).abs() < 1e-11);
        let sampled =
            TargetFunction::Sampled(crate::function::SampledFunction::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap());
        assert!(matches!(
            voronovskaya_residual(&sampled, &q, 0.5, &s()),
            Err(Error::MissingDerivative(_))
        ));
    }

    #[test]
    fn quantitative_voronovskaya_majorant() {
        let q = OperatorParams::max_alpha(200).unwrap();
        let r = quantitative_voronovskaya(&TargetFunction::X2SinPi, &q, 1.0, 10.0, &s()).unwrap();
        assert!(r.dominates(), "{r:?}");
    }

    #[test]
    fn gruss_examples() {
        let t = TargetFunction::Monomial(1);
        let g = gruss_quantity(&t, &t, &p(100, 0.0), 1.0, &s()).unwrap();
        assert!((g.value - 2.01).abs() < 1e-10);
        assert_eq!(g.limit_target, 2.0);
        let g = gruss_quantity(&t, &t, &p(10_000, 0.0), 1.0, &s()).unwrap();
        assert!((g.value - 2.0001).abs() < 1e-9);
        let g = gruss_quantity(&TargetFunction::constant(2.0), &t, &p(10, 0.1), 1.0, &s()).unwrap();
        assert!(g.value.abs() < 1e-13);
        assert_eq!(g.limit_target, 0.0);
    }

    #[test]
    fn bounds_vanish_along_n() {
        let f = TargetFunction::X2SinPi;
        let vals: Vec<f64> = [10u64, 100, 1000]
            .iter()
            .map(|&n| {
                steklov_bound(&f, &OperatorParams::max_alpha(n).unwrap(), 1.0, &s())
                    .unwrap()
                    .bound_value
            })
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2], "{vals:?}");
    }
}
