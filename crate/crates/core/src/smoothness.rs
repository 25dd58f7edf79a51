//! Grid estimates of moduli of smoothness, the Steklov mean, the Lipschitz
//! maximal function and the weighted modulus.
//!
//! Every supremum is taken over the nested grid `a + k * resolution` (plus the
//! right end point) and over steps `j * resolution` together with `delta`
//! itself, so each estimate is a lower bound of the true supremum that can only
//! grow when the resolution is halved.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::TargetFunction;
use crate::quadrature::GaussLegendre;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::EmptyDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn widen(&self, by: f64) -> Self {
        Self {
            lo: self.lo - by,
            hi: self.hi + by,
        }
    }

    /// Grid points `lo + k * step`, with `hi` appended when it is not hit.
    pub fn grid(&self, step: f64) -> Vec<f64> {
        let count = ((self.hi - self.lo) / step + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=count).map(|k| self.lo + k as f64 * step).collect();
        let last = *pts.last().unwrap();
        if self.hi - last > 1e-9 * step {
            pts.push(self.hi);
        } else {
            *pts.last_mut().unwrap() = self.hi;
        }
        pts
    }

    fn slack(&self) -> f64 {
        1e-12 * (1.0 + self.lo.abs().max(self.hi.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusKind {
    Omega1,
    Omega2,
    WeightedDelta,
    /// First-order modulus restricted to `[0, l + 1]`.
    OmegaRestricted {
        l: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub kind: ModulusKind,
    pub delta: f64,
    pub value: f64,
    pub grid_resolution: f64,
    pub domain: Interval,
}

fn check_step(delta: f64, resolution: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta must be a finite non-negative number"));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::invalid("resolution must be positive"));
    }
    if delta > 0.0 && resolution > delta / 10.0 * (1.0 + 1e-12) {
        return Err(Error::CoarseGrid { resolution, delta });
    }
    Ok(())
}

fn sample<F: Fn(f64) -> f64 + Sync>(f: &F, pts: &[f64]) -> Vec<f64> {
    pts.par_iter().map(|&t| f(t)).collect()
}

/// `sup |f(x + h) - f(x)|` over `0 <= h <= delta` with both points in `domain`.
pub fn omega1<F: Fn(f64) -> f64 + Sync>(
    f: F,
    delta: f64,
    domain: Interval,
    resolution: f64,
) -> Result<ModulusEstimate> {
    check_step(delta, resolution)?;
    let value = if delta == 0.0 {
        0.0
    } else {
        omega1_value(&f, delta, domain, resolution)
    };
    Ok(ModulusEstimate {
        kind: ModulusKind::Omega1,
        delta,
        value,
        grid_resolution: resolution,
        domain,
    })
}

fn omega1_value<F: Fn(f64) -> f64 + Sync>(f: &F, delta: f64, domain: Interval, res: f64) -> f64 {
    let pts = domain.grid(res);
    let vals = sample(f, &pts);
    let steps = (delta / res + 1e-9).floor() as usize;
    let slack = domain.slack();
    (0..pts.len())
        .into_par_iter()
        .map(|k| {
            let mut best: f64 = 0.0;
            for j in 1..=steps {
                let Some(v) = vals.get(k + j) else { break };
                best = best.max((v - vals[k]).abs());
            }
            let t = pts[k] + delta;
            if t <= domain.hi + slack {
                best = best.max((f(t.min(domain.hi)) - vals[k]).abs());
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// `sup |f(x + 2h) - 2 f(x + h) + f(x)|` over `0 <= h <= delta`.
pub fn omega2<F: Fn(f64) -> f64 + Sync>(
    f: F,
    delta: f64,
    domain: Interval,
    resolution: f64,
) -> Result<ModulusEstimate> {
    check_step(delta, resolution)?;
    let value = if delta == 0.0 {
        0.0
    } else {
        let pts = domain.grid(resolution);
        let vals = sample(&f, &pts);
        // only the uniformly spaced prefix supports index arithmetic
        let uniform =
            if pts.len() >= 2 && (pts[pts.len() - 1] - pts[pts.len() - 2] - resolution).abs() > 1e-9 * resolution {
                pts.len() - 1
            } else {
                pts.len()
            };
        let steps = (delta / resolution + 1e-9).floor() as usize;
        let slack = domain.slack();
        (0..pts.len())
            .into_par_iter()
            .map(|k| {
                let mut best: f64 = 0.0;
                for j in 1..=steps {
                    if k + 2 * j >= uniform {
                        break;
                    }
                    best = best.max((vals[k + 2 * j] - 2.0 * vals[k + j] + vals[k]).abs());
                }
                let t = pts[k] + 2.0 * delta;
                if t <= domain.hi + slack {
                    let d = f(t.min(domain.hi)) - 2.0 * f(pts[k] + delta) + vals[k];
                    best = best.max(d.abs());
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    };
    Ok(ModulusEstimate {
        kind: ModulusKind::Omega2,
        delta,
        value,
        grid_resolution: resolution,
        domain,
    })
}

/// First-order modulus on `[0, l + 1]`.
pub fn omega_restricted<F: Fn(f64) -> f64 + Sync>(
    f: F,
    delta: f64,
    l: f64,
    resolution: f64,
) -> Result<ModulusEstimate> {
    let domain = Interval::new(0.0, l + 1.0)?;
    let mut est = omega1(f, delta, domain, resolution)?;
    est.kind = ModulusKind::OmegaRestricted { l };
    Ok(est)
}

/// `sup |g(x + h) - g(x)| / ((1 + h^2)(1 + x^2))` over `0 <= h <= xi` and
/// `0 <= x <= x_cap`.
pub fn weighted_modulus<F: Fn(f64) -> f64 + Sync>(
    g: F,
    xi: f64,
    x_cap: f64,
    resolution: f64,
) -> Result<ModulusEstimate> {
    check_step(xi, resolution)?;
    let domain = Interval::new(0.0, x_cap)?;
    let value = if xi == 0.0 {
        0.0
    } else {
        let pts = domain.grid(resolution);
        let steps = (xi / resolution + 1e-9).floor() as usize;
        let mut hs: Vec<f64> = (1..=steps).map(|j| j as f64 * resolution).collect();
        hs.push(xi);
        pts.par_iter()
            .map(|&x| {
                let gx = g(x);
                let wx = 1.0 + x * x;
                hs.iter()
                    .map(|&h| (g(x + h) - gx).abs() / ((1.0 + h * h) * wx))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    };
    Ok(ModulusEstimate {
        kind: ModulusKind::WeightedDelta,
        delta: xi,
        value,
        grid_resolution: resolution,
        domain,
    })
}

/// `sup_{s != x} |f(s) - f(x)| / |s - x|^r` over the grid of `domain`.
pub fn lipschitz_maximal<F: Fn(f64) -> f64 + Sync>(
    f: F,
    x: f64,
    r: f64,
    domain: Interval,
    resolution: f64,
) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::invalid("the Lipschitz exponent must lie in (0, 1]"));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("resolution must be positive"));
    }
    let fx = f(x);
    let tiny = domain.slack();
    Ok(domain
        .grid(resolution)
        .par_iter()
        .filter(|&&s| (s - x).abs() > tiny)
        .map(|&s| (f(s) - fx).abs() / (s - x).abs().powf(r))
        .reduce(|| 0.0, f64::max))
}

// E[S^k] for S the sum of two independent U(-h/2, h/2) variables.
fn triangular_moment(k: usize, h: f64) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 * h.powi(k as i32) / ((k + 1) as f64 * (k + 2) as f64)
    }
}

/// Steklov mean
/// `G_h(x) = h^{-2} int int_{[-h/2, h/2]^2} 2 g(x + s + t) - g(x + 2(s + t)) ds dt`.
pub fn steklov_mean(g: &TargetFunction, h: f64, x: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("the Steklov step must be positive"));
    }
    if let TargetFunction::Sampled(s) = g {
        let (lo, hi) = s.range();
        if x - 2.0 * h < lo || x + 2.0 * h > hi {
            return Err(Error::OutsideSampledRange { lo, hi });
        }
    }
    if let Some(coeffs) = g.closed_form().and_then(|e| e.polynomial_coeffs()) {
        return Ok(steklov_polynomial(&coeffs, h, x));
    }
    Ok(steklov_quadrature(|t| g.value(t), h, x))
}

fn steklov_polynomial(coeffs: &[f64], h: f64, x: f64) -> f64 {
    // sum_k g^(k)(x) E[S^k] (2 - 2^k) / k!
    let mut derivs = coeffs.to_vec();
    let mut total = 0.0;
    let mut fact = 1.0;
    for k in 0..coeffs.len() {
        if k > 0 {
            fact *= k as f64;
            derivs = derivs
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, c)| c * (j + 1) as f64)
                .collect();
        }
        let dk = derivs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        total += dk * triangular_moment(k, h) * (2.0 - 2f64.powi(k as i32)) / fact;
    }
    total
}

fn steklov_quadrature<F: Fn(f64) -> f64>(g: F, h: f64, x: f64) -> f64 {
    // the sum of the two offsets has the triangular density (h - |s|) / h^2
    let rule = GaussLegendre::new(20);
    let integrand = |s: f64| (h - s.abs()) / (h * h) * (2.0 * g(x + s) - g(x + 2.0 * s));
    rule.integrate(integrand, -h, 0.0, 8) + rule.integrate(integrand, 0.0, h, 8)
}

fn steklov_derivative(g: &TargetFunction, h: f64, x: f64, order: u32) -> Result<f64> {
    if g.has_derivatives() {
        return steklov_mean(&g.derivative(order)?, h, x);
    }
    let d = h / 100.0;
    match order {
        1 => Ok((steklov_mean(g, h, x + d)? - steklov_mean(g, h, x - d)?) / (2.0 * d)),
        2 => Ok((steklov_mean(g, h, x + d)? - 2.0 * steklov_mean(g, h, x)? + steklov_mean(g, h, x - d)?) / (d * d)),
        _ => Err(Error::invalid("only first and second derivatives are used")),
    }
}

/// Outcome of the three Steklov-mean inequalities on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteklovCheck {
    pub h: f64,
    pub sup_gap: f64,
    pub omega: f64,
    pub omega2: f64,
    pub sup_first_derivative: f64,
    pub sup_second_derivative: f64,
    /// `||G_h - g|| <= omega2`, `||G_h'|| <= 5 omega / h`, `||G_h''|| <= 9 omega2 / h^2`.
    pub holds: [bool; 3],
}

impl SteklovCheck {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&b| b)
    }
}

/// Checks the three Steklov inequalities on the grid of `domain`. The moduli
/// are taken over `domain` widened by `2h`, which is where `G_h` reads `g`.
pub fn steklov_inequalities_check(
    g: &TargetFunction,
    h: f64,
    domain: Interval,
    resolution: f64,
) -> Result<SteklovCheck> {
    let wide = domain.widen(2.0 * h);
    let res = resolution.min(h / 10.0);
    let omega = omega1(|t| g.value(t), h, wide, res)?.value;
    let omega_2 = omega2(|t| g.value(t), h, wide, res)?.value;
    let pts = domain.grid(resolution);
    let rows: Vec<Result<[f64; 3]>> = pts
        .par_iter()
        .map(|&x| {
            Ok([
                (steklov_mean(g, h, x)? - g.value(x)).abs(),
                steklov_derivative(g, h, x, 1)?.abs(),
                steklov_derivative(g, h, x, 2)?.abs(),
            ])
        })
        .collect();
    let mut sup = [0.0f64; 3];
    for r in rows {
        let r = r?;
        for k in 0..3 {
            sup[k] = sup[k].max(r[k]);
        }
    }
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12) + 1e-13;
    Ok(SteklovCheck {
        h,
        sup_gap: sup[0],
        omega,
        omega2: omega_2,
        sup_first_derivative: sup[1],
        sup_second_derivative: sup[2],
        holds: [
            le(sup[0], omega_2),
            le(sup[1], 5.0 * omega / h),
            le(sup[2], 9.0 * omega_2 / (h * h)),
        ],
    })
}
