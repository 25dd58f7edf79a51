//! Integral-kernel view of the operator, tail estimates of its distribution
//! function, total variation, and the convergence-rate bound for functions
//! whose derivative has bounded variation.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::bounds::{BoundReport, BoundSettings, Theorem};
use crate::error::{Error, Result};
use crate::function::TargetFunction;
use crate::moments::{central_moment, central_moment_numeric, eta};
use crate::operator::{apply, basis_weight, OperatorParams, SeriesPolicy};
use crate::special::{self, CompensatedSum};

/// A kernel quantity with its truncation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    pub error_estimate: f64,
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be a finite non-negative number")))
    }
}

// Sums w_i * term(i) until the weights carry 1 - eps of the mass, the index
// has passed `past`, and the latest term is negligible.
fn weighted_series<F: Fn(u64) -> f64>(
    params: &OperatorParams,
    x: f64,
    past: f64,
    series: &SeriesPolicy,
    term: F,
) -> Result<(f64, f64, f64)> {
    series.validate()?;
    let tol = (series.eps_tail * 1e-5).max(1e-18);
    let mut acc = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    let mut abs_acc = 0.0;
    for i in 0..series.i_cap {
        let w = basis_weight(params, x, i as u64)?;
        mass.add(w);
        let t = if w > 0.0 { w * term(i as u64) } else { 0.0 };
        acc.add(t);
        abs_acc += t.abs();
        let m = mass.value();
        if m >= 1.0 - series.eps_tail && i as f64 > past && t.abs() <= tol * abs_acc.max(f64::MIN_POSITIVE) {
            return Ok((acc.value(), (1.0 - m).max(0.0), abs_acc));
        }
    }
    Err(Error::TruncationFailure {
        achieved_mass: mass.value(),
        cap: series.i_cap,
    })
}

/// Kernel density `u(x, t) = n sum_i r_i(x) e^{-nt} (nt)^i / i!`.
pub fn kernel_density(params: &OperatorParams, x: f64, t: f64, series: &SeriesPolicy) -> Result<KernelEval> {
    check_nonneg("x", x)?;
    check_nonneg("t", t)?;
    let n = params.nf();
    let (value, tail, abs_acc) =
        weighted_series(params, x, n * x.max(t), series, |i| special::gamma_density(i + 1, n, t))?;
    // each Gamma density is at most n
    Ok(KernelEval {
        value,
        error_estimate: tail * n + 8.0 * f64::EPSILON * abs_acc,
    })
}

/// Kernel distribution function `h(x, y) = int_0^y u(x, t) dt
/// = sum_i r_i(x) P(i + 1, n y)`.
pub fn kernel_cdf(params: &OperatorParams, x: f64, y: f64, series: &SeriesPolicy) -> Result<KernelEval> {
    check_nonneg("x", x)?;
    check_nonneg("y", y)?;
    if y == 0.0 {
        return Ok(KernelEval {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let ny = params.nf() * y;
    let (value, tail, _) = weighted_series(params, x, ny.max(params.nf() * x), series, |i| {
        gamma_lr((i + 1) as f64, ny)
    })?;
    Ok(KernelEval {
        value: value.min(1.0),
        error_estimate: tail + 1e-12 * value,
    })
}

/// Upper tail `1 - h(x, z)`, summed directly so that small tails keep their
/// relative accuracy. The untruncated weights sit at large indices where the
/// upper Gamma tail is essentially one, so their mass is added in full.
pub fn kernel_upper_tail(params: &OperatorParams, x: f64, z: f64, series: &SeriesPolicy) -> Result<KernelEval> {
    check_nonneg("x", x)?;
    check_nonneg("z", z)?;
    if z == 0.0 {
        return Ok(KernelEval {
            value: 1.0,
            error_estimate: 0.0,
        });
    }
    let nz = params.nf() * z;
    let (value, tail, _) = weighted_series(params, x, nz.max(params.nf() * x), series, |i| {
        gamma_ur((i + 1) as f64, nz)
    })?;
    Ok(KernelEval {
        value: (value + tail).min(1.0),
        error_estimate: tail + 1e-12 * value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub side: TailSide,
    pub point: f64,
    pub mass: f64,
    /// `3 eta_n(x)^2 / (n (x - point)^2)`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailLemmaReport {
    pub params: OperatorParams,
    pub x: f64,
    pub points: Vec<TailPoint>,
}

impl TailLemmaReport {
    pub fn all_hold(&self) -> bool {
        self.points.iter().all(|p| p.holds)
    }
}

/// Checks `h(x, y) <= 3 eta^2 / (n (x - y)^2)` for `y < x` and
/// `1 - h(x, z) <= 3 eta^2 / (n (z - x)^2)` for `z > x`.
pub fn lemma_l3_check(
    params: &OperatorParams,
    x: f64,
    ys: &[f64],
    zs: &[f64],
    series: &SeriesPolicy,
) -> Result<TailLemmaReport> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid("the tail lemma needs x > 0"));
    }
    let n = params.nf();
    let eta2 = eta(params.n(), x).squared();
    let jobs: Vec<(TailSide, f64)> = ys
        .iter()
        .map(|&y| (TailSide::Left, y))
        .chain(zs.iter().map(|&z| (TailSide::Right, z)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(side, point)| {
            let (mass, ok_side) = match side {
                TailSide::Left => (kernel_cdf(params, x, point, series)?, point < x),
                TailSide::Right => (kernel_upper_tail(params, x, point, series)?, point > x),
            };
            if !ok_side || point < 0.0 {
                return Err(Error::invalid(format!(
                    "tail point {point} is on the wrong side of x = {x}"
                )));
            }
            let bound = 3.0 * eta2 / (n * (x - point).powi(2));
            Ok(TailPoint {
                side,
                point,
                mass: mass.value,
                bound,
                holds: mass.value <= bound + mass.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailLemmaReport {
        params: *params,
        x,
        points,
    })
}

/// Total variation of a function over a partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationProfile {
    pub value: f64,
    pub partition: Vec<f64>,
}

/// `sum |g(x_{k+1}) - g(x_k)|` over sampled values.
pub fn total_variation(xs: &[f64], ys: &[f64]) -> Result<VariationProfile> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("abscissae and values differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("total variation needs at least two samples"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedAbscissae);
    }
    let value = ys.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(VariationProfile {
        value,
        partition: xs.to_vec(),
    })
}

// Golden-section search for the extreme value of `sign * f` on `[lo, hi]`.
fn golden_extreme<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, sign: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (sign * f(c), sign * f(d));
    for _ in 0..80 {
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = sign * f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = sign * f(d);
        }
    }
    if fc > fd {
        (c, sign * fc)
    } else {
        (d, sign * fd)
    }
}

// Variation through the sampled turning points, each sharpened by a local search.
fn turning_point_variation<F: Fn(f64) -> f64>(f: &F, xs: &[f64], vals: &[f64]) -> (f64, Vec<f64>) {
    let last = vals.len() - 1;
    // an extremum inside an end panel leaves no turn in the samples
    let end_probe = |lo: usize, hi: usize| -> Option<(f64, f64)> {
        let (top, bottom) = (vals[lo].max(vals[hi]), vals[lo].min(vals[hi]));
        let (tm, vm) = golden_extreme(f, xs[lo], xs[hi], 1.0);
        let (tn, vn) = golden_extreme(f, xs[lo], xs[hi], -1.0);
        let (over, under) = (vm - top, bottom - vn);
        if over > 0.0 && over >= under {
            Some((tm, vm))
        } else if under > 0.0 {
            Some((tn, vn))
        } else {
            None
        }
    };
    let mut nodes = vec![(xs[0], vals[0])];
    nodes.extend(end_probe(0, 1));
    for k in 1..last {
        let up = vals[k] - vals[k - 1];
        let down = vals[k + 1] - vals[k];
        if up * down < 0.0 || (up == 0.0) != (down == 0.0) {
            let sign = if up > 0.0 || down < 0.0 { 1.0 } else { -1.0 };
            let (t, v) = golden_extreme(f, xs[k - 1], xs[k + 1], sign);
            nodes.push(if sign * v > sign * vals[k] {
                (t, v)
            } else {
                (xs[k], vals[k])
            });
        }
    }
    nodes.extend(end_probe(last - 1, last));
    nodes.push((xs[last], vals[last]));
    let value = nodes.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum();
    (value, nodes.into_iter().map(|(t, _)| t).collect())
}

/// Variation of `f` on `[a, b]`. Uniform samples locate the monotone pieces,
/// turning points are sharpened by a local extremum search, and the sampling
/// is doubled until the value moves by less than `rel_tol` twice in a row.
pub fn adaptive_variation<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<VariationProfile> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::EmptyDomain { lo: a, hi: b });
    }
    if a == b {
        return Ok(VariationProfile {
            value: 0.0,
            partition: vec![a],
        });
    }
    const MAX_PANELS: usize = 1 << 16;
    let grid = |panels: usize| -> Vec<f64> { (0..=panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect() };
    let mut panels = 32;
    let xs = grid(panels);
    let mut vals: Vec<f64> = xs.iter().map(|&t| f(t)).collect();
    let (mut value, mut partition) = turning_point_variation(&f, &xs, &vals);
    let mut settled_runs = 0;
    while panels < MAX_PANELS && settled_runs < 2 {
        let next = panels * 2;
        let next_xs = grid(next);
        let mut refined = Vec::with_capacity(next + 1);
        for k in 0..panels {
            refined.push(vals[k]);
            refined.push(f(next_xs[2 * k + 1]));
        }
        refined.push(vals[panels]);
        let (new_value, new_partition) = turning_point_variation(&f, &next_xs, &refined);
        let settled = (new_value - value).abs() <= rel_tol * new_value.max(1e-300);
        settled_runs = if settled { settled_runs + 1 } else { 0 };
        vals = refined;
        panels = next;
        value = new_value;
        partition = new_partition;
    }
    Ok(VariationProfile { value, partition })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

// Richardson extrapolation of f(x -/+ h) as h -> 0, assuming an expansion in
// powers of h.
fn one_sided_limit<F: Fn(f64) -> f64>(f: &F, x: f64, side: Side) -> Result<f64> {
    let sign = if side == Side::Right { 1.0 } else { -1.0 };
    let h0 = 1e-2 * (1.0 + x.abs());
    const LEVELS: usize = 10;
    let mut table = [[0.0f64; LEVELS]; LEVELS];
    let mut best = f64::NAN;
    let mut best_err = f64::INFINITY;
    for k in 0..LEVELS {
        let h = h0 / 2f64.powi(k as i32);
        table[k][0] = f(x + sign * h);
        let mut scale = 1.0;
        for j in 1..=k {
            scale *= 2.0;
            table[k][j] = table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / (scale - 1.0);
        }
        if k > 0 {
            let err = (table[k][k] - table[k - 1][k - 1]).abs();
            if err < best_err && table[k][k].is_finite() {
                best_err = err;
                best = table[k][k];
            }
        }
    }
    if best.is_finite() && best_err <= 1e-6 * (1.0 + best.abs()) {
        Ok(best)
    } else {
        Err(Error::LimitEstimation { x })
    }
}

/// `g_x(t)`: `g(t) - g(x-)` left of `x`, `0` at `x`, `g(t) - g(x+)` right of `x`.
#[derive(Debug, Clone)]
pub struct AuxFunction<F> {
    source: F,
    pub center: f64,
    pub left_limit: f64,
    pub right_limit: f64,
}

impl<F: Fn(f64) -> f64> AuxFunction<F> {
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.center {
            (self.source)(t) - self.left_limit
        } else if t > self.center {
            (self.source)(t) - self.right_limit
        } else {
            0.0
        }
    }

    pub fn jump(&self) -> f64 {
        self.right_limit - self.left_limit
    }
}

/// Builds `g_x`, estimating the one-sided limits of `g` at `x`. At `x = 0`
/// only the right limit exists and is used on both sides.
pub fn aux_function<F: Fn(f64) -> f64>(g: F, x: f64) -> Result<AuxFunction<F>> {
    check_nonneg("x", x)?;
    let right_limit = one_sided_limit(&g, x, Side::Right)?;
    let left_limit = if x > 0.0 {
        one_sided_limit(&g, x, Side::Left)?
    } else {
        right_limit
    };
    Ok(AuxFunction {
        source: g,
        center: x,
        left_limit,
        right_limit,
    })
}

/// Growth data for the rate bound: `|g(t)| <= M t^gamma` for `t >= 2x`, with the
/// central moment of order `2s` (`gamma <= 2s`) controlling the far tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthConstants {
    pub m: f64,
    pub s: f64,
    pub gamma: f64,
}

impl Default for GrowthConstants {
    fn default() -> Self {
        Self {
            m: 1.0,
            s: 1.0,
            gamma: 2.0,
        }
    }
}

fn derivative_fn(g: &TargetFunction) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    if g.has_derivatives() {
        let d = g.derivative(1)?;
        return Ok(Box::new(move |t| d.value(t)));
    }
    let g = g.clone();
    Ok(Box::new(move |t: f64| {
        let h = 1e-7 * (1.0 + t.abs());
        (g.value(t + h) - g.value(t - h)) / (2.0 * h)
    }))
}

/// Right-hand side of the rate estimate for `g` with derivative of bounded
/// variation, term by term:
///
/// * `3 eta^2 / (n x^2) |g(2x) - g(x) - x g'(x+)|`
/// * `(x / sqrt n) V[x, x + x/sqrt n]` and `(3 eta^2 / n) sum_{l <= sqrt(nx)} V[x, x + x/l]`
/// * the left mirror `(x / sqrt n) V[x - x/sqrt n, x]` and
///   `(3 eta^2 / n) sum_{l <= sqrt n} V[x - x/l, x]`
/// * `M 2^gamma Theta_{2s}^{gamma / 2s}`
/// * `3 |g(x)| eta^2 / (n x^2)` and `|g'(x+)| sqrt(3/n) eta`
/// * `sqrt(3/n) eta |jump| / 2` and `|jump| / (2n)` for the jump of `g'` at `x`
///
/// Every `V` is the variation of `(g')_x`.
pub fn bv_rate_bound(
    g: &TargetFunction,
    params: &OperatorParams,
    x: f64,
    constants: GrowthConstants,
    settings: &BoundSettings,
) -> Result<BoundReport> {
    if x == 0.0 {
        return Err(Error::SingularDenominator("x = 0 in the 1/x^2 terms"));
    }
    check_nonneg("x", x)?;
    let GrowthConstants { m, s, gamma } = constants;
    let order = 2.0 * s;
    if !(m > 0.0 && m.is_finite()) || !(s > 0.0) || order.fract() != 0.0 || !(0.0..=order).contains(&gamma) {
        return Err(Error::invalid("need M > 0, 2s a positive integer and 0 <= gamma <= 2s"));
    }
    let n = params.nf();
    let eval = apply(params, g, x, &settings.series, &settings.quadrature)?;
    let gx = g.value(x);
    let eta_v = eta(params.n(), x);
    let eta2 = eta_v.squared();

    let dg = derivative_fn(g)?;
    let aux = aux_function(&dg, x)?;
    let jump = aux.jump().abs();
    let var = |a: f64, b: f64| -> Result<f64> { Ok(adaptive_variation(|t| aux.eval(t), a, b, 1e-6)?.value) };

    let root_n = n.sqrt();
    let t1 = 3.0 * eta2 / (n * x * x) * (g.value(2.0 * x) - gx - x * aux.right_limit).abs();
    let t2_right = x / root_n * var(x, x + x / root_n)?;
    let right_terms = (n * x).sqrt().floor() as usize;
    // parallel terms, summed in index order for reproducibility
    let ordered_sum = |terms: usize, span: &(dyn Fn(f64) -> (f64, f64) + Sync)| -> Result<f64> {
        let parts = (1..=terms)
            .into_par_iter()
            .map(|l| {
                let (a, b) = span(l as f64);
                var(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(parts.into_iter().collect::<CompensatedSum>().value())
    };
    let t3_right = 3.0 * eta2 / n * ordered_sum(right_terms, &|l| (x, x + x / l))?;
    let t2_left = x / root_n * var(x - x / root_n, x)?;
    let left_terms = root_n.floor() as usize;
    let t3_left = 3.0 * eta2 / n * ordered_sum(left_terms, &|l| (x - x / l, x))?;
    let theta_2s = central_moment_numeric(params, x, order as u32, &settings.series)?;
    let t4 = m * 2f64.powf(gamma) * theta_2s.value.max(0.0).powf(gamma / order);
    let t5 = 3.0 * gx.abs() * eta2 / (n * x * x);
    let t6 = aux.right_limit.abs() * (3.0 / n).sqrt() * eta_v.value;
    let t7 = 0.5 * (3.0 / n).sqrt() * jump * eta_v.value;
    let t8 = jump / (2.0 * n);

    let mut r = BoundReport {
        theorem: Theorem::BoundedVariation,
        x,
        ingredients: Default::default(),
        free_constants: Default::default(),
        bound_value: t1 + t2_right + t3_right + t2_left + t3_left + t4 + t5 + t6 + t7 + t8,
        measured_error: (eval.value - gx).abs(),
        measured_slack: eval.error_estimate + 4.0 * f64::EPSILON * (eval.value.abs() + gx.abs()),
        modulus_domain: None,
    };
    for (k, v) in [
        ("eta2", eta2),
        ("theta2", central_moment(params, x, 2)?),
        ("theta_2s", theta_2s.value),
        ("derivative_right", aux.right_limit),
        ("derivative_left", aux.left_limit),
        ("taylor_term", t1),
        ("variation_near_right", t2_right),
        ("variation_sum_right", t3_right),
        ("variation_near_left", t2_left),
        ("variation_sum_left", t3_left),
        ("growth_term", t4),
        ("value_term", t5),
        ("slope_term", t6),
        ("jump_root_term", t7),
        ("jump_term", t8),
    ] {
        r.ingredients.insert(k.to_string(), v);
    }
    r.free_constants.insert("M".into(), m);
    r.free_constants.insert("s".into(), s);
    r.free_constants.insert("gamma".into(), gamma);
    Ok(r)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::function::SampledFunction;
    use proptest::prelude::*;

    fn p(n: u64, a: f64) -> OperatorParams {
        OperatorParams::new(n, a).unwrap()
    }

    fn series() -> SeriesPolicy {
        SeriesPolicy::default()
    }

    // Independent oracle: Pr[G <= y] = Pr[Pois(n y) >= i + 1] for G ~ Gamma(i + 1, n).
    fn cdf_by_poisson(params: &OperatorParams, x: f64, y: f64) -> f64 {
        let ny = params.nf() * y;
        let mut total = 0.0;
        for i in 0..2000u64 {
            let w = basis_weight(params, x, i).unwrap();
            let below: f64 = (0..=i).map(|k| special::ln_poisson_pmf(k, ny).exp()).sum();
            total += w * (1.0 - below);
        }
        total
    }

    #[test]
    fn density_examples() {
        let q = p(6, 0.1);
        for &t in &[0.0, 0.3, 1.2] {
            let d = kernel_density(&q, 0.0, t, &series()).unwrap().value;
            assert!((d - 6.0 * (-6.0 * t).exp()).abs() < 1e-14);
        }
        let d = kernel_density(&p(4, 0.25), 1.0, 1.0, &series()).unwrap().value;
        let want = 0.484_951_431_597_862_15;
        assert!((d - want).abs() < 1e-13 * want);
    }

    #[test]
    fn density_integrates_to_one_with_first_moment() {
        let q = p(8, 0.1);
        let rule = crate::quadrature::GaussLegendre::new(16);
        let dens = |t: f64| kernel_density(&q, 1.5, t, &series()).unwrap().value;
        let mass = rule.integrate(dens, 0.0, 20.0, 80);
        let first = rule.integrate(|t| t * dens(t), 0.0, 20.0, 80);
        assert!((mass - 1.0).abs() < 1e-8);
        assert!((first - (1.0 + 8.0 * 1.5) / 8.0).abs() < 1e-6 * 1.625);
    }

    #[test]
    fn cdf_examples() {
        let q = p(4, 0.25);
        assert_eq!(kernel_cdf(&q, 1.0, 0.0, &series()).unwrap().value, 0.0);
        assert!((kernel_cdf(&q, 1.0, 200.0, &series()).unwrap().value - 1.0).abs() < 1e-10);
        let v = kernel_cdf(&p(10, 0.05), 0.0, 0.1, &series()).unwrap().value;
        assert!((v - 0.632_120_558_828_557_68).abs() < 1e-14);
        let v = kernel_cdf(&q, 1.0, 1.0, &series()).unwrap().value;
        assert!((v - 0.469_936_807_323_266_96).abs() < 1e-12);
        let v = kernel_cdf(&p(25, 0.04), 1.0, 0.2, &series()).unwrap().value;
        assert!((v - 4.957_661_873_551_046e-4).abs() < 1e-10 * 4.96e-4);
        let v = kernel_upper_tail(&p(100, 0.0), 2.0, 3.0, &series()).unwrap().value;
        assert!((v - 3.868_440_638_849_714e-6).abs() < 1e-9 * 3.87e-6);
    }

    #[test]
    fn cdf_matches_poisson_oracle() {
        for &(n, a, x, y) in &[(4u64, 0.25, 1.0, 0.7), (10, 0.0, 2.0, 2.5), (30, 1.0 / 60.0, 0.5, 0.4)] {
            let q = p(n, a);
            let got = kernel_cdf(&q, x, y, &series()).unwrap().value;
            let want = cdf_by_poisson(&q, x, y);
            assert!((got - want).abs() < 1e-11, "{got} vs {want}");
        }
    }

    #[test]
    fn tail_lemma_examples() {
        let r = lemma_l3_check(&p(25, 0.04), 1.0, &[0.2], &[], &series()).unwrap();
        assert!(r.all_hold());
        assert!((r.points[0].bound - 0.195).abs() < 1e-12);
        let r = lemma_l3_check(&p(100, 0.0), 2.0, &[], &[2.05, 3.0], &series()).unwrap();
        assert!(r.all_hold());
        assert!(r.points[0].bound > 1.0);
        assert!((r.points[1].bound - 0.0603).abs() < 1e-12);
        assert!(lemma_l3_check(&p(10, 0.0), 1.0, &[1.5], &[], &series()).is_err());
    }

    #[test]
    fn variation_examples() {
        let xs: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.002).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        assert!((total_variation(&xs, &ys).unwrap().value - 8.0).abs() < 1e-12);
        let tau = std::f64::consts::TAU;
        let xs: Vec<f64> = (0..=4000).map(|k| k as f64 * tau / 4000.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        assert!((total_variation(&xs, &ys).unwrap().value - 4.0).abs() < 1e-6);
        assert_eq!(total_variation(&[0.0, 1.0], &[2.0, 2.0]).unwrap().value, 0.0);
        assert!(matches!(
            total_variation(&[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::UnsortedAbscissae)
        ));
        let v = adaptive_variation(f64::sin, 0.0, tau, 1e-9).unwrap();
        assert!((v.value - 4.0).abs() < 1e-6);
    }

    #[test]
    fn aux_function_examples() {
        let g = |t: f64| t * t;
        let a = aux_function(g, 1.0).unwrap();
        assert_eq!(a.eval(1.0), 0.0);
        assert!((a.eval(1.5) - 1.25).abs() < 1e-8);
        let step = |t: f64| if t > 1.0 { 2.0 } else { 0.0 };
        let a = aux_function(step, 1.0).unwrap();
        assert_eq!(a.right_limit, 2.0);
        assert_eq!(a.left_limit, 0.0);
        assert_eq!(a.eval(1.000_01), 0.0);
        assert!(matches!(
            aux_function(|t: f64| (1.0 / (t - 1.0)).sin(), 1.0),
            Err(Error::LimitEstimation { .. })
        ));
    }

    #[test]
    fn rate_bound_examples() {
        let settings = BoundSettings::default();
        let affine = TargetFunction::Polynomial(vec![1.0, 3.0]);
        let r = bv_rate_bound(
            &affine,
            &p(50, 0.01),
            1.0,
            GrowthConstants {
                m: 4.0,
                s: 0.5,
                gamma: 1.0,
            },
            &settings,
        )
        .unwrap();
        for k in [
            "variation_near_right",
            "variation_sum_right",
            "variation_near_left",
            "variation_sum_left",
        ] {
            assert!(r.ingredients[k].abs() < 1e-6, "{k}");
        }
        assert!((r.measured_error - 3.0 / 50.0).abs() < 1e-13);
        assert!(r.dominates());

        let sq = TargetFunction::Monomial(2);
        let q = p(100, 0.0);
        let r = bv_rate_bound(
            &sq,
            &q,
            1.0,
            GrowthConstants {
                m: 1.0,
                s: 2.0,
                gamma: 2.0,
            },
            &settings,
        )
        .unwrap();
        let theta2 = central_moment(&q, 1.0, 2).unwrap();
        assert!((r.measured_error - (theta2 + 2.0 / 100.0)).abs() < 1e-13);
        // g' = 2t: V[1, 1 + 1/l] = 2/l
        let harmonic: f64 = (1..=10).map(|l| 2.0 / l as f64).sum();
        assert!((r.ingredients["variation_sum_right"] - 0.0303 * harmonic).abs() < 1e-7);
        assert!(r.dominates(), "{r:?}");
        assert!(bv_rate_bound(&sq, &q, 0.0, GrowthConstants::default(), &settings).is_err());
    }

    #[test]
    fn rate_bound_for_kinked_sampled_function() {
        // |t - 1| + 1 sampled on [0, 10]: derivative jumps by 2 at t = 1
        let xs: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|t| (t - 1.0f64).abs() + 1.0).collect();
        let g = TargetFunction::Sampled(SampledFunction::new(xs, ys).unwrap());
        let r = bv_rate_bound(
            &g,
            &p(40, 0.0),
            1.0,
            GrowthConstants {
                m: 1.0,
                s: 0.5,
                gamma: 1.0,
            },
            &BoundSettings::default(),
        )
        .unwrap();
        assert!((r.ingredients["derivative_right"] - 1.0).abs() < 1e-6);
        assert!((r.ingredients["derivative_left"] + 1.0).abs() < 1e-6);
        assert!(r.dominates(), "{r:?}");
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(n in 1u64..60, frac in 0.0f64..=1.0, x in 0.0f64..4.0, y in 0.0f64..6.0, dy in 0.0f64..1.0) {
            let q = p(n, frac / n as f64);
            let a = kernel_cdf(&q, x, y, &series()).unwrap().value;
            let b = kernel_cdf(&q, x, y + dy, &series()).unwrap().value;
            prop_assert!(a <= b + 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn cdf_derivative_is_density(n in 2u64..40, frac in 0.0f64..=1.0, x in 0.1f64..3.0, y in 0.05f64..4.0) {
            let q = p(n, frac / n as f64);
            let h = 1e-5;
            let d = (kernel_cdf(&q, x, y + h, &series()).unwrap().value
                - kernel_cdf(&q, x, y - h, &series()).unwrap().value) / (2.0 * h);
            let dens = kernel_density(&q, x, y, &series()).unwrap().value;
            prop_assert!((d - dens).abs() < 1e-5 * (1.0 + dens), "{d} vs {dens}");
        }

        #[test]
        fn variation_superadditive(a in -2.0f64..0.0, c in 0.0f64..2.0, b in 2.0f64..4.0) {
            let f = |t: f64| t * (3.0 * t).sin();
            let whole = adaptive_variation(f, a, b, 1e-9).unwrap().value;
            let left = adaptive_variation(f, a, c, 1e-9).unwrap().value;
            let right = adaptive_variation(f, c, b, 1e-9).unwrap().value;
            prop_assert!((whole - (left + right)).abs() < 1e-5 * whole.max(1.0));
        }
    }
}
