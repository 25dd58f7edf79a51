//! Configurable invariant suite with a machine-readable report.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Check, SuiteConfig};
use super::figure::{generate_figure, FigurePreset, FigureSpec};
use super::table::{generate_table, reference_grid, TableSpec};
use crate::bounds::{gruss_quantity, lipschitz_maximal_bound, steklov_bound, voronovskaya_residual, BoundSettings};
use crate::error::{Error, Result};
use crate::function::TargetFunction;
use crate::kernel_bv::lemma_l3_check;
use crate::moments::{central_moment, central_moment_numeric, raw_moment};
use crate::operator::{apply, basis_weights_truncated, OperatorParams, SeriesPolicy};
use crate::quadrature::QuadraturePolicy;
use crate::stat_conv::{operator_stat_check, stat_mass, StatCheckSettings, SummabilityMatrix, TestMonomial};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DURRMEYER_THREADS";

/// Runs `job` on a pool sized by [`THREADS_ENV`] when it is set.
pub fn with_thread_override<R: Send>(job: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let threads: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::invalid(e.to_string()))?;
            Ok(pool.install(job))
        }
        Err(_) => Ok(job()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseFailure {
    pub case: String,
    pub measured: Option<f64>,
    pub limit: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest `measured / limit` over the cases that produced a number.
    pub worst_ratio: f64,
    pub failures: Vec<CaseFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

const MAX_LISTED_FAILURES: usize = 25;

// Outcome of one case: measured value against a limit, or an error.
enum Case {
    Within(String, f64, f64),
    Flag(String, bool),
    Failed(String, Error),
}

fn collect(name: &'static str, cases: Vec<Case>) -> CheckOutcome {
    let mut out = CheckOutcome {
        name,
        passed: true,
        cases: cases.len(),
        worst_ratio: 0.0,
        failures: Vec::new(),
    };
    for c in cases {
        let failure = match c {
            Case::Within(case, measured, limit) => {
                let ratio = if limit > 0.0 {
                    measured / limit
                } else if measured > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                out.worst_ratio = out.worst_ratio.max(ratio);
                (!(measured <= limit)).then_some(CaseFailure {
                    case,
                    measured: Some(measured),
                    limit: Some(limit),
                    error: None,
                })
            }
            Case::Flag(case, ok) => (!ok).then_some(CaseFailure {
                case,
                measured: None,
                limit: None,
                error: None,
            }),
            Case::Failed(case, e) => Some(CaseFailure {
                case,
                measured: None,
                limit: None,
                error: Some(e.to_string()),
            }),
        };
        if let Some(f) = failure {
            out.passed = false;
            if out.failures.len() < MAX_LISTED_FAILURES {
                out.failures.push(f);
            }
        }
    }
    out
}

fn case<F: FnOnce() -> Result<(f64, f64)>>(label: String, f: F) -> Case {
    match f() {
        Ok((measured, limit)) => Case::Within(label, measured, limit),
        Err(e) => Case::Failed(label, e),
    }
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    series: SeriesPolicy,
    quad: QuadraturePolicy,
    settings: BoundSettings,
}

impl Ctx<'_> {
    /// Every `(n, alpha, x)` of the main grid.
    fn grid(&self) -> Vec<(u64, f64, f64)> {
        let mut out = Vec::new();
        for &n in &self.cfg.ns {
            for &frac in &self.cfg.alpha_fractions {
                for &x in &self.cfg.xs {
                    out.push((n, frac / n.max(1) as f64, x));
                }
            }
        }
        out
    }

    fn apply(&self, p: &OperatorParams, f: &TargetFunction, x: f64) -> Result<f64> {
        Ok(apply(p, f, x, &self.series, &self.quad)?.value)
    }
}

fn label(n: u64, alpha: f64, x: f64) -> String {
    format!("n={n} alpha={alpha} x={x}")
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn partition(ctx: &Ctx) -> CheckOutcome {
    let cases = ctx
        .grid()
        .par_iter()
        .map(|&(n, a, x)| {
            case(label(n, a, x), || {
                let p = OperatorParams::new(n, a)?;
                let mass = basis_weights_truncated(&p, x, &ctx.series)?.mass();
                Ok(((mass - 1.0).abs(), ctx.cfg.tolerance))
            })
        })
        .collect();
    collect("partition", cases)
}

fn moments(ctx: &Ctx) -> CheckOutcome {
    let tol = ctx.cfg.moment_tolerance;
    let cases = ctx
        .grid()
        .par_iter()
        .flat_map_iter(|&(n, a, x)| {
            let raw = (0..=4u32).map(move |m| {
                case(format!("{} raw m={m}", label(n, a, x)), || {
                    let p = OperatorParams::new(n, a)?;
                    let got = ctx.apply(&p, &TargetFunction::Monomial(m), x)?;
                    Ok((rel_gap(got, raw_moment(&p, x, m)?), tol))
                })
            });
            let central = (1..=4u32).map(move |m| {
                case(format!("{} central m={m}", label(n, a, x)), || {
                    let p = OperatorParams::new(n, a)?;
                    let got = central_moment_numeric(&p, x, m, &ctx.series)?.value;
                    Ok((rel_gap(got, central_moment(&p, x, m)?), tol))
                })
            });
            raw.chain(central).collect::<Vec<_>>()
        })
        .collect();
    collect("moments", cases)
}

/// `U(e^{-t}; x) = n/(n+1) (1 + n alpha / (n+1))^{-x/alpha}`.
pub fn exp_decay_closed_form(p: &OperatorParams, x: f64) -> f64 {
    let n = p.nf();
    let lead = n / (n + 1.0);
    if p.is_degenerate() {
        lead * (-n * x / (n + 1.0)).exp()
    } else {
        let a = p.alpha();
        lead * (-(x / a) * (n * a / (n + 1.0)).ln_1p()).exp()
    }
}

/// `sum_i r_i(x) z^i = (1 + n alpha (1 - z))^{-x/alpha}`.
pub fn generating_closed_form(p: &OperatorParams, x: f64, z: f64) -> f64 {
    let n = p.nf();
    if p.is_degenerate() {
        (-n * x * (1.0 - z)).exp()
    } else {
        let a = p.alpha();
        (-(x / a) * (n * a * (1.0 - z)).ln_1p()).exp()
    }
}

fn exponential(ctx: &Ctx) -> CheckOutcome {
    let tol = ctx.cfg.moment_tolerance;
    let cases = ctx
        .grid()
        .par_iter()
        .flat_map_iter(|&(n, a, x)| {
            let value = case(format!("{} exp", label(n, a, x)), || {
                let p = OperatorParams::new(n, a)?;
                let got = ctx.apply(&p, &TargetFunction::ExpDecay(1.0), x)?;
                Ok((rel_gap(got, exp_decay_closed_form(&p, x)), tol))
            });
            let generating = [0.3f64, 0.9].map(|z| {
                case(format!("{} generating z={z}", label(n, a, x)), || {
                    let p = OperatorParams::new(n, a)?;
                    let w = basis_weights_truncated(&p, x, &ctx.series)?;
                    let sum: f64 = w.iter().map(|(i, r)| r * z.powi(i as i32)).sum();
                    Ok((rel_gap(sum, generating_closed_form(&p, x, z)), tol))
                })
            });
            std::iter::once(value).chain(generating)
        })
        .collect();
    collect("exponential", cases)
}

fn voronovskaya(ctx: &Ctx) -> CheckOutcome {
    let quadratics = [
        TargetFunction::Monomial(2),
        TargetFunction::Polynomial(vec![1.0, -2.0, 0.5]),
        TargetFunction::Polynomial(vec![-3.0, 0.0, 4.0]),
    ];
    let mut cases: Vec<Case> = ctx
        .grid()
        .par_iter()
        .flat_map_iter(|&(n, a, x)| {
            quadratics
                .iter()
                .map(|g| {
                    case(format!("{} g={g}", label(n, a, x)), || {
                        let p = OperatorParams::new(n, a)?;
                        Ok((
                            voronovskaya_residual(g, &p, x, &ctx.settings)?,
                            ctx.cfg.moment_tolerance,
                        ))
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    cases.push(case("t^3 residual ratio n=1000 over n=100 at x=1".into(), || {
        let cubic = TargetFunction::Monomial(3);
        let r = |n: u64| voronovskaya_residual(&cubic, &OperatorParams::max_alpha(n)?, 1.0, &ctx.settings);
        Ok((r(1000)? / r(100)?, 0.1))
    }));
    collect("voronovskaya", cases)
}

fn gruss(ctx: &Ctx) -> CheckOutcome {
    let t = TargetFunction::Monomial(1);
    let cases = ctx
        .grid()
        .par_iter()
        .flat_map_iter(|&(n, a, x)| {
            let exact = case(format!("{} identity", label(n, a, x)), || {
                let p = OperatorParams::new(n, a)?;
                let q = gruss_quantity(&t, &t, &p, x, &ctx.settings)?;
                let nf = n as f64;
                let want = (1.0 + 2.0 * nf * x + nf * nf * x * a) / nf;
                Ok(((q.value - want).abs(), ctx.cfg.tolerance))
            });
            let limit = case(format!("{} distance to 2x", label(n, a, x)), || {
                let p = OperatorParams::new(n, a)?;
                let q = gruss_quantity(&t, &t, &p, x, &ctx.settings)?;
                let nf = n as f64;
                Ok((
                    (q.value - q.limit_target).abs(),
                    (1.0 + nf * nf * x * a) / nf + ctx.cfg.tolerance,
                ))
            });
            [exact, limit]
        })
        .collect();
    collect("gruss", cases)
}

fn bounds(ctx: &Ctx) -> CheckOutcome {
    let catalog = TargetFunction::catalog();
    let cases = ctx
        .grid()
        .par_iter()
        .flat_map_iter(|&(n, a, x)| {
            let mut out = Vec::new();
            for f in &catalog {
                let Ok(p) = OperatorParams::new(n, a) else {
                    out.push(Case::Failed(label(n, a, x), OperatorParams::new(n, a).unwrap_err()));
                    continue;
                };
                // functions whose operator value diverges at this n are outside the grid
                if matches!(
                    apply(&p, f, x, &ctx.series, &ctx.quad),
                    Err(Error::DivergentIntegral { .. } | Error::DivergentSeries { .. })
                ) {
                    continue;
                }
                let tag = format!("{} f={f}", label(n, a, x));
                for (kind, r) in [
                    ("steklov", steklov_bound(f, &p, x, &ctx.settings)),
                    ("lipschitz", lipschitz_maximal_bound(f, &p, x, 1.0, &ctx.settings)),
                ] {
                    out.push(match r {
                        Ok(rep) => Case::Within(
                            format!("{tag} {kind}"),
                            rep.measured_error,
                            rep.bound_value + rep.measured_slack,
                        ),
                        Err(e) => Case::Failed(format!("{tag} {kind}"), e),
                    });
                }
            }
            out
        })
        .collect();
    collect("bounds", cases)
}

fn tail_lemma(ctx: &Ctx) -> CheckOutcome {
    let mut jobs = Vec::new();
    for &n in &ctx.cfg.tail_ns {
        for frac in [0.0, 0.5, 1.0] {
            for &x in &ctx.cfg.tail_xs {
                jobs.push((n, frac / n.max(1) as f64, x));
            }
        }
    }
    let cases = jobs
        .par_iter()
        .map(|&(n, a, x)| {
            let ys: Vec<f64> = (0..10).map(|k| x * k as f64 / 10.0).filter(|&y| x - y >= 0.1).collect();
            let zs: Vec<f64> = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0]
                .iter()
                .map(|d| x + d)
                .chain([2.0 * x, 4.0 * x])
                .collect();
            match OperatorParams::new(n, a).and_then(|p| lemma_l3_check(&p, x, &ys, &zs, &ctx.series)) {
                Ok(r) => Case::Flag(label(n, a, x), r.all_hold()),
                Err(e) => Case::Failed(label(n, a, x), e),
            }
        })
        .collect();
    collect("tail_lemma", cases)
}

fn is_square(i: u64) -> bool {
    let r = (i as f64).sqrt().round() as u64;
    r * r == i
}

fn envelopes(ctx: &Ctx) -> CheckOutcome {
    let settings = StatCheckSettings {
        cap: ctx.cfg.stat_cap,
        ..Default::default()
    };
    let mut cases = Vec::new();
    for m in [TestMonomial::Linear, TestMonomial::Square] {
        match operator_stat_check(
            &SummabilityMatrix::Identity,
            m,
            |n| 1.0 / n as f64,
            &ctx.cfg.stat_ns,
            &settings,
        ) {
            Ok(r) => cases.extend(r.rows.iter().map(|row| {
                Case::Within(
                    format!("{m:?} n={}", row.n),
                    row.deviation,
                    row.envelope * (1.0 + 1e-15),
                )
            })),
            Err(e) => cases.push(Case::Failed(format!("{m:?}"), e)),
        }
    }
    let top = ctx.cfg.stat_ns.iter().copied().max().unwrap_or(1);
    let squares = (1..=top).filter(|&i| is_square(i)).count() as f64 / top as f64;
    cases.push(case(format!("cesaro square mass n={top}"), || {
        let r = stat_mass(
            &SummabilityMatrix::Cesaro,
            |i| f64::from(u8::from(is_square(i))),
            0.0,
            0.5,
            top,
        )?;
        Ok(((r.mass - squares).abs(), 1e-12))
    }));
    collect("envelopes", cases)
}

fn table(ctx: &Ctx) -> CheckOutcome {
    let spec = TableSpec {
        series: ctx.series,
        quadrature: ctx.quad,
        ..TableSpec::reference()
    };
    let cases = match generate_table(&spec) {
        Ok(t) => {
            let published: Vec<Vec<bool>> = reference_grid()
                .iter()
                .map(|r| r.iter().map(Option::is_none).collect())
                .collect();
            let row5: Vec<f64> = t.cells[0].iter().flatten().copied().collect();
            let last: Vec<f64> = t.cells.iter().filter_map(|r| *r.last().unwrap()).collect();
            vec![
                Case::Flag("dash pattern".into(), t.dash_pattern() == published),
                Case::Flag(
                    "first row decreasing as alpha decreases".into(),
                    row5.windows(2).all(|w| w[1] < w[0]),
                ),
                Case::Flag(
                    "last column decreasing in n".into(),
                    last.windows(2).all(|w| w[1] < w[0]),
                ),
            ]
        }
        Err(e) => vec![Case::Failed("table".into(), e)],
    };
    collect("table", cases)
}

fn figures(ctx: &Ctx) -> CheckOutcome {
    let gaps = |f: FigurePreset| -> Result<Vec<f64>> {
        Ok(generate_figure(&FigureSpec::preset(f)?, &ctx.series, &ctx.quad)?.sup_gaps())
    };
    let flag = |name: &str, r: Result<bool>| match r {
        Ok(ok) => Case::Flag(name.into(), ok),
        Err(e) => Case::Failed(name.into(), e),
    };
    let cases = vec![
        flag("F1 larger n closer", gaps(FigurePreset::F1).map(|g| g[1] < g[0])),
        flag(
            "F2 strictly improving in n",
            gaps(FigurePreset::F2).map(|g| g.windows(2).all(|w| w[1] < w[0])),
        ),
        flag(
            "F3 improving as alpha decreases",
            gaps(FigurePreset::F3).map(|g| g.windows(2).all(|w| w[1] <= w[0])),
        ),
    ];
    collect("figures", cases)
}

/// Runs the enabled checks. Invalid numerical settings are reported as errors;
/// everything past that point lands in the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let series = SeriesPolicy::new(cfg.eps_tail, cfg.i_cap)?;
    let quad = QuadraturePolicy::default();
    let ctx = Ctx {
        cfg,
        series,
        quad,
        settings: BoundSettings {
            series,
            quadrature: quad,
            ..BoundSettings::default()
        },
    };
    with_thread_override(|| {
        let checks: Vec<CheckOutcome> = cfg
            .checks
            .iter()
            .map(|c| match c {
                Check::Partition => partition(&ctx),
                Check::Moments => moments(&ctx),
                Check::Exponential => exponential(&ctx),
                Check::Voronovskaya => voronovskaya(&ctx),
                Check::Gruss => gruss(&ctx),
                Check::Bounds => bounds(&ctx),
                Check::TailLemma => tail_lemma(&ctx),
                Check::Envelopes => envelopes(&ctx),
                Check::Table => table(&ctx),
                Check::Figures => figures(&ctx),
            })
            .collect();
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport {
            config: cfg.clone(),
            checks,
            passed,
        }
    })
}

/// Reads a config file and runs it.
pub fn run_suite_path(path: &Path) -> Result<SuiteReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    run_suite(&SuiteConfig::parse(&text)?)
}
