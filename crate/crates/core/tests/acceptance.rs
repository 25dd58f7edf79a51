//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use durrmeyer::bounds::{gruss_quantity, lipschitz_maximal_bound, steklov_bound, voronovskaya_residual, BoundSettings};
use durrmeyer::experiments::figure::{generate_figure, FigurePreset, FigureSpec};
use durrmeyer::experiments::table::{generate_table, reference_grid, TableSpec};
use durrmeyer::kernel_bv::lemma_l3_check;
use durrmeyer::moments::{central_moment, central_moment_numeric, raw_moment};
use durrmeyer::stat_conv::{stat_mass, weighted_deviation, StatCheckSettings, SummabilityMatrix, TestMonomial};
use durrmeyer::{
    apply, basis_weight, basis_weights_truncated, Error, OperatorParams, QuadraturePolicy, SeriesPolicy, TargetFunction,
};

const NS: [u64; 6] = [1, 2, 5, 10, 50, 200];
const XS: [f64; 5] = [0.0, 0.1, 1.0, 5.0, 20.0];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn grid() -> Vec<(OperatorParams, f64)> {
    let mut out = Vec::new();
    for n in NS {
        for alpha in [0.0, 0.5 / n as f64, 1.0 / n as f64] {
            for x in XS {
                out.push((OperatorParams::new(n, alpha).unwrap(), x));
            }
        }
    }
    out
}

fn tag(p: &OperatorParams, x: f64) -> String {
    format!("n={} alpha={} x={x}", p.n(), p.alpha())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

// Largest value over the cases, or the first violation.
fn worst<I: IntoIterator<Item = Result<(String, f64, f64), String>>>(cases: I) -> Result<f64, String> {
    let mut top: f64 = 0.0;
    for c in cases {
        let (label, measured, limit) = c?;
        if !(measured <= limit) {
            return Err(format!("{label}: {measured:e} exceeds {limit:e}"));
        }
        top = top.max(measured);
    }
    Ok(top)
}

fn series() -> SeriesPolicy {
    SeriesPolicy::default()
}

fn value(p: &OperatorParams, f: &TargetFunction, x: f64) -> Result<f64, String> {
    apply(p, f, x, &series(), &QuadraturePolicy::default())
        .map(|e| e.value)
        .map_err(|e| format!("{} {f}: {e}", tag(p, x)))
}

fn partition_of_unity() -> Outcome {
    let w = worst(
        grid()
            .into_par_iter()
            .map(|(p, x)| {
                let mass = basis_weights_truncated(&p, x, &series())
                    .map_err(|e| e.to_string())?
                    .mass();
                Ok((tag(&p, x), (mass - 1.0).abs(), 1e-10))
            })
            .collect::<Vec<_>>(),
    )?;
    Ok(format!("max |sum r_i - 1| = {w:.2e} over 90 points"))
}

fn moment_oracles() -> Outcome {
    let cases: Vec<_> = grid()
        .into_par_iter()
        .flat_map_iter(|(p, x)| {
            let raw = (0..=4u32).map(move |m| {
                let got = value(&p, &TargetFunction::Monomial(m), x)?;
                Ok((
                    format!("{} raw m={m}", tag(&p, x)),
                    rel(got, raw_moment(&p, x, m).unwrap()),
                    1e-8,
                ))
            });
            let central = (1..=4u32).map(move |m| {
                let got = central_moment_numeric(&p, x, m, &series())
                    .map_err(|e| e.to_string())?
                    .value;
                Ok((
                    format!("{} central m={m}", tag(&p, x)),
                    rel(got, central_moment(&p, x, m).unwrap()),
                    1e-8,
                ))
            });
            raw.chain(central).collect::<Vec<_>>()
        })
        .collect();
    let w = worst(cases)?;
    Ok(format!("max relative gap {w:.2e} over 810 comparisons"))
}

fn asymptotics() -> Outcome {
    let x = 1.0;
    let mut theta2_gap: f64 = 0.0;
    for n in [1u64, 2, 5, 10, 100, 1000, 10_000, 1_000_000] {
        let p = OperatorParams::max_alpha(n).unwrap();
        let nf = n as f64;
        let lhs = (nf * central_moment(&p, x, 2).unwrap() / x - 3.0).abs();
        let rhs = 3.0 / (nf * x) + 3.0 / (nf * x).powi(2);
        if !(lhs <= rhs) {
            return Err(format!("n={n}: |n Theta2/x - 3| = {lhs:e} > {rhs:e}"));
        }
        theta2_gap = theta2_gap.max(lhs / rhs);
    }
    let n = 10_000u64;
    let nf = n as f64;
    let p = OperatorParams::max_alpha(n).unwrap();
    let r4 = nf * nf * central_moment(&p, x, 4).unwrap() / 27.0;
    let r6 = nf.powi(3)
        * central_moment_numeric(&p, x, 6, &series())
            .map_err(|e| e.to_string())?
            .value
        / 405.0;
    if (r4 - 1.0).abs() > 0.05 || (r6 - 1.0).abs() > 0.05 {
        return Err(format!("n^2 Theta4 / 27 = {r4}, n^3 Theta6 / 405 = {r6}"));
    }
    Ok(format!(
        "Theta2 gap/envelope <= {theta2_gap:.3}; n=1e4: n^2 Theta4/27 = {r4:.5}, n^3 Theta6/405 = {r6:.5}"
    ))
}

fn exp_closed(p: &OperatorParams, x: f64) -> f64 {
    let (n, a) = (p.nf(), p.alpha());
    let lead = n / (n + 1.0);
    if a == 0.0 {
        lead * (-n * x / (n + 1.0)).exp()
    } else {
        lead * (1.0 + n * a / (n + 1.0)).powf(-x / a)
    }
}

// r_0 = (1 + n a)^{-x/a}, r_{i+1} = r_i (x + i a) n / ((i + 1)(1 + n a)); Poisson when a = 0.
fn generating_brute(n: f64, a: f64, x: f64, z: f64) -> f64 {
    let (mut r, step) = if a == 0.0 {
        ((-n * x).exp(), n)
    } else {
        ((1.0 + n * a).powf(-x / a), n / (1.0 + n * a))
    };
    let mut total = 0.0;
    let mut zi = 1.0;
    for i in 0..200_000u64 {
        total += r * zi;
        let fi = i as f64;
        r *= (x + fi * a) * step / (fi + 1.0);
        zi *= z;
        if fi > n * x && r * zi < 1e-30 {
            break;
        }
    }
    total
}

fn exponential_closed_form() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut ident_gap: f64 = 0.0;
    for _ in 0..20 {
        let n: u64 = rng.random_range(1..=60);
        let alpha = rng.random_range(0.0..=1.0) / n as f64;
        let x = rng.random_range(0.0..6.0);
        let z = rng.random_range(0.0..1.0);
        let nf = n as f64;
        let closed = (1.0 + nf * alpha * (1.0 - z)).powf(-x / alpha);
        let brute = generating_brute(nf, alpha, x, z);
        let gap = rel(brute, closed);
        if !(gap <= 1e-10) {
            return Err(format!(
                "generating identity n={n} alpha={alpha} x={x} z={z}: {brute} vs {closed}"
            ));
        }
        // the library weights agree with the recurrence as well
        let p = OperatorParams::new(n, alpha).unwrap();
        let lib: f64 = (0..4000u64)
            .map(|i| basis_weight(&p, x, i).unwrap() * z.powi(i as i32))
            .sum();
        if !(rel(lib, closed) <= 1e-10) {
            return Err(format!(
                "library weights n={n} alpha={alpha} x={x} z={z}: {lib} vs {closed}"
            ));
        }
        ident_gap = ident_gap.max(gap);
    }
    let f = TargetFunction::ExpDecay(1.0);
    let w = worst(
        grid()
            .into_par_iter()
            .map(|(p, x)| {
                let got = value(&p, &f, x)?;
                Ok((tag(&p, x), rel(got, exp_closed(&p, x)), 1e-8))
            })
            .collect::<Vec<_>>(),
    )?;
    Ok(format!(
        "generating identity gap {ident_gap:.1e} at 20 random points; max relative gap {w:.2e} on the grid"
    ))
}

fn voronovskaya() -> Outcome {
    let settings = BoundSettings::default();
    let quadratics = [
        TargetFunction::Monomial(2),
        TargetFunction::Polynomial(vec![1.0, -2.0, 0.5]),
        TargetFunction::Polynomial(vec![-3.0, 0.7, 4.0]),
    ];
    let w = worst(
        grid()
            .into_par_iter()
            .flat_map_iter(|(p, x)| {
                let s = &settings;
                quadratics.clone().into_iter().map(move |g| {
                    let r = voronovskaya_residual(&g, &p, x, s).map_err(|e| e.to_string())?;
                    Ok((format!("{} g={g}", tag(&p, x)), r, 1e-8))
                })
            })
            .collect::<Vec<_>>(),
    )?;
    let cubic = TargetFunction::Monomial(3);
    let res = |n| voronovskaya_residual(&cubic, &OperatorParams::max_alpha(n).unwrap(), 1.0, &settings).unwrap();
    let (r2, r3) = (res(100), res(1000));
    if !(r3 <= r2 / 10.0) {
        return Err(format!("t^3 residual {r3} at n=1000 vs {r2} at n=100"));
    }
    Ok(format!(
        "quadratic residual <= {w:.2e}; t^3 residual ratio {:.5}",
        r3 / r2
    ))
}

fn gruss() -> Outcome {
    let t = TargetFunction::Monomial(1);
    let settings = BoundSettings::default();
    let mut gap_top: f64 = 0.0;
    for (p, x) in grid() {
        let q = gruss_quantity(&t, &t, &p, x, &settings).map_err(|e| e.to_string())?;
        let (n, a) = (p.nf(), p.alpha());
        let exact = (1.0 + 2.0 * n * x + n * n * x * a) / n;
        let gap = (q.value - exact).abs();
        if !(gap <= 1e-10) {
            return Err(format!("{}: n(U(t^2) - U(t)^2) = {} vs {exact}", tag(&p, x), q.value));
        }
        // the exact expression sits at distance (1 + n^2 x a)/n from 2x; the
        // measured value inherits the 1e-10 agreement above
        let envelope = (1.0 + n * n * x * a) / n;
        if !((q.value - 2.0 * x).abs() <= envelope + 1e-10) {
            return Err(format!(
                "{}: distance to 2x {} > {envelope}",
                tag(&p, x),
                (q.value - 2.0 * x).abs()
            ));
        }
        gap_top = gap_top.max(gap);
    }
    Ok(format!("max |measured - (1 + 2nx + n^2 x alpha)/n| = {gap_top:.2e}"))
}

fn bound_domination() -> Outcome {
    let settings = BoundSettings::default();
    let catalog = TargetFunction::catalog();
    let results: Vec<Result<(usize, usize, f64), String>> = grid()
        .into_par_iter()
        .map(|(p, x)| {
            let (mut checked, mut skipped, mut ratio): (usize, usize, f64) = (0, 0, 0.0);
            for f in &catalog {
                match apply(&p, f, x, &settings.series, &settings.quadrature) {
                    Err(Error::DivergentIntegral { .. } | Error::DivergentSeries { .. }) => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(format!("{} {f}: {e}", tag(&p, x))),
                    Ok(_) => {}
                }
                for r in [
                    steklov_bound(f, &p, x, &settings),
                    lipschitz_maximal_bound(f, &p, x, 1.0, &settings),
                ] {
                    let r = r.map_err(|e| format!("{} {f}: {e}", tag(&p, x)))?;
                    if !r.dominates() {
                        return Err(format!(
                            "{} {f} {:?}: measured {:e} > bound {:e} + slack {:e}",
                            tag(&p, x),
                            r.theorem,
                            r.measured_error,
                            r.bound_value,
                            r.measured_slack
                        ));
                    }
                    if r.bound_value > 0.0 {
                        ratio = ratio.max(r.measured_error / r.bound_value);
                    }
                    checked += 1;
                }
            }
            Ok((checked, skipped, ratio))
        })
        .collect();
    let (mut checked, mut skipped, mut ratio) = (0, 0, 0.0f64);
    for r in results {
        let (c, s, q) = r?;
        checked += c;
        skipped += s;
        ratio = ratio.max(q);
    }
    Ok(format!("{checked} bounds dominate (max measured/bound {ratio:.3}); {skipped} divergent function/parameter pairs not evaluable"))
}

fn tail_lemma() -> Outcome {
    let mut points = 0;
    for n in [10u64, 25, 100] {
        for alpha in [0.0, 0.5 / n as f64, 1.0 / n as f64] {
            let p = OperatorParams::new(n, alpha).unwrap();
            for x in [0.5, 1.0, 2.0] {
                let ys: Vec<f64> = (0..=40)
                    .map(|k| x * k as f64 / 40.0)
                    .filter(|&y| x - y >= 0.1 - 1e-12)
                    .collect();
                let zs: Vec<f64> = (0..=60).map(|k| x + 0.1 + 0.1 * k as f64).collect();
                let r = lemma_l3_check(&p, x, &ys, &zs, &series()).map_err(|e| e.to_string())?;
                if let Some(bad) = r.points.iter().find(|q| !q.holds) {
                    return Err(format!("{}: {:?}", tag(&p, x), bad));
                }
                points += r.points.len();
            }
        }
    }
    Ok(format!("{points} tail points hold"))
}

fn is_square(i: u64) -> bool {
    let r = (i as f64).sqrt().round() as u64;
    r * r == i
}

fn envelopes() -> Outcome {
    let settings = StatCheckSettings::default();
    let ratios: Vec<Result<f64, String>> = (1..=10_000u64)
        .into_par_iter()
        .map(|n| {
            let p = OperatorParams::max_alpha(n).unwrap();
            let mut top: f64 = 0.0;
            for m in [TestMonomial::Linear, TestMonomial::Square] {
                let d = weighted_deviation(&p, m, &settings).map_err(|e| e.to_string())?;
                if !(d <= m.envelope(n)) {
                    return Err(format!("n={n} {m:?}: deviation {d} > envelope {}", m.envelope(n)));
                }
                top = top.max(d / m.envelope(n));
            }
            Ok(top)
        })
        .collect();
    let mut top: f64 = 0.0;
    for r in ratios {
        top = top.max(r?);
    }
    let mass = stat_mass(
        &SummabilityMatrix::Cesaro,
        |i| f64::from(u8::from(is_square(i))),
        0.0,
        0.5,
        10_000,
    )
    .map_err(|e| e.to_string())?
    .mass;
    if !((mass - 0.01).abs() <= 1e-12) {
        return Err(format!("Cesaro square mass {mass}"));
    }
    Ok(format!(
        "deviation/envelope <= {top:.6} for n = 1..=10000; Cesaro square mass {mass}"
    ))
}

fn table_structure() -> Outcome {
    let t = generate_table(&TableSpec::reference()).map_err(|e| e.to_string())?;
    let published: Vec<Vec<bool>> = reference_grid()
        .iter()
        .map(|r| r.iter().map(Option::is_none).collect())
        .collect();
    if t.dash_pattern() != published {
        return Err("dash pattern differs".into());
    }
    let first: Vec<f64> = t.cells[0].iter().flatten().copied().collect();
    if first.len() != 10 || !first.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("row n=5 not strictly decreasing: {first:?}"));
    }
    let last: Vec<f64> = t.cells.iter().map(|r| r[9].unwrap()).collect();
    if !last.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("column 1/500 not strictly decreasing: {last:?}"));
    }
    let dashes = published.iter().flatten().filter(|d| **d).count();
    Ok(format!(
        "16x10 dash pattern matches ({dashes} dashes); row n=5 and column 1/500 strictly decreasing"
    ))
}

fn figure_trends() -> Outcome {
    let gaps = |f| -> Result<Vec<f64>, String> {
        let spec = FigureSpec::preset(f).map_err(|e| e.to_string())?;
        Ok(generate_figure(&spec, &series(), &QuadraturePolicy::default())
            .map_err(|e| e.to_string())?
            .sup_gaps())
    };
    let (f1, f2, f3) = (
        gaps(FigurePreset::F1)?,
        gaps(FigurePreset::F2)?,
        gaps(FigurePreset::F3)?,
    );
    if !(f1[1] < f1[0]) {
        return Err(format!("F1 sup gaps {f1:?}"));
    }
    if !f2.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("F2 sup gaps {f2:?}"));
    }
    if !f3.windows(2).all(|w| w[1] <= w[0]) {
        return Err(format!("F3 sup gaps {f3:?}"));
    }
    let show = |v: &[f64], sep: &str| v.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(sep);
    Ok(format!(
        "F1 {}; F2 {}; F3 {} (alpha = 1/10 .. 1/80)",
        show(&f1, " > "),
        show(&f2, " > "),
        show(&f3, " >= ")
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("partition of unity", partition_of_unity),
        ("moment oracles", moment_oracles),
        ("asymptotic moment limits", asymptotics),
        ("exponential closed form", exponential_closed_form),
        ("Voronovskaya residual", voronovskaya),
        ("Gruss identity", gruss),
        ("bound domination", bound_domination),
        ("kernel tail lemma", tail_lemma),
        ("statistical envelopes", envelopes),
        ("table structure", table_structure),
        ("figure trends", figure_trends),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
