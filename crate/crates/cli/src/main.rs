//! Command-line front end: operator values, moments, bounds, the alpha/n
//! table, figure data, statistical convergence tables and the invariant suite.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use durrmeyer::bounds::{
    direct_k_bound, gruss_quantity, lipschitz_maximal_bound, quantitative_voronovskaya, steklov_bound,
    weighted_growth_bound, BoundReport, BoundSettings,
};
use durrmeyer::experiments::figure::uniform_grid;
use durrmeyer::experiments::suite::{run_suite_path, with_thread_override};
use durrmeyer::experiments::table::{reference_grid, REFERENCE_DENOMINATORS, REFERENCE_NS};
use durrmeyer::experiments::{
    fit_x, format_sig6, generate_figure, generate_table, parse_alpha, run_suite, FigurePreset, FigureSpec, Metric,
    SuiteConfig, TableSpec,
};
use durrmeyer::kernel_bv::{bv_rate_bound, GrowthConstants};
use durrmeyer::moments::moment_report;
use durrmeyer::stat_conv::{operator_stat_check, StatCheckSettings, SummabilityMatrix, TestMonomial};
use durrmeyer::{apply_grid, OperatorParams, QuadraturePolicy, SampledFunction, SeriesPolicy, TargetFunction};

#[derive(Parser)]
#[command(
    name = "durrmeyer",
    version,
    about = "Durrmeyer-type Szasz-Mirakjan operator toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Tail mass left out of the index series.
    #[arg(long, default_value_t = 1e-12)]
    eps_tail: f64,
}

#[derive(Args)]
struct Point {
    #[arg(long)]
    n: u64,
    /// Step, as a decimal or `p/q`.
    #[arg(long, default_value = "0", value_parser = alpha_arg)]
    alpha: f64,
}

fn alpha_arg(s: &str) -> std::result::Result<f64, String> {
    parse_alpha(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Operator values at one or more points.
    Eval {
        #[command(flatten)]
        point: Point,
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Catalog name (e.g. `quad_exp`, `t^3`, `poly:1,0,2`).
        #[arg(long, default_value = "t^2")]
        function: String,
        /// CSV file of `t,f(t)` samples, used instead of `--function`.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Raw and central moments.
    Moments {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        x: f64,
        /// Also compute central moments of orders 5..=max numerically.
        #[arg(long)]
        max_order: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Error bound reports at one point.
    Bounds {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "x2_sin_pi")]
        function: String,
        #[command(flatten)]
        common: Common,
    },
    /// The n by alpha grid of operator values.
    Table {
        #[arg(long, default_value = "quad_exp")]
        function: String,
        #[arg(long, default_value_t = 0.1)]
        x: f64,
        #[arg(long, default_value = "shifted_value")]
        metric: String,
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<u64>>,
        /// Column denominators `d` for `alpha = 1/d`.
        #[arg(long, value_delimiter = ',')]
        denominators: Option<Vec<u64>>,
        /// Search for the evaluation point that reproduces the published grid.
        #[arg(long)]
        fit_x: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Plot data for a preset or custom figure.
    Figure {
        #[arg(long, default_value = "f1")]
        figure: String,
        #[arg(long)]
        function: Option<String>,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',', value_parser = alpha_arg)]
        alpha: Option<Vec<f64>>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Weighted deviations and statistical masses along rows of a matrix.
    Statconv {
        #[arg(long, default_value = "cesaro")]
        matrix: String,
        /// Test monomial order: 0, 1 or 2.
        #[arg(long, default_value_t = 2)]
        moment: u32,
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        ns: Vec<u64>,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 50.0)]
        cap: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Invariant suite; exits nonzero on any failed check.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> Result<()> {
    emit(out, &format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn params(p: &Point) -> Result<OperatorParams> {
    Ok(OperatorParams::new(p.n, p.alpha)?)
}

fn series(c: &Common) -> Result<SeriesPolicy> {
    Ok(SeriesPolicy::new(c.eps_tail, SeriesPolicy::default().i_cap)?)
}

fn function(name: &str) -> Result<TargetFunction> {
    name.parse().with_context(|| format!("unknown function {name:?}"))
}

fn csv_of(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .map(|v| if v.is_nan() { String::new() } else { format_sig6(*v) })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn bound_row(r: &BoundReport) -> Vec<f64> {
    vec![
        r.x,
        r.bound_value,
        r.measured_error,
        r.measured_slack,
        f64::from(u8::from(r.dominates())),
    ]
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval {
            point,
            x,
            function: name,
            samples,
            common,
        } => {
            if x.is_empty() {
                bail!("--x needs at least one point");
            }
            let f = match samples {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    TargetFunction::Sampled(SampledFunction::parse_csv(&text)?)
                }
                None => function(&name)?,
            };
            let p = params(&point)?;
            let evals = apply_grid(&p, &f, &x, &series(&common)?, &QuadraturePolicy::default())?;
            match common.format {
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = x
                        .iter()
                        .zip(&evals)
                        .map(|(x, e)| vec![*x, e.value, f.value(*x), e.error_estimate])
                        .collect();
                    emit(
                        &common.out,
                        &csv_of(&["x", "operator", "function", "error_estimate"], &rows),
                    )?;
                }
                Format::Json => {
                    let points: Vec<Value> = x
                        .iter()
                        .zip(&evals)
                        .map(|(x, e)| json!({ "x": x, "operator": e.value, "function": f.value(*x), "evaluation": e }))
                        .collect();
                    emit_json(
                        &common.out,
                        &json!({ "n": p.n(), "alpha": p.alpha(), "function": f.to_string(), "points": points }),
                    )?;
                }
            }
        }
        Command::Moments {
            point,
            x,
            max_order,
            common,
        } => {
            let p = params(&point)?;
            let s = series(&common)?;
            let report = moment_report(&p, x, Some(&s))?;
            let mut extra = Vec::new();
            if let Some(top) = max_order {
                for m in 5..=top {
                    extra.push(durrmeyer::moments::central_moment_numeric(&p, x, m, &s)?);
                }
            }
            match common.format {
                Format::Csv => {
                    let mut rows: Vec<Vec<f64>> = (0..5)
                        .map(|m| {
                            vec![
                                m as f64,
                                report.raw[m],
                                if m == 0 { f64::NAN } else { report.central[m - 1] },
                            ]
                        })
                        .collect();
                    for e in &extra {
                        rows.push(vec![e.order as f64, f64::NAN, e.value]);
                    }
                    emit(&common.out, &csv_of(&["order", "raw", "central"], &rows))?;
                }
                Format::Json => emit_json(&common.out, &json!({ "report": report, "higher_central": extra }))?,
            }
        }
        Command::Bounds {
            point,
            x,
            function: name,
            common,
        } => {
            let f = function(&name)?;
            let p = params(&point)?;
            let settings = BoundSettings {
                series: series(&common)?,
                ..BoundSettings::default()
            };
            let mut reports = vec![
                direct_k_bound(&f, &p, x, 1.0, &settings)?,
                steklov_bound(&f, &p, x, &settings)?,
                lipschitz_maximal_bound(&f, &p, x, 1.0, &settings)?,
                weighted_growth_bound(&f, &p, x, 1.0, x.ceil().max(1.0), &settings)?,
            ];
            if f.has_derivatives() {
                reports.push(quantitative_voronovskaya(
                    &f,
                    &p,
                    x,
                    x.ceil().max(1.0) + 1.0,
                    &settings,
                )?);
            }
            if x > 0.0 {
                match bv_rate_bound(&f, &p, x, GrowthConstants::default(), &settings) {
                    Ok(r) => reports.push(r),
                    Err(e) => eprintln!("bounded-variation bound skipped: {e}"),
                }
            }
            let gruss = if f.has_derivatives() {
                Some(gruss_quantity(&f, &f, &p, x, &settings)?)
            } else {
                None
            };
            match common.format {
                Format::Csv => {
                    let mut s = String::from("theorem,x,bound,measured,slack,dominates\n");
                    for r in &reports {
                        let row: Vec<String> = bound_row(r).iter().map(|v| format_sig6(*v)).collect();
                        s.push_str(&format!("{:?},{}\n", r.theorem, row.join(",")));
                    }
                    emit(&common.out, &s)?;
                }
                Format::Json => emit_json(&common.out, &json!({ "bounds": reports, "gruss": gruss }))?,
            }
        }
        Command::Table {
            function: name,
            x,
            metric,
            ns,
            denominators,
            fit_x: fit,
            common,
        } => {
            let spec = TableSpec {
                ns: ns.unwrap_or_else(|| REFERENCE_NS.to_vec()),
                denominators: denominators.unwrap_or_else(|| REFERENCE_DENOMINATORS.to_vec()),
                function: function(&name)?,
                x,
                metric: Metric::parse(&metric)?,
                series: series(&common)?,
                quadrature: QuadraturePolicy::default(),
            };
            if fit {
                if spec.ns != REFERENCE_NS || spec.denominators != REFERENCE_DENOMINATORS {
                    bail!("--fit-x compares against the published grid and needs the default rows and columns");
                }
                let fits = fit_x(&spec, &reference_grid(), &Metric::ALL, 0.0, 2.0)?;
                match common.format {
                    Format::Csv => {
                        let mut s = String::from("metric,x,max_rel_residual\n");
                        for f in &fits {
                            s.push_str(&format!(
                                "{},{},{}\n",
                                f.metric.name(),
                                format_sig6(f.x),
                                format_sig6(f.max_rel_residual)
                            ));
                        }
                        emit(&common.out, &s)?;
                    }
                    Format::Json => emit_json(
                        &common.out,
                        &json!({ "function": spec.function.to_string(), "fits": fits }),
                    )?,
                }
            } else {
                let table = generate_table(&spec)?;
                match common.format {
                    Format::Csv => emit(&common.out, &table.to_csv())?,
                    Format::Json => emit_json(&common.out, &table.to_json())?,
                }
            }
        }
        Command::Figure {
            figure,
            function: name,
            n,
            alpha,
            points,
            x_max,
            common,
        } => {
            let preset = FigurePreset::parse(&figure)?;
            let spec = if preset == FigurePreset::Custom {
                let f = function(name.as_deref().unwrap_or("t^2"))?;
                let ns = n.context("custom figures need --n")?;
                let alphas = alpha.unwrap_or_else(|| vec![0.0]);
                let pairs = ns.iter().flat_map(|&n| alphas.iter().map(move |&a| (n, a))).collect();
                FigureSpec::custom(f, pairs, uniform_grid(0.0, x_max, points))
            } else {
                if name.is_some() || n.is_some() || alpha.is_some() {
                    bail!("--function, --n and --alpha apply to --figure custom only");
                }
                let mut s = FigureSpec::preset(preset)?;
                s.xs = uniform_grid(0.0, x_max, points);
                s
            };
            let data = generate_figure(&spec, &series(&common)?, &QuadraturePolicy::default())?;
            match common.format {
                Format::Csv => emit(&common.out, &data.to_csv())?,
                Format::Json => emit_json(&common.out, &data.to_json())?,
            }
        }
        Command::Statconv {
            matrix,
            moment,
            ns,
            epsilon,
            cap,
            common,
        } => {
            let a = match matrix.as_str() {
                "identity" => SummabilityMatrix::Identity,
                "cesaro" | "cesaro_c1" => SummabilityMatrix::Cesaro,
                other => bail!("unknown matrix {other:?} (identity or cesaro)"),
            };
            let settings = StatCheckSettings {
                epsilon,
                cap,
                ..StatCheckSettings::default()
            };
            let report = operator_stat_check(
                &a,
                TestMonomial::from_order(moment)?,
                |n| 1.0 / n as f64,
                &ns,
                &settings,
            )?;
            match common.format {
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = report
                        .rows
                        .iter()
                        .map(|r| vec![r.n as f64, r.alpha, r.deviation, r.envelope, r.mass])
                        .collect();
                    emit(
                        &common.out,
                        &csv_of(&["n", "alpha", "deviation", "envelope", "mass"], &rows),
                    )?;
                }
                Format::Json => emit_json(&common.out, &serde_json::to_value(&report)?)?,
            }
        }
        Command::Suite { config, out } => {
            let report = match config {
                Some(path) => run_suite_path(&path)?,
                None => run_suite(&SuiteConfig::default())?,
            };
            emit_json(&out, &serde_json::to_value(&report)?)?;
            for c in &report.checks {
                eprintln!(
                    "{} {} ({} cases)",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.cases
                );
            }
            return Ok(ExitCode::from(report.exit_code() as u8));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_thread_override(|| run(cli))
        .map_err(anyhow::Error::from)
        .and_then(|r| r)
    {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
