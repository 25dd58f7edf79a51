//! The `n` by `alpha` table of operator values.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::format_sig6;
use crate::error::{Error, Result};
use crate::function::TargetFunction;
use crate::operator::{apply, OperatorParams, SeriesPolicy};
use crate::quadrature::QuadraturePolicy;

/// What a cell reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `U(f; x)`
    OperatorValue,
    /// `|U(f; x) - f(x)|`
    AbsError,
    /// `|U(f; x) - f(x)| / |f(x)|`
    RelError,
    /// `U(f; x) - x`
    ShiftedValue,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::OperatorValue,
        Metric::AbsError,
        Metric::RelError,
        Metric::ShiftedValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::OperatorValue => "operator_value",
            Metric::AbsError => "abs_error",
            Metric::RelError => "rel_error",
            Metric::ShiftedValue => "shifted_value",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }

    fn compute(self, f: &TargetFunction, x: f64, u: f64) -> Result<f64> {
        let fx = f.value(x);
        Ok(match self {
            Metric::OperatorValue => u,
            Metric::AbsError => (u - fx).abs(),
            Metric::RelError => {
                if fx == 0.0 || !fx.is_finite() {
                    return Err(Error::invalid(format!("relative error undefined where f({x}) = {fx}")));
                }
                (u - fx).abs() / fx.abs()
            }
            Metric::ShiftedValue => u - x,
        })
    }
}

/// Rows are indices `n`, columns are steps `alpha = 1/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub ns: Vec<u64>,
    pub denominators: Vec<u64>,
    pub function: TargetFunction,
    pub x: f64,
    pub metric: Metric,
    pub series: SeriesPolicy,
    pub quadrature: QuadraturePolicy,
}

pub const REFERENCE_NS: [u64; 16] = [5, 10, 20, 25, 30, 40, 50, 70, 90, 130, 150, 190, 240, 250, 400, 500];
pub const REFERENCE_DENOMINATORS: [u64; 10] = [5, 10, 20, 30, 50, 100, 150, 200, 250, 500];

/// Published cells for `(t^2 + 1) e^t`, one row per entry of [`REFERENCE_NS`].
/// Each row lists its trailing non-dash cells.
pub const REFERENCE_CELLS: [&[f64]; 16] = [
    &[
        2.01244, 1.85335, 1.7963, 1.77966, 1.7671, 1.75808, 1.75515, 1.7537, 1.75283, 1.7511,
    ],
    &[
        1.30625, 1.28073, 1.2732, 1.26749, 1.26338, 1.26204, 1.26137, 1.26098, 1.26019,
    ],
    &[1.13228, 1.12711, 1.12318, 1.12034, 1.11941, 1.11896, 1.11868, 1.11814],
    &[1.1034, 1.09975, 1.09711, 1.09625, 1.09582, 1.09557, 1.09506],
    &[1.08846, 1.08497, 1.08246, 1.08164, 1.08124, 1.08099, 1.08051],
    &[1.0674, 1.06504, 1.06427, 1.06388, 1.06366, 1.0632],
    &[1.05732, 1.05504, 1.05429, 1.05392, 1.0537, 1.05326],
    &[1.044, 1.04328, 1.04293, 1.04272, 1.0423],
    &[1.03804, 1.03734, 1.037, 1.03679, 1.03638],
    &[1.03108, 1.03074, 1.03054, 1.03014],
    &[1.02923, 1.0289, 1.0287, 1.0283],
    &[1.02639, 1.02619, 1.02579],
    &[1.02424, 1.02385],
    &[1.02395, 1.02356],
    &[1.02093],
    &[1.02006],
];

/// The published grid as cells, dashes as `None`.
pub fn reference_grid() -> Vec<Vec<Option<f64>>> {
    REFERENCE_CELLS
        .iter()
        .map(|row| {
            let dashes = REFERENCE_DENOMINATORS.len() - row.len();
            std::iter::repeat_n(None, dashes)
                .chain(row.iter().map(|&v| Some(v)))
                .collect()
        })
        .collect()
}

impl TableSpec {
    /// The published grid: `(t^2 + 1) e^t` at `x = 0.1`, reported as `U(f; x) - x`,
    /// which reproduces the printed digits.
    pub fn reference() -> Self {
        Self {
            ns: REFERENCE_NS.to_vec(),
            denominators: REFERENCE_DENOMINATORS.to_vec(),
            function: TargetFunction::QuadExp,
            x: 0.1,
            metric: Metric::ShiftedValue,
            series: SeriesPolicy::default(),
            quadrature: QuadraturePolicy::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.denominators.is_empty() {
            return Err(Error::invalid("table needs at least one n and one alpha"));
        }
        if self.ns.contains(&0) || self.denominators.contains(&0) {
            return Err(Error::invalid("n and alpha denominators must be positive"));
        }
        if !(self.x.is_finite() && self.x >= 0.0) {
            return Err(Error::NegativePoint(self.x));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub ns: Vec<u64>,
    pub denominators: Vec<u64>,
    pub function: String,
    pub x: f64,
    pub metric: Metric,
    /// `cells[row][col]`, `None` where `alpha > 1/n`.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn dash_pattern(&self) -> Vec<Vec<bool>> {
        self.cells
            .iter()
            .map(|r| r.iter().map(Option::is_none).collect())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for d in &self.denominators {
            out.push_str(&format!(",1/{d}"));
        }
        out.push('\n');
        for (n, row) in self.ns.iter().zip(&self.cells) {
            out.push_str(&n.to_string());
            for c in row {
                out.push(',');
                match c {
                    Some(v) => out.push_str(&format_sig6(*v)),
                    None => out.push('-'),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .ns
            .iter()
            .zip(&self.cells)
            .map(|(n, row)| {
                let cells: Vec<Value> = row
                    .iter()
                    .map(|c| c.map_or(Value::Null, |v| json!(format_sig6(v).parse::<f64>().unwrap_or(v))))
                    .collect();
                json!({ "n": n, "cells": cells })
            })
            .collect();
        json!({
            "function": self.function,
            "x": self.x,
            "metric": self.metric,
            "alphas": self.denominators.iter().map(|d| format!("1/{d}")).collect::<Vec<_>>(),
            "rows": rows,
        })
    }
}

fn cell(spec: &TableSpec, n: u64, d: u64, x: f64, metric: Metric) -> Result<Option<f64>> {
    if d < n {
        return Ok(None);
    }
    let params = OperatorParams::new(n, 1.0 / d as f64)?;
    let u = apply(&params, &spec.function, x, &spec.series, &spec.quadrature)?.value;
    metric.compute(&spec.function, x, u).map(Some)
}

fn cells_at(spec: &TableSpec, x: f64, metric: Metric) -> Result<Vec<Vec<Option<f64>>>> {
    let jobs: Vec<(u64, u64)> = spec
        .ns
        .iter()
        .flat_map(|&n| spec.denominators.iter().map(move |&d| (n, d)))
        .collect();
    let flat = jobs
        .par_iter()
        .map(|&(n, d)| cell(spec, n, d, x, metric))
        .collect::<Result<Vec<_>>>()?;
    Ok(flat.chunks(spec.denominators.len()).map(<[_]>::to_vec).collect())
}

/// Fills the grid; `alpha = 1/d` with `d < n` exceeds `1/n` and renders as a dash.
pub fn generate_table(spec: &TableSpec) -> Result<Table> {
    spec.validate()?;
    Ok(Table {
        ns: spec.ns.clone(),
        denominators: spec.denominators.clone(),
        function: spec.function.to_string(),
        x: spec.x,
        metric: spec.metric,
        cells: cells_at(spec, spec.x, spec.metric)?,
    })
}

/// Best evaluation point for one metric against a target grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub metric: Metric,
    pub x: f64,
    /// Largest relative residual over the non-dash target cells.
    pub max_rel_residual: f64,
}

fn residual(spec: &TableSpec, target: &[Vec<Option<f64>>], x: f64, metric: Metric) -> f64 {
    let Ok(cells) = cells_at(spec, x, metric) else {
        return f64::INFINITY;
    };
    let mut worst: f64 = 0.0;
    for (row, want_row) in cells.iter().zip(target) {
        for (got, want) in row.iter().zip(want_row) {
            match (got, want) {
                (Some(g), Some(w)) => worst = worst.max((g - w).abs() / w.abs().max(f64::MIN_POSITIVE)),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

/// Searches `[lo, hi]` for the point that best reproduces `target` under each
/// metric: a uniform scan followed by golden-section refinement.
pub fn fit_x(
    spec: &TableSpec,
    target: &[Vec<Option<f64>>],
    metrics: &[Metric],
    lo: f64,
    hi: f64,
) -> Result<Vec<FitResult>> {
    spec.validate()?;
    if target.len() != spec.ns.len() || target.iter().any(|r| r.len() != spec.denominators.len()) {
        return Err(Error::invalid("target grid shape differs from the table"));
    }
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(Error::EmptyDomain { lo, hi });
    }
    const SCAN: usize = 80;
    metrics
        .iter()
        .map(|&metric| {
            let f = |x: f64| residual(spec, target, x, metric);
            let step = (hi - lo) / SCAN as f64;
            let (mut best_x, mut best) = (lo, f64::INFINITY);
            for k in 0..=SCAN {
                let x = lo + step * k as f64;
                let r = f(x);
                if r < best {
                    best = r;
                    best_x = x;
                }
            }
            let (mut a, mut b) = ((best_x - step).max(lo), (best_x + step).min(hi));
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..40 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = f(d);
                }
            }
            for (x, r) in [(c, fc), (d, fd)] {
                if r < best {
                    best = r;
                    best_x = x;
                }
            }
            Ok(FitResult {
                metric,
                x: best_x,
                max_rel_residual: best,
            })
        })
        .collect()
}
