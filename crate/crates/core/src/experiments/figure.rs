//! Plot data: operator curves next to the target function.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::format_sig6;
use crate::error::{Error, Result};
use crate::function::TargetFunction;
use crate::operator::{apply_grid, OperatorParams, SeriesPolicy};
use crate::quadrature::QuadraturePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FigurePreset {
    F1,
    F2,
    F3,
    Custom,
}

impl FigurePreset {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" | "1" => Ok(Self::F1),
            "f2" | "2" => Ok(Self::F2),
            "f3" | "3" => Ok(Self::F3),
            "custom" => Ok(Self::Custom),
            other => Err(Error::invalid(format!("unknown figure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub figure: FigurePreset,
    pub function: TargetFunction,
    /// One curve per `(n, alpha)`.
    pub series: Vec<(u64, f64)>,
    pub xs: Vec<f64>,
}

/// `points` equally spaced values on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = points.max(2) - 1;
    (0..=last).map(|k| lo + (hi - lo) * k as f64 / last as f64).collect()
}

impl FigureSpec {
    /// The three published setups on `[0, 2]`.
    pub fn preset(figure: FigurePreset) -> Result<Self> {
        let xs = uniform_grid(0.0, 2.0, 201);
        let (function, series) = match figure {
            FigurePreset::F1 => (TargetFunction::X2SinPi, vec![(15, 1.0 / 60.0), (35, 1.0 / 60.0)]),
            FigurePreset::F2 => (
                TargetFunction::XExpM7,
                [5, 10, 20, 25, 35, 40, 45].iter().map(|&n| (n, 1.0 / 45.0)).collect(),
            ),
            FigurePreset::F3 => (
                TargetFunction::XExpM7,
                [10.0, 20.0, 40.0, 60.0, 80.0].iter().map(|&d| (10, 1.0 / d)).collect(),
            ),
            FigurePreset::Custom => return Err(Error::invalid("custom figures need an explicit spec")),
        };
        Ok(Self {
            figure,
            function,
            series,
            xs,
        })
    }

    pub fn custom(function: TargetFunction, series: Vec<(u64, f64)>, xs: Vec<f64>) -> Self {
        Self {
            figure: FigurePreset::Custom,
            function,
            series,
            xs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureSeries {
    pub label: String,
    pub n: u64,
    pub alpha: f64,
    pub values: Vec<f64>,
    /// `max_k |U(f; x_k) - f(x_k)|` over the grid.
    pub sup_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub figure: FigurePreset,
    pub function: String,
    pub xs: Vec<f64>,
    pub target: Vec<f64>,
    pub series: Vec<FigureSeries>,
}

impl FigureData {
    pub fn sup_gaps(&self) -> Vec<f64> {
        self.series.iter().map(|s| s.sup_gap).collect()
    }

    /// Columns `x`, `f`, then one per series.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,f");
        for s in &self.series {
            out.push(',');
            out.push_str(&s.label);
        }
        out.push('\n');
        for (k, x) in self.xs.iter().enumerate() {
            out.push_str(&format_sig6(*x));
            out.push(',');
            out.push_str(&format_sig6(self.target[k]));
            for s in &self.series {
                out.push(',');
                out.push_str(&format_sig6(s.values[k]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "figure": self.figure,
            "function": self.function,
            "x": self.xs,
            "target": self.target,
            "series": self.series,
        })
    }
}

fn label(n: u64, alpha: f64) -> String {
    let d = 1.0 / alpha;
    if alpha > 0.0 && (d - d.round()).abs() < 1e-9 {
        format!("n={n} alpha=1/{}", d.round())
    } else {
        format!("n={n} alpha={alpha}")
    }
}

pub fn generate_figure(spec: &FigureSpec, series: &SeriesPolicy, quad: &QuadraturePolicy) -> Result<FigureData> {
    if spec.series.is_empty() || spec.xs.is_empty() {
        return Err(Error::invalid("figure needs at least one series and one point"));
    }
    let target: Vec<f64> = spec.xs.iter().map(|&x| spec.function.value(x)).collect();
    let curves = spec
        .series
        .par_iter()
        .map(|&(n, alpha)| {
            let params = OperatorParams::new(n, alpha)?;
            let values: Vec<f64> = apply_grid(&params, &spec.function, &spec.xs, series, quad)?
                .into_iter()
                .map(|e| e.value)
                .collect();
            let sup_gap = values
                .iter()
                .zip(&target)
                .map(|(u, f)| (u - f).abs())
                .fold(0.0, f64::max);
            Ok(FigureSeries {
                label: label(n, alpha),
                n,
                alpha,
                values,
                sup_gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureData {
        figure: spec.figure,
        function: spec.function.to_string(),
        xs: spec.xs.clone(),
        target,
        series: curves,
    })
}
