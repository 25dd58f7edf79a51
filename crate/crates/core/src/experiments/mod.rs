//! Reproducible experiments: the alpha/n table, figure data series, and the
//! configurable invariant suite.

pub mod config;
pub mod figure;
pub mod suite;
pub mod table;

pub use config::SuiteConfig;
pub use figure::{generate_figure, FigureData, FigurePreset, FigureSeries, FigureSpec};
pub use suite::{run_suite, CheckOutcome, SuiteReport};
pub use table::{fit_x, generate_table, FitResult, Metric, Table, TableSpec};

use crate::error::{Error, Result};

/// Parses a step `alpha` written as a decimal or a rational `p/q`.
pub fn parse_alpha(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = |msg: &str| Error::parse(1, format!("{msg}: {s:?}"));
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad("numerator is not a number"))?;
            let q: f64 = q.trim().parse().map_err(|_| bad("denominator is not a number"))?;
            if q == 0.0 {
                return Err(bad("zero denominator"));
            }
            p / q
        }
        None => s.parse().map_err(|_| bad("not a number"))?,
    };
    if !value.is_finite() || value < 0.0 {
        return Err(bad("alpha must be finite and non-negative"));
    }
    Ok(value)
}

/// Rounds to six significant digits and prints the shortest form, switching
/// to exponent notation below 1e-4 and from 1e15 up.
pub fn format_sig6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}
