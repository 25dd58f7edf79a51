//! Raw and central moments of the operator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{basis_weight, OperatorParams, SeriesPolicy};
use crate::special::CompensatedSum;

/// `U(t^m; x)` for `m <= 4`.
pub fn raw_moment(params: &OperatorParams, x: f64, m: u32) -> Result<f64> {
    let n = params.nf();
    let a = params.alpha();
    let nx = n * x;
    Ok(match m {
        0 => 1.0,
        1 => (1.0 + nx) / n,
        2 => (2.0 + 4.0 * nx + nx * nx + n * nx * a) / (n * n),
        3 => {
            let c3 = x * (x * x + 3.0 * x * a + 2.0 * a * a);
            (6.0 + 18.0 * nx + 9.0 * n * nx * (x + a) + n.powi(3) * c3) / n.powi(3)
        }
        4 => {
            let c3 = x * (x * x + 3.0 * x * a + 2.0 * a * a);
            let c4 = x * (x.powi(3) + 6.0 * x * x * a + 11.0 * x * a * a + 6.0 * a.powi(3));
            (24.0 + 96.0 * nx + 72.0 * n * nx * (x + a) + 16.0 * n.powi(3) * c3 + n.powi(4) * c4) / n.powi(4)
        }
        _ => return Err(Error::UnsupportedOrder(m)),
    })
}

/// `U((t - x)^m; x)` for `1 <= m <= 4`.
pub fn central_moment(params: &OperatorParams, x: f64, m: u32) -> Result<f64> {
    let n = params.nf();
    let a = params.alpha();
    let nx = n * x;
    Ok(match m {
        1 => 1.0 / n,
        2 => (a * n * nx + 2.0 * nx + 2.0) / (n * n),
        3 => (2.0 * a * a * n * n * nx + 9.0 * a * n * nx + 12.0 * nx + 6.0) / n.powi(3),
        4 => {
            let n2 = n * n;
            (3.0 * a * a * n2 * n * nx * (2.0 * a + x)
                + 4.0 * a * n2 * nx * (8.0 * a + 3.0 * x)
                + 12.0 * n * nx * (6.0 * a + x)
                + 72.0 * nx
                + 24.0)
                / (n2 * n2)
        }
        _ => return Err(Error::UnsupportedOrder(m)),
    })
}

/// Series value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericMoment {
    pub order: u32,
    pub value: f64,
    pub error_estimate: f64,
}

/// `U((t - x)^m; x)` for any order, summed over the index series.
///
/// Each Gamma term contributes `E[(G - x)^m]`, obtained from the cumulants of
/// `G - x` (`(i+1)/n - x` and `(i+1)(j-1)!/n^j` for `j >= 2`) so that no
/// alternating binomial expansion is formed.
pub fn central_moment_numeric(params: &OperatorParams, x: f64, m: u32, series: &SeriesPolicy) -> Result<NumericMoment> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::NegativePoint(x));
    }
    series.validate()?;
    if m == 0 {
        return Ok(NumericMoment {
            order: 0,
            value: 1.0,
            error_estimate: 0.0,
        });
    }
    let n = params.nf();
    let mean = n * x;
    let mm = m as usize;
    let binom = binomial_rows(mm);
    let tol = (series.eps_tail * 1e-5).max(1e-18);

    let mut acc = CompensatedSum::new();
    let mut abs_acc = 0.0;
    let mut mass = CompensatedSum::new();
    let mut prev = f64::INFINITY;
    let mut kappa = vec![0.0; mm + 1];
    let mut raw = vec![0.0; mm + 1];
    for i in 0..series.i_cap {
        let w = basis_weight(params, x, i as u64)?;
        mass.add(w);
        let shape = (i + 1) as f64;
        kappa[1] = shape / n - x;
        let mut fact = 1.0;
        for (j, k) in kappa.iter_mut().enumerate().take(mm + 1).skip(2) {
            fact *= (j - 1) as f64;
            *k = shape * fact / n.powi(j as i32);
        }
        raw[0] = 1.0;
        for k in 1..=mm {
            let mut s = 0.0;
            for j in 1..=k {
                s += binom[k - 1][j - 1] * kappa[j] * raw[k - j];
            }
            raw[k] = s;
        }
        let term = w * raw[mm];
        acc.add(term);
        abs_acc += term.abs();
        if mass.value() >= 1.0 - series.eps_tail && i as f64 > mean && term.abs() <= tol * abs_acc && term.abs() <= prev
        {
            let rho = if prev > 0.0 && prev.is_finite() {
                (term.abs() / prev).max(params.geometric_ratio()).min(0.999)
            } else {
                params.geometric_ratio()
            };
            return Ok(NumericMoment {
                order: m,
                value: acc.value(),
                error_estimate: term.abs() * rho / (1.0 - rho) + 8.0 * f64::EPSILON * abs_acc,
            });
        }
        prev = term.abs();
    }
    Err(Error::TruncationFailure {
        achieved_mass: mass.value(),
        cap: series.i_cap,
    })
}

fn binomial_rows(m: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for k in 1..m {
        let prev = &rows[k - 1];
        let mut row = vec![1.0; k + 1];
        for j in 1..k {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

/// `eta_n(x) = sqrt(x + 1/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaValue {
    pub n: u64,
    pub x: f64,
    pub value: f64,
}

impl EtaValue {
    pub fn squared(&self) -> f64 {
        self.x + 1.0 / self.n as f64
    }
}

pub fn eta(n: u64, x: f64) -> EtaValue {
    EtaValue {
        n,
        x,
        value: (x + 1.0 / n as f64).sqrt(),
    }
}

/// Closed-form moments at a point, with optional fifth and sixth central
/// moments from the series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub params: OperatorParams,
    pub x: f64,
    pub raw: [f64; 5],
    /// Central moments of orders 1 through 4.
    pub central: [f64; 4],
    pub higher_central_numeric: Option<Vec<NumericMoment>>,
}

pub fn moment_report(params: &OperatorParams, x: f64, series: Option<&SeriesPolicy>) -> Result<MomentReport> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::NegativePoint(x));
    }
    let mut raw = [0.0; 5];
    for (m, slot) in raw.iter_mut().enumerate() {
        *slot = raw_moment(params, x, m as u32)?;
    }
    let mut central = [0.0; 4];
    for (m, slot) in central.iter_mut().enumerate() {
        *slot = central_moment(params, x, m as u32 + 1)?;
    }
    let higher_central_numeric = match series {
        Some(s) => Some(vec![
            central_moment_numeric(params, x, 5, s)?,
            central_moment_numeric(params, x, 6, s)?,
        ]),
        None => None,
    };
    Ok(MomentReport {
        params: *params,
        x,
        raw,
        central,
        higher_central_numeric,
    })
}

/// One row of the scaled central moments with `alpha = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub n: u64,
    pub n_theta1: f64,
    pub n_theta2: f64,
    pub n2_theta4: f64,
    pub n3_theta6: f64,
    /// Relative gaps to `1, 3x, 27x^2, 405x^3`.
    pub gaps: [f64; 4],
}

pub fn asymptotic_targets(x: f64) -> [f64; 4] {
    [1.0, 3.0 * x, 27.0 * x * x, 405.0 * x.powi(3)]
}

pub fn asymptotic_check(x: f64, ns: &[u64], series: &SeriesPolicy) -> Result<Vec<AsymptoticRow>> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid("the asymptotic check needs x > 0"));
    }
    let targets = asymptotic_targets(x);
    ns.iter()
        .map(|&n| {
            let params = OperatorParams::max_alpha(n)?;
            let nf = n as f64;
            let vals = [
                nf * central_moment(&params, x, 1)?,
                nf * central_moment(&params, x, 2)?,
                nf * nf * central_moment(&params, x, 4)?,
                nf.powi(3) * central_moment_numeric(&params, x, 6, series)?.value,
            ];
            let mut gaps = [0.0; 4];
            for k in 0..4 {
                gaps[k] = (vals[k] - targets[k]).abs() / targets[k];
            }
            Ok(AsymptoticRow {
                n,
                n_theta1: vals[0],
                n_theta2: vals[1],
                n2_theta4: vals[2],
                n3_theta6: vals[3],
                gaps,
            })
        })
        .collect()
}
