//! Summability matrices, statistical limits and the statistical convergence
//! check for the test monomials `1, t, t^2`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::raw_moment;
use crate::operator::OperatorParams;
use crate::special::CompensatedSum;

type EntryFn = dyn Fn(u64, u64) -> f64 + Send + Sync;
type CutoffFn = dyn Fn(u64) -> u64 + Send + Sync;

/// A non-negative summability matrix `(a_{ni})`.
#[derive(Clone)]
pub enum SummabilityMatrix {
    /// `a_{nn} = 1`.
    Identity,
    /// Cesaro means: `a_{ni} = 1/n` for `1 <= i <= n`.
    Cesaro,
    /// Arbitrary entries. Row `n` is read on `0..=cutoff(n)`; without a cutoff
    /// rows are treated as infinitely supported and rejected.
    Custom {
        entry: Arc<EntryFn>,
        cutoff: Option<Arc<CutoffFn>>,
    },
}

impl fmt::Debug for SummabilityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("Identity"),
            Self::Cesaro => f.write_str("Cesaro"),
            Self::Custom { cutoff, .. } => f.debug_struct("Custom").field("has_cutoff", &cutoff.is_some()).finish(),
        }
    }
}

const ROW_SUM_TOL: f64 = 1e-12;

impl SummabilityMatrix {
    pub fn custom<E, C>(entry: E, cutoff: Option<C>) -> Self
    where
        E: Fn(u64, u64) -> f64 + Send + Sync + 'static,
        C: Fn(u64) -> u64 + Send + Sync + 'static,
    {
        Self::Custom {
            entry: Arc::new(entry),
            cutoff: cutoff.map(|c| Arc::new(c) as Arc<CutoffFn>),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Cesaro => "cesaro_c1",
            Self::Custom { .. } => "custom",
        }
    }

    /// Nonzero entries `(i, a_{ni})` of row `n`, validated for sign and row sum.
    pub fn row(&self, n: u64) -> Result<Vec<(u64, f64)>> {
        match self {
            Self::Identity => Ok(vec![(n, 1.0)]),
            Self::Cesaro => {
                if n == 0 {
                    return Err(Error::InvalidMatrixRow {
                        row: n,
                        reason: "Cesaro rows start at n = 1".into(),
                    });
                }
                let w = 1.0 / n as f64;
                Ok((1..=n).map(|i| (i, w)).collect())
            }
            Self::Custom { entry, cutoff } => {
                let cutoff = cutoff.as_ref().ok_or(Error::InfiniteRowSupport { row: n })?;
                let mut sum = CompensatedSum::new();
                let mut row = Vec::new();
                for i in 0..=cutoff(n) {
                    let a = entry(n, i);
                    if !(a.is_finite() && a >= 0.0) {
                        return Err(Error::InvalidMatrixRow {
                            row: n,
                            reason: format!("entry {i} is {a}"),
                        });
                    }
                    if a > 0.0 {
                        sum.add(a);
                        row.push((i, a));
                    }
                }
                if (sum.value() - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidMatrixRow {
                        row: n,
                        reason: format!("row sums to {}", sum.value()),
                    });
                }
                Ok(row)
            }
        }
    }
}

/// Row-weighted sum `sum_i a_{ni} seq(i)`.
pub fn a_transform<S: Fn(u64) -> f64>(a: &SummabilityMatrix, seq: S, n: u64) -> Result<f64> {
    Ok(a.row(n)?
        .into_iter()
        .map(|(i, w)| w * seq(i))
        .collect::<CompensatedSum>()
        .value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatLimitReport {
    pub epsilon: f64,
    pub row: u64,
    pub candidate: f64,
    /// Row weight carried by indices with `|seq(i) - candidate| >= epsilon`.
    pub mass: f64,
}

pub fn stat_mass<S: Fn(u64) -> f64>(
    a: &SummabilityMatrix,
    seq: S,
    candidate: f64,
    epsilon: f64,
    n: u64,
) -> Result<StatLimitReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let mass = a
        .row(n)?
        .into_iter()
        .filter(|&(i, _)| (seq(i) - candidate).abs() >= epsilon)
        .map(|(_, w)| w)
        .collect::<CompensatedSum>()
        .value();
    Ok(StatLimitReport {
        epsilon,
        row: n,
        candidate,
        mass,
    })
}

/// Test monomial `t^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMonomial {
    One,
    Linear,
    Square,
}

impl TestMonomial {
    pub fn order(self) -> u32 {
        match self {
            Self::One => 0,
            Self::Linear => 1,
            Self::Square => 2,
        }
    }

    pub fn from_order(r: u32) -> Result<Self> {
        match r {
            0 => Ok(Self::One),
            1 => Ok(Self::Linear),
            2 => Ok(Self::Square),
            _ => Err(Error::UnsupportedOrder(r)),
        }
    }

    /// Deviation envelope for `alpha <= 1/n`.
    pub fn envelope(self, n: u64) -> f64 {
        let n = n as f64;
        match self {
            Self::One => 0.0,
            Self::Linear => 1.0 / n,
            Self::Square => 2.0 / (n * n) + 2.5 / n,
        }
    }
}

/// Settings for [`operator_stat_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatCheckSettings {
    pub epsilon: f64,
    /// Right end of the grid `[0, cap]` standing in for the half-line.
    pub cap: f64,
    pub grid_points: usize,
}

impl Default for StatCheckSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            cap: 50.0,
            grid_points: 2001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatCheckRow {
    pub n: u64,
    pub alpha: f64,
    /// `sup_x |U(t^r; x) - x^r| / (1 + x^2)` on the capped grid.
    pub deviation: f64,
    pub envelope: f64,
    pub within_envelope: bool,
    /// Weight of row `n` on operator indices whose deviation is at least epsilon.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatCheckReport {
    pub matrix: &'static str,
    pub monomial: TestMonomial,
    pub settings: StatCheckSettings,
    pub rows: Vec<StatCheckRow>,
}

impl StatCheckReport {
    pub fn envelopes_hold(&self) -> bool {
        self.rows.iter().all(|r| r.within_envelope)
    }

    /// Whether the masses never increase along the listed rows.
    pub fn mass_nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].mass <= w[0].mass + 1e-12)
    }
}

/// Weighted deviation of the operator on `t^r` from `x^r` over the capped grid.
pub fn weighted_deviation(
    params: &OperatorParams,
    monomial: TestMonomial,
    settings: &StatCheckSettings,
) -> Result<f64> {
    let r = monomial.order();
    let last = settings.grid_points.max(2) - 1;
    let mut sup: f64 = 0.0;
    for k in 0..=last {
        let x = settings.cap * k as f64 / last as f64;
        let dev = (raw_moment(params, x, r)? - x.powi(r as i32)).abs() / (1.0 + x * x);
        sup = sup.max(dev);
    }
    Ok(sup)
}

/// For each listed row `n`, the weighted deviation of the operator with
/// `alpha = alpha_rule(n)`, its envelope, and the `epsilon`-mass of row `n`
/// of the matrix over the sequence of deviations.
pub fn operator_stat_check<R: Fn(u64) -> f64 + Sync>(
    a: &SummabilityMatrix,
    monomial: TestMonomial,
    alpha_rule: R,
    ns: &[u64],
    settings: &StatCheckSettings,
) -> Result<StatCheckReport> {
    if !(settings.cap > 0.0 && settings.cap.is_finite()) {
        return Err(Error::invalid("cap must be positive"));
    }
    let deviation = |i: u64| -> Result<f64> {
        let params = OperatorParams::new(i, alpha_rule(i))?;
        weighted_deviation(&params, monomial, settings)
    };
    let rows = ns
        .par_iter()
        .map(|&n| {
            let alpha = alpha_rule(n);
            let dev = deviation(n)?;
            let envelope = monomial.envelope(n);
            let row = a.row(n)?;
            let far: Vec<f64> = row
                .par_iter()
                .map(|&(i, w)| -> Result<f64> {
                    // operator index 0 is outside the family; it counts as deviating
                    let d = if i == 0 { f64::INFINITY } else { deviation(i)? };
                    Ok(if d >= settings.epsilon { w } else { 0.0 })
                })
                .collect::<Result<_>>()?;
            Ok(StatCheckRow {
                n,
                alpha,
                deviation: dev,
                envelope,
                within_envelope: dev <= envelope * (1.0 + 4.0 * f64::EPSILON),
                mass: far.into_iter().collect::<CompensatedSum>().value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StatCheckReport {
        matrix: a.name(),
        monomial,
        settings: *settings,
        rows,
    })
}
