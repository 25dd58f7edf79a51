//! Flat `key = value` configuration for the invariant suite.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown and repeated keys are errors.

use std::collections::BTreeSet;
use std::str::FromStr;

use serde::Serialize;

use super::parse_alpha;
use crate::error::{Error, Result};

/// Checks the suite can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Partition,
    Moments,
    Exponential,
    Voronovskaya,
    Gruss,
    Bounds,
    TailLemma,
    Envelopes,
    Table,
    Figures,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Partition,
        Check::Moments,
        Check::Exponential,
        Check::Voronovskaya,
        Check::Gruss,
        Check::Bounds,
        Check::TailLemma,
        Check::Envelopes,
        Check::Table,
        Check::Figures,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Partition => "partition",
            Check::Moments => "moments",
            Check::Exponential => "exponential",
            Check::Voronovskaya => "voronovskaya",
            Check::Gruss => "gruss",
            Check::Bounds => "bounds",
            Check::TailLemma => "tail_lemma",
            Check::Envelopes => "envelopes",
            Check::Table => "table",
            Check::Figures => "figures",
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub ns: Vec<u64>,
    /// Steps are `fraction / n`.
    pub alpha_fractions: Vec<f64>,
    pub xs: Vec<f64>,
    pub eps_tail: f64,
    pub i_cap: usize,
    /// Tolerance for the normalization and algebraic identities.
    pub tolerance: f64,
    /// Relative tolerance for moment and closed-form comparisons.
    pub moment_tolerance: f64,
    pub checks: BTreeSet<Check>,
    pub tail_ns: Vec<u64>,
    pub tail_xs: Vec<f64>,
    pub stat_ns: Vec<u64>,
    pub stat_cap: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            ns: vec![1, 2, 5, 10, 50, 200],
            alpha_fractions: vec![0.0, 0.5, 1.0],
            xs: vec![0.0, 0.1, 1.0, 5.0, 20.0],
            eps_tail: 1e-12,
            i_cap: 10_000_000,
            tolerance: 1e-10,
            moment_tolerance: 1e-8,
            checks: Check::ALL.into_iter().collect(),
            tail_ns: vec![10, 25, 100],
            tail_xs: vec![0.5, 1.0, 2.0],
            stat_ns: vec![10, 100, 1000, 10_000],
            stat_cap: 50.0,
        }
    }
}

fn list<T, F: Fn(&str) -> Result<T>>(value: &str, item: F) -> Result<Vec<T>> {
    let out = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<Vec<T>>>()?;
    if out.is_empty() {
        return Err(Error::invalid("empty list"));
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::invalid(format!("{s:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{s:?} is not finite")))
    }
}

fn count(s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::invalid(format!("{s:?} is not a non-negative integer")))
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::parse(line_no, format!("duplicate key {key:?}")));
            }
            let at = |e: Error| Error::parse(line_no, format!("{key}: {e}"));
            match key {
                "ns" => cfg.ns = list(value, count).map_err(at)?,
                "alpha_fractions" => cfg.alpha_fractions = list(value, parse_alpha).map_err(at)?,
                "xs" => cfg.xs = list(value, number).map_err(at)?,
                "eps_tail" => cfg.eps_tail = number(value).map_err(at)?,
                "i_cap" => cfg.i_cap = count(value).map_err(at)? as usize,
                "tolerance" => cfg.tolerance = number(value).map_err(at)?,
                "moment_tolerance" => cfg.moment_tolerance = number(value).map_err(at)?,
                "checks" => cfg.checks = list(value, Check::from_str).map_err(at)?.into_iter().collect(),
                "tail_ns" => cfg.tail_ns = list(value, count).map_err(at)?,
                "tail_xs" => cfg.tail_xs = list(value, number).map_err(at)?,
                "stat_ns" => cfg.stat_ns = list(value, count).map_err(at)?,
                "stat_cap" => cfg.stat_cap = number(value).map_err(at)?,
                other => return Err(Error::parse(line_no, format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }
}

impl FromStr for SuiteConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
