//! Composite Gauss–Legendre quadrature.

use serde::Serialize;

use crate::error::{Error, Result};

/// Node layout for per-term integration of sampled functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraturePolicy {
    pub nodes_per_panel: usize,
    pub panels: usize,
    /// Half-width of the integration window in units of `sqrt(i + 1) / n`.
    pub window_sigmas: f64,
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        Self {
            nodes_per_panel: 8,
            panels: 24,
            window_sigmas: 10.0,
        }
    }
}

impl QuadraturePolicy {
    pub fn new(nodes_per_panel: usize, panels: usize, window_sigmas: f64) -> Result<Self> {
        let p = Self {
            nodes_per_panel,
            panels,
            window_sigmas,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 2 || self.nodes_per_panel > 256 {
            return Err(Error::invalid("nodes_per_panel must lie in [2, 256]"));
        }
        if self.panels == 0 || self.panels > 100_000 {
            return Err(Error::invalid("panels must lie in [1, 100000]"));
        }
        if !(self.window_sigmas >= 4.0) || !self.window_sigmas.is_finite() {
            return Err(Error::invalid("window_sigmas must be a finite number >= 4"));
        }
        Ok(())
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for k in 0..order.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            weights[k] = w;
            nodes[order - 1 - k] = x;
            weights[order - 1 - k] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over `[a, b]` split into `panels` equal panels.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + half * x);
            }
            total += s * half;
        }
        total
    }
}

// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
