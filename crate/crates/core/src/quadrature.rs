//! Node tables for averages `(1/2t)∫_{−t}^{t} g(β) dβ`, normalized to `[−1, 1]`
//! with weights summing to one.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    MidpointComposite,
    GaussLegendre,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Node count for a segment of full length (`t = t_max`); shorter
    /// segments in maximal scans use proportionally fewer, never below 8.
    pub nodes: usize,
}

impl QuadratureSpec {
    pub fn new(rule: QuadratureRule, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::InvalidParameter {
                name: "quad.nodes",
                reason: format!("must be at least {MIN_NODES}, got {nodes}"),
            });
        }
        Ok(Self { rule, nodes })
    }

    pub fn midpoint(nodes: usize) -> Result<Self> {
        Self::new(QuadratureRule::MidpointComposite, nodes)
    }

    /// `max(8, ⌈nodes·t/t_max⌉)`.
    pub fn nodes_for_scale(&self, t: f64, t_max: f64) -> usize {
        let scaled = (self.nodes as f64 * t / t_max).ceil() as usize;
        scaled.max(MIN_NODES)
    }

    pub fn table(&self, count: usize) -> NodeTable {
        match self.rule {
            QuadratureRule::MidpointComposite => NodeTable::midpoint(count),
            QuadratureRule::GaussLegendre => NodeTable::gauss_legendre(count),
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::MidpointComposite,
            nodes: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeTable {
    pub offsets: Vec<f64>,
    /// `None` for equal weights `1/m`.
    pub weights: Option<Vec<f64>>,
}

impl NodeTable {
    pub fn midpoint(m: usize) -> Self {
        let offsets = (0..m)
            .map(|k| -1.0 + (2 * k + 1) as f64 / m as f64)
            .collect();
        Self {
            offsets,
            weights: None,
        }
    }

    pub fn gauss_legendre(m: usize) -> Self {
        let mut offsets = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..(m + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 1.0 / ((1.0 - x * x) * dp * dp);
            offsets[i] = -x;
            offsets[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self {
            offsets,
            weights: Some(weights),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Weighted mean of `g(offset)`. The equal-weight mean is clamped to the
    /// sampled range so constants, positivity and sup bounds survive rounding.
    #[inline]
    pub fn mean(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        match &self.weights {
            None => {
                let mut sum = 0.0;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &u in &self.offsets {
                    let y = g(u);
                    sum += y;
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
                (sum / self.offsets.len() as f64).clamp(lo, hi)
            }
            Some(w) => self
                .offsets
                .iter()
                .zip(w)
                .map(|(&u, &wi)| wi * g(u))
                .sum(),
        }
    }
}

/// `(P_m(x), P_m'(x))`.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
