//! Graded grids on `(0, 1]` and functions sampled on them together with
//! their derivatives.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes `0 < t_1 < ... < t_N = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    nodes: Arc<[f64]>,
    exponent: f64,
}

impl Grid {
    /// `t_j = (j/N)^exponent` for `j = 1..=N`, merged with `extra` points in `(0, 1)`.
    pub fn graded(n: usize, exponent: f64, extra: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid needs at least one node".into()));
        }
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!("grading exponent {exponent} must be ≥ 1")));
        }
        let mut nodes: Vec<f64> = (1..=n).map(|j| (j as f64 / n as f64).powf(exponent)).collect();
        for &x in extra {
            if x > 0.0 && x < 1.0 {
                nodes.push(x);
            }
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * a.abs().max(1e-300));
        *nodes.last_mut().expect("nonempty") = 1.0;
        Ok(Self {
            nodes: nodes.into(),
            exponent,
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::graded(n, 1.0, &[])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Index `j` of the segment `[t_j, t_{j+1}]` containing `t`; `None` for `t < t_1`.
    fn segment(&self, t: f64) -> Option<usize> {
        let nodes = &self.nodes;
        if t < nodes[0] {
            return None;
        }
        let idx = nodes.partition_point(|&x| x <= t);
        Some(idx.saturating_sub(1).min(nodes.len().saturating_sub(2)))
    }
}

/// Values `u(t_j)` and derivatives `u'(t_j)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshFunction {
    grid: Option<Grid>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl MeshFunction {
    pub fn empty() -> Self {
        Self {
            grid: None,
            values: Vec::new(),
            derivs: Vec::new(),
        }
    }

    pub fn new(grid: &Grid, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || derivs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "mesh function has {} values and {} derivatives on {} nodes",
                values.len(),
                derivs.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: Some(grid.clone()),
            values,
            derivs,
        })
    }

    pub fn from_fn(grid: &Grid, u: impl Fn(f64) -> f64, du: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Some(grid.clone()),
            values: grid.nodes().iter().map(|&t| u(t)).collect(),
            derivs: grid.nodes().iter().map(|&t| du(t)).collect(),
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c, |_| 0.0)
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.as_ref().map_or(&[], |g| g.nodes())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Cubic Hermite interpolant of (values, derivs). Below the first node
    /// the first value is held constant.
    pub fn eval(&self, t: f64) -> f64 {
        let Some(grid) = &self.grid else {
            return f64::NAN;
        };
        if grid.len() == 1 {
            return self.values[0];
        }
        match grid.segment(t) {
            None => self.values[0],
            Some(j) => self.hermite(j, t),
        }
    }

    fn hermite(&self, j: usize, t: f64) -> f64 {
        let nodes = self.nodes();
        let (a, b) = (nodes[j], nodes[j + 1]);
        let h = b - a;
        let x = (t - a) / h;
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.derivs[j], self.derivs[j + 1]);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * y0
            + (x3 - 2.0 * x2 + x) * h * d0
            + (-2.0 * x3 + 3.0 * x2) * y1
            + (x3 - x2) * h * d1
    }

    /// `∫_lo^hi` of the interpolant; exact for the piecewise cubic.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let Some(grid) = &self.grid else {
            return f64::NAN;
        };
        let (lo, hi, sign) = if lo <= hi { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
        let nodes = grid.nodes();
        let mut total = 0.0;
        let first = nodes[0];
        if lo < first {
            total += self.values[0] * (hi.min(first) - lo);
        }
        if grid.len() > 1 {
            // Two-point Gauss-Legendre is exact for cubics.
            let g = 0.5 / 3f64.sqrt();
            for j in 0..nodes.len() - 1 {
                let a = nodes[j].max(lo);
                let b = nodes[j + 1].min(hi);
                if b <= a {
                    continue;
                }
                let mid = 0.5 * (a + b);
                let half = b - a;
                total += 0.5 * half * (self.hermite(j, mid - g * half) + self.hermite(j, mid + g * half));
            }
        }
        sign * total
    }

    /// Sup-norm distance over values and derivatives weighted by `ω(t) = t(1-t)`.
    pub fn distance(&self, other: &MeshFunction) -> f64 {
        let dv = self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        let dd = self
            .nodes()
            .iter()
            .zip(self.derivs.iter().zip(&other.derivs))
            .fold(0.0, |m: f64, (&t, (a, b))| m.max(t * (1.0 - t) * (a - b).abs()));
        dv.max(dd)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn derivs_mut(&mut self) -> &mut [f64] {
        &mut self.derivs
    }
}
