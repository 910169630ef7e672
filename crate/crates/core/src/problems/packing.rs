use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{reformulate, Constraint, Problem};

/// Unit or unequal circles to pack into the smallest enclosing circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSpec {
    pub radii: Vec<f64>,
}

impl PackingSpec {
    pub fn unit(m: usize) -> Self {
        Self { radii: vec![1.0; m] }
    }

    pub fn m(&self) -> usize {
        self.radii.len()
    }
}

/// `−(x_i − x_j)² − (y_i − y_j)² + (r_i + r_j)² ≤ 0` over `(x_1..x_m, y_1..y_m)`.
///
/// The quadratic part is `−‖D u‖²` with `D u = (x_i − x_j, y_i − y_j)`;
/// `DᵀD` has eigenvalues `{2, 2, 0, …}`, so the Hessian `−2DᵀD` has smallest
/// eigenvalue `−4` and `f + 2‖·‖²` is the tightest convexification.
#[derive(Debug, Clone)]
pub struct PairOverlap {
    pub m: usize,
    pub i: usize,
    pub j: usize,
    pub rsum: f64,
    label: String,
}

impl PairOverlap {
    pub fn new(m: usize, i: usize, j: usize, ri: f64, rj: f64) -> Self {
        Self {
            m,
            i,
            j,
            rsum: ri + rj,
            label: format!("overlap({},{})", i + 1, j + 1),
        }
    }
}

impl Constraint for PairOverlap {
    fn dim(&self) -> usize {
        2 * self.m
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let (m, i, j) = (self.m, self.i, self.j);
        let dx = u[i] - u[j];
        let dy = u[m + i] - u[m + j];
        -dx * dx - dy * dy + self.rsum * self.rsum
    }

    fn curvature(&self) -> f64 {
        2.0
    }

    fn convexified_gradient(&self, u: &[f64]) -> Option<Vec<f64>> {
        let (m, i, j) = (self.m, self.i, self.j);
        let mut g: Vec<f64> = u.iter().map(|v| 4.0 * v).collect();
        let dx = u[i] - u[j];
        let dy = u[m + i] - u[m + j];
        g[i] -= 2.0 * dx;
        g[j] += 2.0 * dx;
        g[m + i] -= 2.0 * dy;
        g[m + j] += 2.0 * dy;
        Some(g)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// `F(x, y) = max_i (‖(x_i, y_i)‖ + r_i)²`, the squared enclosing radius.
///
/// Each term is convex, so `F` is convex and needs no curvature. The
/// subgradient uses the smallest maximizing index, and the term gradient
/// `2(‖c‖ + r) c/‖c‖` is taken as zero at `c = 0`.
#[derive(Debug, Clone)]
pub struct EnclosingSquare {
    pub radii: Vec<f64>,
}

impl EnclosingSquare {
    fn terms(&self, u: &[f64]) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let m = self.radii.len();
        let u = u.to_vec();
        (0..m).map(move |i| {
            let c = (u[i] * u[i] + u[m + i] * u[m + i]).sqrt();
            let t = c + self.radii[i];
            (i, c, t * t)
        })
    }
}

impl Constraint for EnclosingSquare {
    fn dim(&self) -> usize {
        2 * self.radii.len()
    }

    fn eval(&self, u: &[f64]) -> f64 {
        self.terms(u).map(|t| t.2).fold(f64::NEG_INFINITY, f64::max)
    }

    fn curvature(&self) -> f64 {
        0.0
    }

    fn convexified_gradient(&self, u: &[f64]) -> Option<Vec<f64>> {
        let m = self.radii.len();
        let mut best = (0, 0.0, f64::NEG_INFINITY);
        for t in self.terms(u) {
            if t.2 > best.2 {
                best = t;
            }
        }
        let (i, c, _) = best;
        let mut g = vec![0.0; 2 * m];
        if c > 0.0 {
            let s = 2.0 * (c + self.radii[i]) / c;
            g[i] = s * u[i];
            g[m + i] = s * u[m + i];
        }
        Some(g)
    }

    fn label(&self) -> &str {
        "enclosing"
    }
}

/// Minimize `‖(x, y, p)‖²` subject to `F(x, y) − ‖(x, y, p)‖²/m ≤ 0` and the
/// pairwise non-overlap constraints, in dimension `2m + 1`.
///
/// At an optimum `‖(x, y, p)‖² = m·F`, so the optimal level is `m` times the
/// squared enclosing radius. The lift with `η = 0` needs
/// `F(x) ≥ ‖x‖²/m` at a minimizer; it holds everywhere because the largest
/// `‖c_i‖²` is at least their mean.
pub fn build_packing(spec: &PackingSpec) -> Result<Problem> {
    let m = spec.m();
    if m < 2 {
        return Err(Error::InvalidParameter("packing needs at least two circles".into()));
    }
    if spec.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    let f: Arc<dyn Constraint> = Arc::new(EnclosingSquare {
        radii: spec.radii.clone(),
    });
    let mut pairs: Vec<Arc<dyn Constraint>> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            pairs.push(Arc::new(PairOverlap::new(m, i, j, spec.radii[i], spec.radii[j])));
        }
    }
    let p = reformulate(f, pairs, 2.0 / m as f64, 0.0)?;
    Ok(p)
}

/// Circle centers `(x_i, y_i)` from a packing point.
pub fn packing_centers(y: &[f64], m: usize) -> Vec<[f64; 2]> {
    (0..m).map(|i| [y[i], y[m + i]]).collect()
}

/// `max_i (‖c_i‖ + r_i)`, the enclosing radius (square root of `F`).
pub fn packing_radius_of(y: &[f64], spec: &PackingSpec) -> f64 {
    let m = spec.m();
    packing_centers(y, m)
        .iter()
        .zip(&spec.radii)
        .map(|(c, r)| (c[0] * c[0] + c[1] * c[1]).sqrt() + r)
        .fold(f64::NEG_INFINITY, f64::max)
}
