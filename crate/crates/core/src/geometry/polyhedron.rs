use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// `gᵀx ≤ h`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub g: Vec<f64>,
    pub h: f64,
}

impl Halfspace {
    pub fn new(g: Vec<f64>, h: f64) -> Self {
        Self { g, h }
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        dot(&self.g, x) - self.h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub n: usize,
    pub rows: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn new(n: usize, rows: Vec<Halfspace>) -> Self {
        Self { n, rows }
    }

    pub fn from_rows(rows: &[(Vec<f64>, f64)]) -> Result<Self> {
        let n = rows.first().map(|r| r.0.len()).ok_or_else(|| {
            Error::InvalidParameter("cannot infer dimension from zero rows".into())
        })?;
        if rows.iter().any(|r| r.0.len() != n) {
            return Err(Error::InvalidParameter("rows have different lengths".into()));
        }
        Ok(Self::new(
            n,
            rows.iter().map(|(g, h)| Halfspace::new(g.clone(), *h)).collect(),
        ))
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.push(Halfspace::new(e.clone(), hi[i]));
            e[i] = -1.0;
            rows.push(Halfspace::new(e, -lo[i]));
        }
        Self::new(n, rows)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if r.g.len() != self.n {
                return Err(Error::InvalidParameter("row length differs from dimension".into()));
            }
            if !r.h.is_finite() || r.g.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("row has non-finite entries".into()));
            }
        }
        Ok(())
    }

    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.residual(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Membership with an absolute plus scale-relative slack per row.
    pub fn contains(&self, x: &[f64], tol_abs: f64, tol_rel: f64) -> bool {
        let nx = norm(x);
        self.rows.iter().all(|r| {
            let scale = r.h.abs().max(norm(&r.g) * nx);
            r.residual(x) <= tol_abs + tol_rel * scale
        })
    }

    /// Rows scaled to unit normals; zero rows are dropped, or reported as
    /// infeasible when their right-hand side is negative.
    pub(crate) fn normalized(&self, tol: f64) -> Result<Polyhedron> {
        self.validate()?;
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let gn = norm(&r.g);
            if gn <= 1e-14 {
                if r.h < -tol {
                    return Err(Error::InfeasiblePolyhedron);
                }
                continue;
            }
            rows.push(Halfspace::new(r.g.iter().map(|v| v / gn).collect(), r.h / gn));
        }
        Ok(Polyhedron::new(self.n, rows))
    }
}
