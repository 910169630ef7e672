//! Euclidean projection onto `{x | Gx ≤ h}`.
//!
//! Hildreth's dual coordinate ascent runs first. If it has not certified the
//! KKT residual within the sweep limit, a Goldfarb–Idnani dual active-set
//! method (identity Hessian) finishes the job and also detects emptiness.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, norm, norm_sq, sub};

use super::polyhedron::Polyhedron;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Hildreth,
    ActiveSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct Projection {
    pub point: Vec<f64>,
    /// One multiplier per input row (zero rows get zero).
    pub multipliers: Vec<f64>,
    /// Max of primal violation and complementarity, on unit-normal rows.
    pub residual: f64,
    pub method: ProjectionMethod,
}

/// Projects `z` onto `p`.
///
/// The result is certified when primal violation and complementarity of the
/// returned multipliers are at most `tol` (stationarity holds by
/// construction). Fails with [`Error::InfeasiblePolyhedron`] when the
/// active-set method proves emptiness.
pub fn project_onto_polyhedron(p: &Polyhedron, z: &[f64], tol: f64, max_sweeps: usize) -> Result<Projection> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("projection tolerance must be positive".into()));
    }
    if z.len() != p.n {
        return Err(Error::InvalidParameter("point dimension differs from polyhedron".into()));
    }
    let (q, scale) = normalized_with_scale(p, tol)?;
    let (x, lam, method) = match hildreth(&q, z, tol, max_sweeps) {
        Some((x, lam)) => (x, lam, ProjectionMethod::Hildreth),
        None => {
            let (x, lam) = goldfarb_idnani(&q, z)?;
            (x, lam, ProjectionMethod::ActiveSet)
        }
    };
    let residual = kkt_residual(&q, &x, &lam);
    if residual > tol.max(1e-9 * (1.0 + norm(z))) {
        return Err(Error::IterationLimit { best: x, residual });
    }
    let mut multipliers = vec![0.0; p.rows.len()];
    for (k, (orig, s)) in scale.iter().enumerate() {
        multipliers[*orig] = lam[k] / s;
    }
    Ok(Projection {
        point: x,
        multipliers,
        residual,
        method,
    })
}

fn normalized_with_scale(p: &Polyhedron, tol: f64) -> Result<(Polyhedron, Vec<(usize, f64)>)> {
    let q = p.normalized(tol)?;
    let scale = p
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let s = norm(&r.g);
            (s > 1e-14).then_some((i, s))
        })
        .collect();
    Ok((q, scale))
}

fn kkt_residual(q: &Polyhedron, x: &[f64], lam: &[f64]) -> f64 {
    let mut r: f64 = 0.0;
    for (row, l) in q.rows.iter().zip(lam) {
        let s = row.residual(x);
        r = r.max(s.max(0.0)).max(l * s.abs());
    }
    r
}

fn hildreth(q: &Polyhedron, z: &[f64], tol: f64, max_sweeps: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = q.rows.len();
    let mut lam = vec![0.0; m];
    let mut x = z.to_vec();
    if m == 0 {
        return Some((x, lam));
    }
    for _ in 0..max_sweeps {
        for (i, row) in q.rows.iter().enumerate() {
            let step = row.residual(&x).max(-lam[i]);
            if step != 0.0 {
                lam[i] += step;
                x = axpy(&x, -step, &row.g);
            }
        }
        if kkt_residual(q, &x, &lam) <= tol {
            return Some((x, lam));
        }
    }
    None
}

/// Dual active-set method for `min ½‖x − z‖²` over unit-normal rows.
fn goldfarb_idnani(q: &Polyhedron, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.n;
    let m = q.rows.len();
    let mut x = z.to_vec();
    let mut lam = vec![0.0; m];
    let mut active: Vec<usize> = Vec::new();
    let add_tol = |h: f64| 1e-13 * (1.0 + h.abs() + norm(z));
    let max_steps = 50 * (m + n) + 100;

    let mut steps = 0;
    loop {
        // Most violated row.
        let mut p = None;
        let mut worst = 0.0;
        for (i, row) in q.rows.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let s = row.residual(&x);
            if s > add_tol(row.h) && s > worst {
                worst = s;
                p = Some(i);
            }
        }
        let Some(p) = p else {
            return Ok((x, lam));
        };
        let gp = &q.rows[p].g;

        loop {
            steps += 1;
            if steps > max_steps {
                let residual = kkt_residual(q, &x, &lam);
                return Err(Error::IterationLimit { best: x, residual });
            }
            let (d, r) = step_direction(q, &active, gp, n);
            let dn2 = norm_sq(&d);
            let s = q.rows[p].residual(&x);

            let mut t1 = f64::INFINITY;
            let mut block = None;
            for (k, &j) in active.iter().enumerate() {
                if r[k] > 1e-14 {
                    let t = lam[j] / r[k];
                    if t < t1 {
                        t1 = t;
                        block = Some(k);
                    }
                }
            }
            let t2 = if dn2 > 1e-20 { s.max(0.0) / dn2 } else { f64::INFINITY };

            if t1.is_infinite() && t2.is_infinite() {
                return Err(Error::InfeasiblePolyhedron);
            }
            let t = t1.min(t2);
            if t2.is_finite() {
                x = axpy(&x, t, &d);
            }
            for (k, &j) in active.iter().enumerate() {
                lam[j] = (lam[j] - t * r[k]).max(0.0);
            }
            lam[p] += t;
            if t2 <= t1 {
                active.push(p);
                break;
            }
            let k = block.expect("finite partial step has a blocking row");
            lam[active[k]] = 0.0;
            active.remove(k);
        }
    }
}

/// Primal direction `−(I − P_A) g_p` and dual direction
/// `r = (G_A G_Aᵀ)⁻¹ G_A g_p` for the active rows `A`.
fn step_direction(q: &Polyhedron, active: &[usize], gp: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    if active.is_empty() {
        return (gp.iter().map(|v| -v).collect(), Vec::new());
    }
    let k = active.len();
    let ga_t = DMatrix::from_fn(n, k, |i, j| q.rows[active[j]].g[i]);
    let qr = ga_t.qr();
    let qm = qr.q();
    let rm = qr.r();
    let g = DVector::from_column_slice(gp);
    let qtg = qm.transpose() * &g;
    let proj = &qm * &qtg;
    let d: Vec<f64> = sub(&proj.as_slice().to_vec(), gp);
    let r = rm
        .solve_upper_triangular(&qtg)
        .map(|v| v.as_slice().to_vec())
        .unwrap_or_else(|| vec![0.0; k]);
    (d, r)
}

#[cfg(test)]
/// Distance-squared gap certificate used by tests: `Σ λ_i (h_i − g_iᵀx)`.
pub(crate) fn complementarity_gap(p: &Polyhedron, x: &[f64], lam: &[f64]) -> f64 {
    p.rows
        .iter()
        .zip(lam)
        .map(|(r, l)| l * (r.h - crate::linalg::dot(&r.g, x)))
        .sum()
}
