//! Small dense vector helpers and the few factorizations the kernels need.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + t·d`
pub fn axpy(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Builds a matrix whose rows are the given vectors.
pub fn rows_to_matrix(rows: &[&[f64]], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Numerical rank from singular values, relative to the largest one.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax.max(1.0)).count()
}

/// Orthonormal basis (as columns) of the null space of `m`, plus its rank.
pub fn null_space(m: &DMatrix<f64>, ncols: usize, rel_tol: f64) -> (DMatrix<f64>, usize) {
    if m.nrows() == 0 {
        return (DMatrix::identity(ncols, ncols), 0);
    }
    // Pad to a square system so the full right singular basis is returned.
    let mut padded = DMatrix::zeros(m.nrows().max(ncols), ncols);
    padded.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(1.0);
    let mut null_cols = Vec::new();
    let mut r = 0;
    for (i, s) in sv.iter().enumerate() {
        if *s > rel_tol * smax {
            r += 1;
        } else {
            null_cols.push(i);
        }
    }
    let basis = DMatrix::from_fn(ncols, null_cols.len(), |i, j| v_t[(null_cols[j], i)]);
    (basis, r)
}

/// Minimum-norm solution of `A x = b` for a full-row-rank or rank-deficient
/// `A`; returns `None` when the system is inconsistent beyond `tol`.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    if a.nrows() == 0 {
        return Some(DVector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-11 * smax.max(1.0);
    let x = svd.solve(b, eps).ok()?;
    let resid = (a * &x - b).amax();
    if resid > tol * (1.0 + b.amax()) {
        None
    } else {
        Some(x)
    }
}

/// Solves the square system `A x = b`, `None` if `A` is numerically singular.
pub fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().full_piv_lu();
    if !lu.is_invertible() {
        return None;
    }
    let x = lu.solve(b)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

pub fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
