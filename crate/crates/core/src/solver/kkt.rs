//! Sufficient global optimality conditions for `min ‖x − z‖²` over a set of
//! quadratic cuts, and the companion diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cuts::QuadraticCut;
use crate::error::Result;
use crate::linalg::{norm, norm_sq, rank};
use crate::model::{violated_set, Problem};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KktViolation {
    LengthMismatch { cuts: usize, multipliers: usize },
    ZeroMultipliers,
    NegativeMultiplier { index: usize, value: f64 },
    Infeasible { index: usize, value: f64 },
    Stationarity { residual: f64 },
    Complementarity { index: usize, value: f64 },
    Curvature { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "violations", rename_all = "snake_case")]
pub enum KktVerdict {
    SufficientGlobal,
    Violated(Vec<KktViolation>),
}

impl KktVerdict {
    pub fn is_global(&self) -> bool {
        matches!(self, Self::SufficientGlobal)
    }
}

/// Checks, for nonzero `γ ≥ 0` and feasible `x*`:
///
/// 1. `2(x* − z) + Σ γ_i (b_i − 2 a_i x*) = 0`,
/// 2. `γ_i q_i(x*) = 0`,
/// 3. `1 − Σ γ_i a_i ≥ 0`.
///
/// Together they certify that `x*` is a global minimizer.
pub fn check_kkt_certificate(cuts: &[QuadraticCut], z: &[f64], x: &[f64], gamma: &[f64], tol: f64) -> KktVerdict {
    let mut v = Vec::new();
    if cuts.len() != gamma.len() {
        return KktVerdict::Violated(vec![KktViolation::LengthMismatch {
            cuts: cuts.len(),
            multipliers: gamma.len(),
        }]);
    }
    if gamma.iter().all(|g| *g == 0.0) {
        v.push(KktViolation::ZeroMultipliers);
    }
    let scale = 1.0 + norm_sq(x).max(norm_sq(z));
    let mut stat: Vec<f64> = x.iter().zip(z).map(|(xi, zi)| 2.0 * (xi - zi)).collect();
    let mut curv = 1.0;
    for (i, (q, g)) in cuts.iter().zip(gamma).enumerate() {
        if *g < 0.0 {
            v.push(KktViolation::NegativeMultiplier { index: i, value: *g });
        }
        let qx = q.eval(x);
        if qx > tol * scale {
            v.push(KktViolation::Infeasible { index: i, value: qx });
        }
        if (g * qx).abs() > tol * scale {
            v.push(KktViolation::Complementarity { index: i, value: g * qx });
        }
        for (s, (bj, xj)) in stat.iter_mut().zip(q.b.iter().zip(x)) {
            *s += g * (bj - 2.0 * q.a * xj);
        }
        curv -= g * q.a;
    }
    let residual = norm(&stat);
    if residual > tol * scale.sqrt() {
        v.push(KktViolation::Stationarity { residual });
    }
    if curv < -tol {
        v.push(KktViolation::Curvature { value: curv });
    }
    if v.is_empty() {
        KktVerdict::SufficientGlobal
    } else {
        KktVerdict::Violated(v)
    }
}

/// Least-squares multipliers for the cuts active at `x` (inactive ones get
/// zero). Useful as input to [`check_kkt_certificate`].
pub fn estimate_multipliers(cuts: &[QuadraticCut], z: &[f64], x: &[f64], active_tol: f64) -> Vec<f64> {
    let n = x.len();
    let active: Vec<usize> = (0..cuts.len())
        .filter(|&i| cuts[i].eval(x).abs() <= active_tol * (1.0 + norm_sq(x)))
        .collect();
    let mut gamma = vec![0.0; cuts.len()];
    if active.is_empty() {
        return gamma;
    }
    // Columns: b_i − 2 a_i x; right-hand side: −2(x − z).
    let a = DMatrix::from_fn(n, active.len(), |r, c| {
        let q = &cuts[active[c]];
        q.b[r] - 2.0 * q.a * x[r]
    });
    let rhs = DVector::from_iterator(n, x.iter().zip(z).map(|(xi, zi)| -2.0 * (xi - zi)));
    if let Ok(sol) = a.svd(true, true).solve(&rhs, 1e-12) {
        for (c, &i) in active.iter().enumerate() {
            gamma[i] = sol[c];
        }
    }
    gamma
}

/// True iff `rank{−2z, b_1, …, b_m} < n`.
pub fn check_dimension_condition(cuts: &[QuadraticCut], z: &[f64]) -> bool {
    let n = z.len();
    let rows = cuts.len() + 1;
    let m = DMatrix::from_fn(rows, n, |r, c| if r == 0 { -2.0 * z[c] } else { cuts[r - 1].b[c] });
    rank(&m, 1e-10) < n
}

/// `max_{i ∈ I(x)} (f_i(x) + a_i‖x‖²)₊`, a surrogate for the distance from `x`
/// to the feasible set up to an unknown constant. Zero when `x` is feasible.
pub fn infeasibility_diagnostic(p: &Problem, x: &[f64]) -> Result<f64> {
    let rep = violated_set(p, x)?;
    let nx = norm_sq(x);
    Ok(rep
        .indices
        .iter()
        .zip(&rep.values)
        .map(|(&i, f)| (f + p.constraints[i].curvature() * nx).max(0.0))
        .fold(0.0, f64::max))
}
