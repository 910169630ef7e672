//! Quadratic cuts, outer approximations built from them, and their
//! linearization on a sphere `‖x‖² = α`.
//!
//! A cut is stored as `q(x) = −a‖x‖² + bᵀx + c ≤ 0`. For `a > 0` its violated
//! region `{q > 0}` is an open ball, so an outer approximation is the
//! complement of a union of balls (intersected with halfspaces for `a = 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Halfspace, Polyhedron};
use crate::linalg::{dist_sq, dot, norm, norm_sq};
use crate::model::{Constraint, Problem, ViolationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCut {
    pub a: f64,
    pub b: Vec<f64>,
    pub c: f64,
    /// Index of the constraint the cut was generated from.
    pub constraint: usize,
    /// Iteration at which it was generated.
    pub iter: usize,
}

impl QuadraticCut {
    pub fn eval(&self, x: &[f64]) -> f64 {
        -self.a * norm_sq(x) + dot(&self.b, x) + self.c
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// The same cut in coordinates `u = x − z`.
    pub fn shifted(&self, z: &[f64]) -> QuadraticCut {
        let b = self
            .b
            .iter()
            .zip(z)
            .map(|(bi, zi)| bi - 2.0 * self.a * zi)
            .collect();
        let c = self.c - self.a * norm_sq(z) + dot(&self.b, z);
        QuadraticCut {
            a: self.a,
            b,
            c,
            constraint: self.constraint,
            iter: self.iter,
        }
    }

    /// Center and squared radius of the excluded ball; `None` for halfspace
    /// cuts and for cuts that exclude nothing.
    pub fn excluded_ball(&self) -> Option<(Vec<f64>, f64)> {
        if self.a <= 0.0 {
            return None;
        }
        let center: Vec<f64> = self.b.iter().map(|v| v / (2.0 * self.a)).collect();
        let r2 = norm_sq(&center) + self.c / self.a;
        (r2 > 0.0).then_some((center, r2))
    }

    /// Row `bᵀx ≤ aα − c` obtained by fixing `‖x‖² = α`.
    pub fn linearize(&self, alpha: f64) -> Halfspace {
        Halfspace::new(self.b.clone(), self.a * alpha - self.c)
    }
}

/// Builds the cut of constraint `index` at `x`:
/// `a = a_i`, `b ∈ ∂f̃_i(x)`, `c = f_i(x) + a_i‖x‖² − bᵀx`, so `q(x) = f_i(x)`.
pub fn build_cut(con: &dyn Constraint, index: usize, x: &[f64], iter: usize) -> Result<QuadraticCut> {
    let f = con.eval(x);
    if !f.is_finite() {
        return Err(Error::NonFiniteValue {
            label: con.label().to_string(),
            value: f,
        });
    }
    let b = con
        .convexified_gradient(x)
        .filter(|b| b.len() == x.len() && b.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::SubgradientUnavailable(con.label().to_string()))?;
    let a = con.curvature();
    let c = f + a * norm_sq(x) - dot(&b, x);
    Ok(QuadraticCut {
        a,
        b,
        c,
        constraint: index,
        iter,
    })
}

/// Center `b/(2a)` and radius `√(‖x_ℓ − center‖² + f/a)` of the ball a cut
/// removes, given the point it was built at and the constraint value there.
pub fn ball_of_cut(cut: &QuadraticCut, x_l: &[f64], f_val: f64) -> Result<(Vec<f64>, f64)> {
    if cut.a == 0.0 {
        return Err(Error::DegenerateHalfspace);
    }
    if !(cut.a > 0.0) {
        return Err(Error::InvalidParameter("cut curvature must be nonnegative".into()));
    }
    let center: Vec<f64> = cut.b.iter().map(|v| v / (2.0 * cut.a)).collect();
    let r2 = dist_sq(x_l, &center) + f_val / cut.a;
    if r2 < 0.0 {
        return Err(Error::PreconditionViolated("negative squared radius".into()));
    }
    Ok((center, r2.sqrt()))
}

/// True iff every point of the sphere `‖x‖² = α` satisfies the linearized cut:
/// `‖b‖√α ≤ aα − c`.
pub fn is_redundant_at_level(cut: &QuadraticCut, alpha: f64) -> bool {
    norm(&cut.b) * alpha.max(0.0).sqrt() <= cut.a * alpha - cut.c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestartKind {
    /// Keep the cuts at the current point plus the level floor.
    Warm,
    /// Keep only the level floor.
    Inexact,
}

/// The feasible set of an outer subproblem: every cut satisfied and, if set,
/// `‖x‖² ≥ norm_floor` in the frame the cuts are expressed in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OuterApproximation {
    pub cuts: Vec<QuadraticCut>,
    pub norm_floor: Option<f64>,
    pub last_restart: usize,
}

impl OuterApproximation {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Cumulative step: the same set with extra cuts.
    pub fn with_cuts(&self, extra: impl IntoIterator<Item = QuadraticCut>) -> Self {
        let mut next = self.clone();
        next.cuts.extend(extra);
        next
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let floor_ok = self.norm_floor.map_or(true, |f| norm_sq(x) >= f - tol);
        floor_ok && self.cuts.iter().all(|q| q.eval(x) <= tol)
    }

    /// Cuts plus the floor written as the cut `−‖x‖² + α ≤ 0`.
    pub fn all_cuts(&self, n: usize) -> Vec<QuadraticCut> {
        let mut v = self.cuts.clone();
        if let Some(f) = self.norm_floor {
            v.push(QuadraticCut {
                a: 1.0,
                b: vec![0.0; n],
                c: f,
                constraint: usize::MAX,
                iter: self.last_restart,
            });
        }
        v
    }
}

/// Appends one cut per violated constraint, built at `x_k` in the problem's
/// own coordinates.
pub fn append_cuts(
    oa: &OuterApproximation,
    p: &Problem,
    report: &ViolationReport,
    x_k: &[f64],
    iter: usize,
) -> Result<OuterApproximation> {
    if report.is_empty() {
        return Err(Error::PreconditionViolated("no violated constraint to cut".into()));
    }
    let cuts = report
        .indices
        .iter()
        .map(|&i| build_cut(p.constraints[i].as_ref(), i, x_k, iter))
        .collect::<Result<Vec<_>>>()?;
    Ok(oa.with_cuts(cuts))
}

/// The set a restart at iteration `iter` continues from.
pub fn restart_set(
    cuts_at_xk: &[QuadraticCut],
    j_k: f64,
    kind: RestartKind,
    iter: usize,
) -> OuterApproximation {
    let cuts = match kind {
        RestartKind::Warm => cuts_at_xk.to_vec(),
        RestartKind::Inexact => Vec::new(),
    };
    OuterApproximation {
        cuts,
        norm_floor: Some(j_k),
        last_restart: iter,
    }
}

/// An outer approximation restricted to `‖x‖² = α`, written as linear rows.
#[derive(Debug, Clone)]
pub struct LevelPolyhedron {
    pub alpha: f64,
    pub poly: Polyhedron,
    /// For each row, the index of the cut it came from.
    pub source: Vec<usize>,
}

/// Drops the floor (vacuous on the sphere) and cuts redundant at `α`.
pub fn linearize_at_level(oa: &OuterApproximation, n: usize, alpha: f64) -> LevelPolyhedron {
    let mut rows = Vec::new();
    let mut source = Vec::new();
    for (j, cut) in oa.cuts.iter().enumerate() {
        if is_redundant_at_level(cut, alpha) {
            continue;
        }
        rows.push(cut.linearize(alpha));
        source.push(j);
    }
    LevelPolyhedron {
        alpha,
        poly: Polyhedron::new(n, rows),
        source,
    }
}
