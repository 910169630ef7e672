use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_sq, scale, sub};

use super::center::centered_witness;
use super::maxnorm::{max_norm_over_polyhedron, MaxNormOutcome};
use super::polyhedron::Polyhedron;
use super::projection::project_onto_polyhedron;
use super::GeometryConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// The polyhedron itself is empty.
    NoPolyhedron,
    /// The closest point of the polyhedron lies outside the sphere.
    OutsideBall,
    /// The whole polyhedron lies inside the open ball.
    InsideBall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibilityOutcome {
    Point { x: Vec<f64> },
    Empty {
        reason: EmptyReason,
        min_norm_sq: Option<f64>,
        max_norm_sq: Option<f64>,
    },
    /// The norm maximization hit its budget; `best_norm_sq < α` so far.
    Uncertified { min_norm_sq: f64, best_norm_sq: f64 },
}

impl FeasibilityOutcome {
    pub fn branch(&self) -> &'static str {
        match self {
            Self::Point { .. } => "point",
            Self::Empty {
                reason: EmptyReason::NoPolyhedron,
                ..
            } => "empty_polyhedron",
            Self::Empty {
                reason: EmptyReason::OutsideBall,
                ..
            } => "empty_min_norm",
            Self::Empty {
                reason: EmptyReason::InsideBall,
                ..
            } => "empty_max_norm",
            Self::Uncertified { .. } => "uncertified",
        }
    }
}

/// The point `x1 + t(x2 − x1)`, `t ∈ [0, 1]` smallest, with `‖x‖² = α`.
pub fn segment_sphere_intersection(x1: &[f64], x2: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n1 = norm_sq(x1);
    let n2 = norm_sq(x2);
    let slack = 1e-12 * alpha.abs().max(1.0);
    if n1 > alpha + slack || n2 < alpha - slack {
        return Err(Error::PreconditionViolated(format!(
            "need ‖x1‖² ≤ α ≤ ‖x2‖², got {n1} ≤ {alpha} ≤ {n2}"
        )));
    }
    let c = n1 - alpha;
    if c >= 0.0 {
        return Ok(x1.to_vec());
    }
    let d = sub(x2, x1);
    let a = norm_sq(&d);
    let b = 2.0 * dot(x1, &d);
    // c < 0 so the roots have opposite signs; this is the positive one.
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let t = (-2.0 * c / (b + disc.sqrt())).clamp(0.0, 1.0);
    Ok(axpy(x1, t, &d))
}

/// Decides whether `{‖x‖² = α}` meets `p`, returning a witness if so.
pub fn sphere_polyhedron_feasibility(p: &Polyhedron, alpha: f64, cfg: &GeometryConfig) -> Result<FeasibilityOutcome> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("level must be nonnegative, got {alpha}")));
    }
    let x1 = match project_onto_polyhedron(p, &vec![0.0; p.n], cfg.projection_tol, cfg.projection_sweeps) {
        Ok(pr) => pr.point,
        Err(Error::InfeasiblePolyhedron) => {
            return Ok(FeasibilityOutcome::Empty {
                reason: EmptyReason::NoPolyhedron,
                min_norm_sq: None,
                max_norm_sq: None,
            })
        }
        Err(e) => return Err(e),
    };
    let n1 = norm_sq(&x1);
    let sphere_tol = cfg.sphere_tol_rel * alpha.max(1.0);
    if n1 > alpha {
        if n1 <= alpha + sphere_tol && alpha > 0.0 {
            return Ok(FeasibilityOutcome::Point {
                x: scale(&x1, (alpha / n1).sqrt()),
            });
        }
        return Ok(FeasibilityOutcome::Empty {
            reason: EmptyReason::OutsideBall,
            min_norm_sq: Some(n1),
            max_norm_sq: None,
        });
    }
    match max_norm_over_polyhedron(p, alpha, cfg)? {
        MaxNormOutcome::Reached { point } | MaxNormOutcome::Unbounded { point, .. } => {
            let centered = if cfg.center_witness {
                centered_witness(p, alpha, &x1, &point)
            } else {
                None
            };
            let x = match centered {
                Some(x) => x,
                None => segment_sphere_intersection(&x1, &point, alpha)?,
            };
            Ok(FeasibilityOutcome::Point { x })
        }
        MaxNormOutcome::Bounded { value, .. } => Ok(FeasibilityOutcome::Empty {
            reason: EmptyReason::InsideBall,
            min_norm_sq: Some(n1),
            max_norm_sq: Some(value),
        }),
        MaxNormOutcome::Uncertified { best_value, .. } => Ok(FeasibilityOutcome::Uncertified {
            min_norm_sq: n1,
            best_norm_sq: best_value,
        }),
    }
}
