//! Problem definition: weakly convex constraints, the distance objective and
//! the slack-variable lift that turns a weakly convex objective into one more
//! constraint.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, norm_sq};

/// A constraint `f(x) ≤ 0` where `f + a‖·‖²` is convex for the declared
/// curvature `a`.
///
/// Implementations must be pure: the same input always gives the same output.
pub trait Constraint: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// The constant `a ≥ 0` making `f + a‖·‖²` convex.
    fn curvature(&self) -> f64;

    /// An element of the subdifferential of `f + a‖·‖²` at `x`.
    fn convexified_gradient(&self, x: &[f64]) -> Option<Vec<f64>>;

    fn label(&self) -> &str;
}

/// `f(x) = p‖x‖² + bᵀx + c`, the only shape the config file can describe
/// without code.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalQuadratic {
    pub p: f64,
    pub b: Vec<f64>,
    pub c: f64,
    pub label: String,
}

impl SphericalQuadratic {
    pub fn new(p: f64, b: Vec<f64>, c: f64, label: impl Into<String>) -> Self {
        Self {
            p,
            b,
            c,
            label: label.into(),
        }
    }

    /// `r² − ‖x − center‖² ≤ 0`: stay outside the open ball.
    pub fn outside_ball(center: &[f64], radius: f64, label: impl Into<String>) -> Self {
        let b = center.iter().map(|v| 2.0 * v).collect();
        Self::new(-1.0, b, radius * radius - norm_sq(center), label)
    }

    /// `‖x − center‖² − r² ≤ 0`: stay inside the closed ball.
    pub fn inside_ball(center: &[f64], radius: f64, label: impl Into<String>) -> Self {
        let b = center.iter().map(|v| -2.0 * v).collect();
        Self::new(1.0, b, norm_sq(center) - radius * radius, label)
    }
}

impl Constraint for SphericalQuadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.p * norm_sq(x) + dot(&self.b, x) + self.c
    }

    fn curvature(&self) -> f64 {
        (-self.p).max(0.0)
    }

    fn convexified_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s = 2.0 * (self.p + self.curvature());
        Some(x.iter().zip(&self.b).map(|(xi, bi)| s * xi + bi).collect())
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Minimize `‖x − z‖²` subject to every constraint being nonpositive.
#[derive(Debug, Clone)]
pub struct Problem {
    pub n: usize,
    pub z: Vec<f64>,
    pub constraints: Vec<Arc<dyn Constraint>>,
    /// Upper level used to describe the working region; metadata only.
    pub level_cap: Option<f64>,
    /// Hypotheses the builder asserts but cannot check at runtime.
    pub assumptions: Vec<String>,
}

impl Problem {
    pub fn new(z: Vec<f64>, constraints: Vec<Arc<dyn Constraint>>) -> Result<Self> {
        let n = z.len();
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidParameter("at least one constraint is required".into()));
        }
        if let Some(c) = constraints.iter().find(|c| c.dim() != n) {
            return Err(Error::InvalidParameter(format!(
                "constraint `{}` has dimension {}, expected {n}",
                c.label(),
                c.dim()
            )));
        }
        if let Some(c) = constraints.iter().find(|c| !(c.curvature() >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "constraint `{}` has negative curvature",
                c.label()
            )));
        }
        Ok(Self {
            n,
            z,
            constraints,
            level_cap: None,
            assumptions: Vec::new(),
        })
    }

    pub fn with_level_cap(mut self, cap: f64) -> Self {
        self.level_cap = Some(cap);
        self
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dist_sq(x, &self.z)
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// All constraint values at `x`, failing on the first non-finite one.
    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints
            .iter()
            .map(|c| {
                let v = c.eval(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteValue {
                        label: c.label().to_string(),
                        value: v,
                    })
                }
            })
            .collect()
    }
}

/// Indices of strictly violated constraints, with their values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// `max_i f_i(x)` over all constraints, violated or not.
    pub max_value: f64,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

pub fn violated_set(p: &Problem, x: &[f64]) -> Result<ViolationReport> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("point has non-finite coordinates".into()));
    }
    let vals = p.values(x)?;
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        if *v > 0.0 {
            indices.push(i);
            values.push(*v);
        }
    }
    let max_value = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ViolationReport {
        indices,
        values,
        max_value,
    })
}

/// `F(ȳ) + η − (ρ/2)‖y‖²` on the lifted space `y = (ȳ, s)`.
#[derive(Debug)]
struct LiftedObjective {
    f: Arc<dyn Constraint>,
    rho: f64,
    eta: f64,
    label: String,
}

impl Constraint for LiftedObjective {
    fn dim(&self) -> usize {
        self.f.dim() + 1
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let n = self.f.dim();
        self.f.eval(&y[..n]) + self.eta - 0.5 * self.rho * norm_sq(y)
    }

    fn curvature(&self) -> f64 {
        self.f.curvature() + 0.5 * self.rho
    }

    fn convexified_gradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        // F + a_F‖ȳ‖² + a_F s² + η: the slack enters only through a_F s².
        let n = self.f.dim();
        let mut g = self.f.convexified_gradient(&y[..n])?;
        g.push(2.0 * self.f.curvature() * y[n]);
        Some(g)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// A constraint on `ȳ` that ignores the trailing slack coordinate.
#[derive(Debug)]
struct Lifted {
    g: Arc<dyn Constraint>,
}

impl Constraint for Lifted {
    fn dim(&self) -> usize {
        self.g.dim() + 1
    }

    fn eval(&self, y: &[f64]) -> f64 {
        self.g.eval(&y[..self.g.dim()])
    }

    fn curvature(&self) -> f64 {
        self.g.curvature()
    }

    fn convexified_gradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        let n = self.g.dim();
        let mut b = self.g.convexified_gradient(&y[..n])?;
        b.push(2.0 * self.g.curvature() * y[n]);
        Some(b)
    }

    fn label(&self) -> &str {
        self.g.label()
    }
}

/// Turns `min F(x) s.t. g_i(x) ≤ 0` into `min ‖y‖²` over `y = (x, s)` with
/// constraints `F(x) + η − (ρ/2)‖y‖² ≤ 0` and `g_i(x) ≤ 0`.
///
/// `F` is passed as a [`Constraint`] whose curvature is half its weak
/// convexity modulus. Valid when some minimizer `x̂` of `F` satisfies
/// `F(x̂) + η ≥ (ρ/2)‖x̂‖²`; that hypothesis is recorded, not checked.
pub fn reformulate(
    f: Arc<dyn Constraint>,
    g: Vec<Arc<dyn Constraint>>,
    rho: f64,
    eta: f64,
) -> Result<Problem> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if !eta.is_finite() {
        return Err(Error::InvalidParameter("eta must be finite".into()));
    }
    let n = f.dim();
    if let Some(c) = g.iter().find(|c| c.dim() != n) {
        return Err(Error::InvalidParameter(format!(
            "constraint `{}` has dimension {}, expected {n}",
            c.label(),
            c.dim()
        )));
    }
    let label = format!("{}+slack", f.label());
    let mut cons: Vec<Arc<dyn Constraint>> = vec![Arc::new(LiftedObjective { f, rho, eta, label })];
    cons.extend(g.into_iter().map(|g| Arc::new(Lifted { g }) as Arc<dyn Constraint>));
    let mut p = Problem::new(vec![0.0; n + 1], cons)?;
    p.assumptions.push(format!(
        "some minimizer x of F satisfies F(x) + {eta} >= {}·‖x‖²",
        0.5 * rho
    ));
    Ok(p)
}

/// Drops the slack coordinate of a lifted solution.
pub fn recover_original_solution(p: &Problem, y: &[f64]) -> Vec<f64> {
    y[..p.n.saturating_sub(1).min(y.len())].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball_outside() -> Problem {
        let c = SphericalQuadratic::new(-1.0, vec![0.0, 0.0], 1.0, "ring");
        Problem::new(vec![0.0, 0.0], vec![Arc::new(c)]).unwrap()
    }

    #[test]
    fn violated_set_is_strict() {
        let c = SphericalQuadratic::new(1.0, vec![0.0, 0.0], -1.0, "ball");
        let p = Problem::new(vec![0.0, 0.0], vec![Arc::new(c)]).unwrap();
        assert!(violated_set(&p, &[0.0, 0.0]).unwrap().is_empty());
        let r = violated_set(&p, &[2.0, 0.0]).unwrap();
        assert_eq!(r.indices, vec![0]);
        assert_eq!(r.values, vec![3.0]);
        assert!(violated_set(&p, &[1.0, 0.0]).unwrap().is_empty());
    }

    #[test]
    fn non_finite_value_is_an_error() {
        #[derive(Debug)]
        struct Bad;
        impl Constraint for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, _: &[f64]) -> f64 {
                f64::NAN
            }
            fn curvature(&self) -> f64 {
                0.0
            }
            fn convexified_gradient(&self, _: &[f64]) -> Option<Vec<f64>> {
                None
            }
            fn label(&self) -> &str {
                "bad"
            }
        }
        let p = Problem::new(vec![0.0], vec![Arc::new(Bad)]).unwrap();
        assert!(matches!(violated_set(&p, &[0.0]), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn problem_rejects_dimension_mismatch() {
        let c = SphericalQuadratic::new(1.0, vec![0.0; 3], 0.0, "c");
        assert!(Problem::new(vec![0.0, 0.0], vec![Arc::new(c)]).is_err());
        assert!(Problem::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn convex_objective_lift_has_unit_curvature() {
        let f = Arc::new(SphericalQuadratic::new(0.0, vec![1.0, 0.0], 0.0, "lin"));
        let p = reformulate(f, vec![], 2.0, 0.0).unwrap();
        assert_eq!(p.n, 3);
        assert_eq!(p.constraints[0].curvature(), 1.0);
        let y = [0.5, 1.0, 2.0];
        assert!((p.constraints[0].eval(&y) - (0.5 - 5.25)).abs() < 1e-15);
        assert_eq!(p.assumptions.len(), 1);
    }

    #[test]
    fn reformulate_rejects_nonpositive_rho() {
        let f = Arc::new(SphericalQuadratic::new(0.0, vec![1.0], 0.0, "lin"));
        assert!(matches!(
            reformulate(f, vec![], 0.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn recover_drops_slack() {
        let f = Arc::new(SphericalQuadratic::new(0.0, vec![1.0, 0.0], 0.0, "lin"));
        let p = reformulate(f, vec![], 2.0, 0.0).unwrap();
        assert_eq!(recover_original_solution(&p, &[3.0, 4.0, 0.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn lifted_gradient_matches_finite_differences() {
        let f: Arc<dyn Constraint> = Arc::new(SphericalQuadratic::new(-0.5, vec![1.0, -2.0], 0.3, "f"));
        let g: Arc<dyn Constraint> = Arc::new(SphericalQuadratic::new(-2.0, vec![0.5, 0.5], 1.0, "g"));
        let p = reformulate(f, vec![g], 2.0, 0.7).unwrap();
        let y = [0.3, -0.7, 1.1];
        for c in &p.constraints {
            let a = c.curvature();
            let ft = |v: &[f64]| c.eval(v) + a * norm_sq(v);
            let b = c.convexified_gradient(&y).unwrap();
            for j in 0..3 {
                let h = 1e-6;
                let mut yp = y.to_vec();
                let mut ym = y.to_vec();
                yp[j] += h;
                ym[j] -= h;
                let fd = (ft(&yp) - ft(&ym)) / (2.0 * h);
                assert!((fd - b[j]).abs() < 1e-6, "{} coord {j}: {fd} vs {}", c.label(), b[j]);
            }
        }
    }

    #[test]
    fn ring_constraint_curvature() {
        let p = unit_ball_outside();
        assert_eq!(p.constraints[0].curvature(), 1.0);
        assert_eq!(p.constraints[0].convexified_gradient(&[0.3, 0.2]).unwrap(), vec![0.0, 0.0]);
    }
}
