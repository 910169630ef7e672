//! Global minimization of `‖u‖²` over an outer approximation.
//!
//! A minimizer `u*` with active set `S` is a local minimizer of `‖u‖²` on
//! `M_S`, the intersection of the active spheres and hyperplanes, which is
//! itself a sphere inside an affine subspace (or the subspace alone). On such
//! a sphere the only local minimizer of the distance to the origin is the
//! point closest to the origin's projection, unless that projection is the
//! sphere's center; then every point ties, and either a probe point along a
//! basis direction is feasible or the feasible arc has a boundary point with
//! a larger active set and the same value. Enumerating active sets of size at
//! most `n + 1` and keeping the best feasible candidate is therefore exact.

use nalgebra::{DMatrix, DVector};

use crate::cuts::{OuterApproximation, QuadraticCut};
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm, norm_sq, null_space, sub};

pub trait OuterSubsolver {
    /// A global minimizer of `‖u‖²` over `oa` in `ℝⁿ`.
    fn minimize(&self, oa: &OuterApproximation, n: usize) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone)]
pub struct CriticalPointSubsolver {
    /// Relative feasibility slack for candidates.
    pub tol: f64,
    /// Maximum number of active sets examined.
    pub max_subsets: usize,
}

impl Default for CriticalPointSubsolver {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_subsets: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
enum Piece {
    Sphere { center: Vec<f64>, r2: f64 },
    Plane { b: Vec<f64>, c: f64 },
}

struct Search<'a> {
    pieces: Vec<Piece>,
    cuts: &'a [QuadraticCut],
    n: usize,
    tol: f64,
    budget: usize,
    examined: usize,
    best: Option<(f64, Vec<f64>)>,
}

impl OuterSubsolver for CriticalPointSubsolver {
    fn minimize(&self, oa: &OuterApproximation, n: usize) -> Result<Vec<f64>> {
        let cuts = oa.all_cuts(n);
        let mut pieces = Vec::new();
        for q in &cuts {
            if q.a > 0.0 {
                if let Some((center, r2)) = q.excluded_ball() {
                    pieces.push(Piece::Sphere { center, r2 });
                }
            } else if norm(&q.b) > 1e-14 {
                pieces.push(Piece::Plane { b: q.b.clone(), c: q.c });
            } else if q.c > 0.0 {
                return Err(Error::SubsolverFailure("a cut excludes every point".into()));
            }
        }
        let mut s = Search {
            pieces,
            cuts: &cuts,
            n,
            tol: self.tol,
            budget: self.max_subsets,
            examined: 0,
            best: None,
        };
        let mut chosen = Vec::new();
        s.extend(0, &mut chosen)?;
        s.best
            .map(|(_, u)| u)
            .ok_or_else(|| Error::SubsolverFailure("no feasible critical point".into()))
    }
}

impl Search<'_> {
    fn extend(&mut self, start: usize, chosen: &mut Vec<usize>) -> Result<()> {
        self.examined += 1;
        if self.examined > self.budget {
            return Err(Error::BudgetExceeded(format!(
                "more than {} active sets examined",
                self.budget
            )));
        }
        let Some(cands) = self.candidates(chosen) else {
            // Supersets describe subsets of an empty set.
            return Ok(());
        };
        for u in cands {
            self.offer(u);
        }
        if chosen.len() == self.n + 1 {
            return Ok(());
        }
        for j in start..self.pieces.len() {
            chosen.push(j);
            self.extend(j + 1, chosen)?;
            chosen.pop();
        }
        Ok(())
    }

    fn offer(&mut self, u: Vec<f64>) {
        let val = norm_sq(&u);
        if let Some((b, _)) = &self.best {
            if val >= *b {
                return;
            }
        }
        let slack = self.tol * (1.0 + val);
        if self.cuts.iter().all(|q| q.eval(&u) <= slack) {
            self.best = Some((val, u));
        }
    }

    /// Candidate minimizers on `M_S`, or `None` when `M_S` is empty.
    fn candidates(&self, chosen: &[usize]) -> Option<Vec<Vec<f64>>> {
        let n = self.n;
        let mut sphere: Option<(&Vec<f64>, f64)> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for &j in chosen {
            match &self.pieces[j] {
                Piece::Sphere { center, r2 } => match sphere {
                    None => sphere = Some((center, *r2)),
                    Some((o0, r0)) => {
                        rows.push(o0.iter().zip(center).map(|(a, b)| 2.0 * (a - b)).collect());
                        rhs.push((norm_sq(o0) - r0) - (norm_sq(center) - r2));
                    }
                },
                Piece::Plane { b, c } => {
                    rows.push(b.clone());
                    rhs.push(-c);
                }
            }
        }
        let (up, basis) = if rows.is_empty() {
            (vec![0.0; n], DMatrix::identity(n, n))
        } else {
            let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
            let b = DVector::from_vec(rhs);
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.max().max(1.0);
            let x = svd.solve(&b, 1e-11 * smax).ok()?;
            let resid = (&a * &x - &b).amax();
            if resid > 1e-9 * (1.0 + b.amax()) {
                return None;
            }
            let (ns, _) = null_space(&a, n, 1e-11);
            (x.as_slice().to_vec(), ns)
        };

        let Some((o0, r0)) = sphere else {
            return Some(vec![up]);
        };
        let diff = DVector::from_column_slice(&sub(o0, &up));
        let along = &basis * (basis.transpose() * diff);
        let center = axpy(&up, 1.0, along.as_slice());
        let rho2 = r0 - crate::linalg::dist_sq(o0, &center);
        if rho2 < -self.tol * (1.0 + r0) {
            return None;
        }
        let rho = rho2.max(0.0).sqrt();
        let w = sub(&up, &center);
        let wn = norm(&w);
        let mut out = Vec::new();
        if wn > 1e-12 * (1.0 + rho) {
            out.push(axpy(&center, rho / wn, &w));
            out.push(axpy(&center, -rho / wn, &w));
        } else if basis.ncols() == 0 {
            out.push(center);
        } else {
            for c in 0..basis.ncols() {
                let v: Vec<f64> = basis.column(c).iter().cloned().collect();
                out.push(axpy(&center, rho, &v));
                out.push(axpy(&center, -rho, &v));
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(center: &[f64], r: f64) -> QuadraticCut {
        // −‖u − o‖² + r² ≤ 0
        QuadraticCut {
            a: 1.0,
            b: center.iter().map(|v| 2.0 * v).collect(),
            c: r * r - norm_sq(center),
            constraint: 0,
            iter: 0,
        }
    }

    #[test]
    fn no_cuts_gives_origin() {
        let u = CriticalPointSubsolver::default()
            .minimize(&OuterApproximation::empty(), 2)
            .unwrap();
        assert_eq!(u, vec![0.0, 0.0]);
    }

    #[test]
    fn unit_ring_gives_unit_norm() {
        let oa = OuterApproximation::empty().with_cuts([ball(&[0.0, 0.0], 1.0)]);
        let u = CriticalPointSubsolver::default().minimize(&oa, 2).unwrap();
        assert!((norm_sq(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_rings_second_inactive() {
        let oa = OuterApproximation::empty().with_cuts([ball(&[0.0, 0.0], 1.0), ball(&[3.0, 0.0], 1.0)]);
        let u = CriticalPointSubsolver::default().minimize(&oa, 2).unwrap();
        assert!((norm_sq(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offset_ball_and_plane() {
        // Ball of radius 1 at (0.5, 0) and plane x2 ≥ 0.2 (−x2 + 0.2 ≤ 0).
        let plane = QuadraticCut {
            a: 0.0,
            b: vec![0.0, -1.0],
            c: 0.2,
            constraint: 1,
            iter: 0,
        };
        let oa = OuterApproximation::empty().with_cuts([ball(&[0.5, 0.0], 1.0), plane]);
        let u = CriticalPointSubsolver::default().minimize(&oa, 2).unwrap();
        // Leftmost point of the circle, at height 0.2 or below the plane: the
        // best feasible point is (0.5 − √(1 − 0.04), 0.2).
        let expect = [0.5 - (1.0f64 - 0.04).sqrt(), 0.2];
        assert!(crate::linalg::dist_sq(&u, &expect) < 1e-18, "{u:?}");
    }
}
