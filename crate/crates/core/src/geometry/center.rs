//! Moving a sphere witness away from the faces of the polyhedron.
//!
//! Any point of `P ∩ {‖u‖² = α}` is a valid witness, but one that sits on a
//! face of `P` yields shallow cuts. The refinement below first finds a
//! strictly interior point `c` of `P ∩ {‖u‖² ≤ α}` with a barrier method,
//! crosses the sphere on the segment from `c` to a far point of `P`, and then
//! maximizes the log-barrier of `P` along the sphere.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{dot, norm_sq};

use super::feasibility::segment_sphere_intersection;
use super::polyhedron::Polyhedron;

const NEWTON_STEPS: usize = 40;

/// Normalized slacks `h_i − g_iᵀu`.
fn slacks(p: &Polyhedron, u: &[f64]) -> Vec<f64> {
    p.rows.iter().map(|r| r.h - dot(&r.g, u)).collect()
}

/// A strictly interior point of `P ∩ {‖u‖² ≤ α}`, starting from `start`
/// (a point of `P` with `‖start‖² < α`). Returns the point and its smallest
/// normalized slack, or `None` when no interior was found.
fn interior_point(p: &Polyhedron, alpha: f64, start: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = p.n;
    let m = p.rows.len();
    let r0 = alpha - norm_sq(start);
    if m == 0 || r0 <= 0.0 {
        return None;
    }
    let s0 = slacks(p, start).into_iter().fold(f64::INFINITY, f64::min);
    let scale = alpha.sqrt().max(1e-12);
    let mut y: Vec<f64> = start.to_vec();
    y.push(s0.min(0.0) - scale);

    let barrier = |y: &[f64], mu: f64| -> Option<f64> {
        let (u, t) = (&y[..n], y[n]);
        let rb = alpha - norm_sq(u);
        if rb <= 0.0 {
            return None;
        }
        let mut v = mu * t + rb.ln();
        for r in &p.rows {
            let s = r.h - dot(&r.g, u) - t;
            if s <= 0.0 {
                return None;
            }
            v += s.ln();
        }
        Some(v)
    };

    let mut mu = (m as f64 + 1.0) / scale;
    for _stage in 0..5 {
        for _ in 0..NEWTON_STEPS {
            let (u, t) = (&y[..n], y[n]);
            let rb = alpha - norm_sq(u);
            let mut grad = DVector::zeros(n + 1);
            let mut hess = DMatrix::zeros(n + 1, n + 1);
            grad[n] = mu;
            for r in &p.rows {
                let s = r.h - dot(&r.g, u) - t;
                let w = 1.0 / s;
                for i in 0..n {
                    grad[i] -= r.g[i] * w;
                }
                grad[n] -= w;
                let w2 = w * w;
                for i in 0..=n {
                    let ai = if i < n { r.g[i] } else { 1.0 };
                    for j in 0..=i {
                        let aj = if j < n { r.g[j] } else { 1.0 };
                        hess[(i, j)] += ai * aj * w2;
                    }
                }
            }
            for i in 0..n {
                grad[i] -= 2.0 * u[i] / rb;
                hess[(i, i)] += 2.0 / rb;
                for j in 0..=i {
                    hess[(i, j)] += 4.0 * u[i] * u[j] / (rb * rb);
                }
            }
            for i in 0..=n {
                for j in 0..i {
                    hess[(j, i)] = hess[(i, j)];
                }
            }
            let Some(ch) = hess.cholesky() else { break };
            let d = ch.solve(&grad);
            let decrement = grad.dot(&d);
            if !decrement.is_finite() || decrement < 1e-10 {
                break;
            }
            let f0 = barrier(&y, mu)?;
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-12 {
                let cand: Vec<f64> = y.iter().zip(d.iter()).map(|(a, b)| a + step * b).collect();
                if let Some(f1) = barrier(&cand, mu) {
                    if f1 >= f0 + 0.25 * step * decrement {
                        y = cand;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // `t` is within `(m + 1)/μ` of its supremum; stop once it is positive
        // and at least half of that bound.
        let t = y[n];
        if t > 0.0 && t >= (m as f64 + 1.0) / mu {
            break;
        }
        mu *= 10.0;
    }
    let u = y[..n].to_vec();
    let s = slacks(p, &u).into_iter().fold(f64::INFINITY, f64::min);
    (s > 0.0 && norm_sq(&u) < alpha).then_some((u, s))
}

/// Maximizes `Σ log(h_i − g_iᵀu)` over the sphere, starting from the strictly
/// interior point `u`.
fn ascend_on_sphere(p: &Polyhedron, alpha: f64, mut u: Vec<f64>) -> Vec<f64> {
    let n = p.n;
    let value = |u: &[f64]| -> Option<f64> {
        let mut v = 0.0;
        for r in &p.rows {
            let s = r.h - dot(&r.g, u);
            if s <= 0.0 {
                return None;
            }
            v += s.ln();
        }
        Some(v)
    };
    let retract = |v: Vec<f64>| -> Vec<f64> {
        let s = (alpha / norm_sq(&v)).sqrt();
        v.into_iter().map(|x| x * s).collect()
    };
    let Some(mut f0) = value(&u) else { return u };
    for _ in 0..NEWTON_STEPS {
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for r in &p.rows {
            let w = 1.0 / (r.h - dot(&r.g, &u));
            for i in 0..n {
                g[i] -= r.g[i] * w;
                for j in 0..=i {
                    h[(i, j)] += r.g[i] * r.g[j] * w * w;
                }
            }
        }
        let lambda = u.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() / (2.0 * alpha);
        let shift = (2.0 * lambda).max(0.0) + 1e-12;
        // Bordered system keeps the step tangent to the sphere.
        let mut kkt = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..=i {
                kkt[(i, j)] = h[(i, j)];
                kkt[(j, i)] = h[(i, j)];
            }
            kkt[(i, i)] += shift;
            kkt[(i, n)] = u[i];
            kkt[(n, i)] = u[i];
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&g);
        let Some(sol) = kkt.lu().solve(&rhs) else { break };
        let d: Vec<f64> = sol.iter().take(n).copied().collect();
        let decrement: f64 = d.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        if !decrement.is_finite() || decrement < 1e-10 {
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-12 {
            let cand = retract(u.iter().zip(&d).map(|(a, b)| a + step * b).collect());
            if let Some(f1) = value(&cand) {
                if f1 >= f0 + 0.25 * step * decrement {
                    u = cand;
                    f0 = f1;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    u
}

/// A point of `P ∩ {‖u‖² = α}` away from the faces of `P`, given a near point
/// `inner ∈ P` with `‖inner‖² ≤ α` and a far point `outer ∈ P` with
/// `‖outer‖² ≥ α`. Returns `None` if no strictly interior witness was found;
/// callers then keep their own witness.
pub(crate) fn centered_witness(p: &Polyhedron, alpha: f64, inner: &[f64], outer: &[f64]) -> Option<Vec<f64>> {
    let q = p.normalized(0.0).ok()?;
    if q.rows.is_empty() || !(alpha > 0.0) || norm_sq(outer) <= alpha {
        return None;
    }
    let (c, _) = interior_point(&q, alpha, inner)?;
    let s = segment_sphere_intersection(&c, outer, alpha).ok()?;
    if slacks(&q, &s).iter().any(|v| *v <= 0.0) {
        return None;
    }
    let u = ascend_on_sphere(&q, alpha, s);
    let ok = slacks(&q, &u).iter().all(|v| *v > 0.0) && (norm_sq(&u) - alpha).abs() <= 1e-12 * alpha.max(1.0);
    ok.then_some(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_witness_is_centered_on_its_arc() {
        // The arc of the circle of radius 2 inside x ≥ 1 is centered at (2, 0).
        let p = Polyhedron::from_rows(&[(vec![-1.0, 0.0], -1.0)]).unwrap();
        let u = centered_witness(&p, 4.0, &[1.0, 0.0], &[1.0, 5.0]).unwrap();
        assert!((u[0] - 2.0).abs() < 1e-6 && u[1].abs() < 1e-3, "{u:?}");
    }

    #[test]
    fn tangent_polyhedron_gives_up() {
        let p = Polyhedron::from_rows(&[(vec![-1.0, 0.0], -2.0)]).unwrap();
        assert!(centered_witness(&p, 4.0, &[2.0, 0.0], &[2.0, 3.0]).is_none());
    }
}
