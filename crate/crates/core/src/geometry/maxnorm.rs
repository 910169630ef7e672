//! Maximizing `‖x‖²` over a polyhedron, stopping as soon as a target is met.
//!
//! A feasible point is pushed to a vertex by moving along directions that do
//! not decrease the norm. From there a best-first search walks the graph of
//! feasible bases: every pivot that keeps the basis feasible is followed, ties
//! in the ratio test included, so a completed search has seen every vertex and
//! every extreme ray. Since `‖·‖²` is convex, its maximum over a pointed
//! polyhedron is attained at a vertex or is infinite along a ray.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{axpy, dot, norm, norm_sq, null_space, rows_to_matrix};

use super::polyhedron::Polyhedron;
use super::projection::project_onto_polyhedron;
use super::GeometryConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaxNormOutcome {
    /// A point of the polyhedron with `‖x‖² ≥ target`.
    Reached { point: Vec<f64> },
    /// The polyhedron is unbounded; `point` lies on a ray past the target.
    Unbounded { point: Vec<f64>, direction: Vec<f64> },
    /// Every vertex was visited and the largest `‖x‖²` is below the target.
    Bounded { value: f64, argmax: Vec<f64>, vertices: usize },
    /// The vertex budget ran out before a decision.
    Uncertified { best_value: f64, best_point: Vec<f64>, vertices: usize },
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    key: f64,
    basis: Vec<usize>,
    vertex: Vec<f64>,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.basis.cmp(&self.basis))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fails with [`crate::Error::InfeasiblePolyhedron`] when `p` is empty.
pub fn max_norm_over_polyhedron(p: &Polyhedron, target: f64, cfg: &GeometryConfig) -> Result<MaxNormOutcome> {
    let q = p.normalized(cfg.row_tol_abs)?;
    let n = q.n;
    let x0 = project_onto_polyhedron(&q, &vec![0.0; n], cfg.projection_tol, cfg.projection_sweeps)?.point;
    if norm_sq(&x0) >= target {
        return Ok(MaxNormOutcome::Reached { point: x0 });
    }

    let g = rows_to_matrix(&q.rows.iter().map(|r| r.g.as_slice()).collect::<Vec<_>>(), n);
    let (lineality, rank) = null_space(&g, n, 1e-10);
    if rank < n {
        let d: Vec<f64> = lineality.column(0).iter().cloned().collect();
        return Ok(walk_ray(&x0, &d, target));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (basis, vertex) = match crash(&q, x0, target, &mut rng) {
        Crash::Vertex(b, v) => (b, v),
        Crash::Done(outcome) => return Ok(outcome),
    };

    let budget = if n <= cfg.cap_n && q.rows.len() <= cfg.cap_m {
        usize::MAX
    } else {
        cfg.vertex_budget
    };
    Ok(search(&q, basis, vertex, target, budget))
}

enum Crash {
    Vertex(Vec<usize>, Vec<f64>),
    Done(MaxNormOutcome),
}

/// Moves from a feasible point to a vertex without decreasing the norm.
fn crash(q: &Polyhedron, mut x: Vec<f64>, target: f64, rng: &mut ChaCha8Rng) -> Crash {
    let n = q.n;
    let tight_tol = 1e-9 * (1.0 + norm(&x));
    let mut active: Vec<usize> = Vec::new();
    for (i, row) in q.rows.iter().enumerate() {
        if active.len() < n && row.residual(&x).abs() <= tight_tol && independent(q, &active, i) {
            active.push(i);
        }
    }

    while active.len() < n {
        let basis_rows: Vec<&[f64]> = active.iter().map(|&i| q.rows[i].g.as_slice()).collect();
        let a = rows_to_matrix(&basis_rows, n);
        let (ns, _) = null_space(&a, n, 1e-12);
        let project = |v: &[f64]| -> Vec<f64> {
            let c = ns.transpose() * DVector::from_column_slice(v);
            (&ns * c).as_slice().to_vec()
        };
        let mut d = project(&x);
        if norm(&d) <= 1e-9 * (1.0 + norm(&x)) {
            let r: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            d = project(&r);
        }
        if dot(&x, &d) < 0.0 {
            d.iter_mut().for_each(|v| *v = -*v);
        }
        let dn = norm(&d);
        d.iter_mut().for_each(|v| *v /= dn);

        let mut t_best = f64::INFINITY;
        let mut block = None;
        for (i, row) in q.rows.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let rate = dot(&row.g, &d);
            if rate > 1e-12 {
                let t = (-row.residual(&x)).max(0.0) / rate;
                if t < t_best {
                    t_best = t;
                    block = Some(i);
                }
            }
        }
        let Some(i) = block else {
            return Crash::Done(walk_ray(&x, &d, target));
        };
        x = axpy(&x, t_best, &d);
        if norm_sq(&x) >= target {
            return Crash::Done(MaxNormOutcome::Reached { point: x });
        }
        active.push(i);
    }
    active.sort_unstable();
    match vertex_of(q, &active) {
        Some((v, _)) => Crash::Vertex(active, v),
        None => Crash::Vertex(active, x),
    }
}

fn independent(q: &Polyhedron, active: &[usize], i: usize) -> bool {
    let mut rows: Vec<&[f64]> = active.iter().map(|&j| q.rows[j].g.as_slice()).collect();
    rows.push(&q.rows[i].g);
    crate::linalg::rank(&rows_to_matrix(&rows, q.n), 1e-10) == rows.len()
}

/// The vertex `G_B v = h_B` and `G_B⁻¹`.
fn vertex_of(q: &Polyhedron, basis: &[usize]) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = q.n;
    let gb = DMatrix::from_fn(n, n, |i, j| q.rows[basis[i]].g[j]);
    let inv = gb.try_inverse()?;
    let hb = DVector::from_iterator(n, basis.iter().map(|&i| q.rows[i].h));
    let v = &inv * hb;
    v.iter().all(|x| x.is_finite()).then(|| (v.as_slice().to_vec(), inv))
}

fn search(q: &Polyhedron, basis: Vec<usize>, vertex: Vec<f64>, target: f64, budget: usize) -> MaxNormOutcome {
    let n = q.n;
    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(basis.clone());
    heap.push(Node {
        key: norm_sq(&vertex),
        basis,
        vertex,
    });
    let mut best_value = f64::NEG_INFINITY;
    let mut best_point = Vec::new();
    let mut visited = 0usize;

    while let Some(node) = heap.pop() {
        if visited >= budget {
            return MaxNormOutcome::Uncertified {
                best_value,
                best_point,
                vertices: visited,
            };
        }
        visited += 1;
        let Some((v, inv)) = vertex_of(q, &node.basis) else {
            continue;
        };
        let value = norm_sq(&v);
        if value >= target {
            return MaxNormOutcome::Reached { point: v };
        }
        if value > best_value {
            best_value = value;
            best_point = v.clone();
        }

        let slack: Vec<f64> = q.rows.iter().map(|r| (-r.residual(&v)).max(0.0)).collect();
        for j in 0..n {
            // Leaving row basis[j]: it becomes slack while the rest stay tight.
            let d: Vec<f64> = (0..n).map(|i| -inv[(i, j)]).collect();
            let dn = norm(&d);
            let mut t_star = f64::INFINITY;
            let mut rates = Vec::new();
            for (i, row) in q.rows.iter().enumerate() {
                if node.basis.binary_search(&i).is_ok() {
                    continue;
                }
                let rate = dot(&row.g, &d);
                if rate > 1e-11 * dn {
                    let t = slack[i] / rate;
                    rates.push((i, t));
                    t_star = t_star.min(t);
                }
            }
            if t_star.is_infinite() {
                return walk_ray(&v, &d, target);
            }
            let tie = 1e-10 * (1.0 + t_star);
            let next = axpy(&v, t_star, &d);
            let key = norm_sq(&next);
            for (i, t) in rates {
                if t > t_star + tie {
                    continue;
                }
                let mut nb = node.basis.clone();
                nb[j] = i;
                nb.sort_unstable();
                if seen.insert(nb.clone()) {
                    heap.push(Node {
                        key,
                        basis: nb,
                        vertex: next.clone(),
                    });
                }
            }
        }
    }
    MaxNormOutcome::Bounded {
        value: best_value,
        argmax: best_point,
        vertices: visited,
    }
}

/// Walks from `x` along the recession direction `d` (either sign if `d` is a
/// lineality direction) until `‖x + t d‖² ≥ target`.
fn walk_ray(x: &[f64], d: &[f64], target: f64) -> MaxNormOutcome {
    let dn2 = norm_sq(d);
    let xd = dot(x, d);
    let x2 = norm_sq(x);
    let goal = target.max(0.0) * (1.0 + 1e-9) + 1e-12;
    let mut t = if x2 >= goal {
        0.0
    } else {
        (-xd + (xd * xd + dn2 * (goal - x2)).sqrt()) / dn2
    };
    let mut point = axpy(x, t, d);
    while norm_sq(&point) < target {
        t = 2.0 * t + 1.0;
        point = axpy(x, t, d);
    }
    MaxNormOutcome::Unbounded {
        point,
        direction: d.to_vec(),
    }
}
