//! Slow reference solvers for small instances.
//!
//! Nothing here calls into `geometry` or the solver subproblems: the point of
//! an oracle is to reach the same answer by a different road. Projection and
//! vertex enumeration walk every candidate active set; the S-QCQP oracle is a
//! grid search with a local polish, and reports its result as sampled.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cuts::{OuterApproximation, QuadraticCut};
use crate::error::{Error, Result};
use crate::geometry::Polyhedron;
use crate::linalg::{dist_sq, dot, norm, norm_sq};
use crate::solver::OuterSubsolver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleBudget {
    /// Grid points per axis of the sampling box.
    pub grid_per_axis: usize,
    /// Best grid points handed to the local polish.
    pub multistart: usize,
    /// Half-width of the sampling box around `z`; derived from the cuts when
    /// absent (required if any cut is a halfspace).
    pub box_radius: Option<f64>,
    /// Dimension cap of the S-QCQP oracle.
    pub max_n: usize,
    /// Caps of the projection oracle.
    pub projection_max_n: usize,
    pub projection_max_rows: usize,
    /// Caps of vertex enumeration.
    pub vertex_max_n: usize,
    pub vertex_max_rows: usize,
    /// Ceiling on cut evaluations of the grid stage.
    pub max_evaluations: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            grid_per_axis: 201,
            multistart: 8,
            box_radius: None,
            max_n: 4,
            projection_max_n: 6,
            projection_max_rows: 12,
            vertex_max_n: 10,
            vertex_max_rows: 25,
            max_evaluations: 200_000_000,
        }
    }
}

/// Result of [`brute_force_sqcqp`]. Optimality is sampled, not proven.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledOptimum {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Bound on how much `J` varies across one grid cell.
    pub gap_estimate: f64,
    pub certificate: &'static str,
}

fn feasible(cuts: &[QuadraticCut], x: &[f64]) -> bool {
    cuts.iter().all(|q| q.eval(x) <= 0.0)
}

/// `min ‖x − z‖²` subject to `q_i(x) ≤ 0` for every cut, by grid sampling.
pub fn brute_force_sqcqp(cuts: &[QuadraticCut], z: &[f64], budget: &OracleBudget) -> Result<SampledOptimum> {
    let n = z.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty z".into()));
    }
    if n > budget.max_n {
        return Err(Error::BudgetExceeded(format!("oracle dimension cap is {}, got n = {n}", budget.max_n)));
    }
    if cuts.iter().any(|q| q.b.len() != n) {
        return Err(Error::InvalidParameter("cut dimension differs from z".into()));
    }
    if feasible(cuts, z) {
        return Ok(SampledOptimum {
            x: z.to_vec(),
            objective: 0.0,
            gap_estimate: 0.0,
            certificate: "sampled",
        });
    }
    // Outside every excluded ball is feasible, so a point at distance
    // max(‖center − z‖ + r) from z exists in the feasible set.
    let radius = match budget.box_radius {
        Some(r) => r,
        None => {
            if cuts.iter().any(|q| q.a <= 0.0) {
                return Err(Error::PreconditionViolated(
                    "halfspace cuts need an explicit box radius".into(),
                ));
            }
            let mut r: f64 = 0.0;
            for q in cuts {
                if let Some((c, r2)) = q.excluded_ball() {
                    r = r.max(dist_sq(&c, z).sqrt() + r2.sqrt());
                }
            }
            1.05 * r + 1e-9
        }
    };
    let g = budget.grid_per_axis.max(2);
    let points = (g as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    let evals = points.saturating_mul(cuts.len().max(1) as u64);
    if evals > budget.max_evaluations {
        return Err(Error::BudgetExceeded(format!(
            "grid needs {evals} cut evaluations, ceiling is {}",
            budget.max_evaluations
        )));
    }
    let h = 2.0 * radius / (g - 1) as f64;
    let keep = budget.multistart.max(1);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(keep + 1);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    for _ in 0..points {
        for i in 0..n {
            x[i] = z[i] - radius + h * idx[i] as f64;
        }
        if feasible(cuts, &x) {
            let j = dist_sq(&x, z);
            if best.len() < keep || j < best[best.len() - 1].0 {
                let pos = best.partition_point(|(v, _)| *v <= j);
                best.insert(pos, (j, x.clone()));
                best.truncate(keep);
            }
        }
        for i in 0..n {
            idx[i] += 1;
            if idx[i] < g {
                break;
            }
            idx[i] = 0;
        }
    }
    // Nearest boundary point of each ball to z: the usual optimum with a
    // single active cut.
    for q in cuts {
        if let Some((c, r2)) = q.excluded_ball() {
            let d = norm(&crate::linalg::sub(z, &c));
            let dir: Vec<f64> = if d > 1e-15 {
                z.iter().zip(&c).map(|(a, b)| (a - b) / d).collect()
            } else {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                e
            };
            let cand = push_outside(q, &c, r2, &dir);
            if feasible(cuts, &cand) {
                best.push((dist_sq(&cand, z), cand));
            }
        }
    }
    if best.is_empty() {
        return Err(Error::BudgetExceeded("no feasible grid point; refine the grid".into()));
    }
    let mut winner = (f64::INFINITY, Vec::new());
    for (j, start) in best {
        // The polish only accepts improvements, so `j` bounds the result.
        let polished = polish(cuts, z, start, h);
        let pj = dist_sq(&polished, z);
        debug_assert!(pj <= j);
        if pj < winner.0 {
            winner = (pj, polished);
        }
    }
    let diam = h * (n as f64).sqrt();
    Ok(SampledOptimum {
        gap_estimate: 2.0 * winner.0.sqrt() * diam + diam * diam,
        objective: winner.0,
        x: winner.1,
        certificate: "sampled",
    })
}

/// The point `c + r·dir` nudged outward until `q` no longer excludes it.
fn push_outside(q: &QuadraticCut, c: &[f64], r2: f64, dir: &[f64]) -> Vec<f64> {
    let r0 = r2.sqrt();
    let mut extra = f64::EPSILON * (r0 + norm(c));
    loop {
        let p: Vec<f64> = c.iter().zip(dir).map(|(a, b)| a + (r0 + extra) * b).collect();
        if q.eval(&p) <= 0.0 || !extra.is_finite() {
            return p;
        }
        extra *= 2.0;
    }
}

/// Pattern search toward `z`; trial points that land in a ball are pushed
/// radially onto its boundary.
fn polish(cuts: &[QuadraticCut], z: &[f64], mut x: Vec<f64>, h0: f64) -> Vec<f64> {
    let n = z.len();
    let mut fx = dist_sq(&x, z);
    let mut h = h0;
    while h > 1e-13 * (1.0 + fx.sqrt()) {
        let mut improved = false;
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * n + 1);
        let to_z = crate::linalg::sub(z, &x);
        let nz = norm(&to_z);
        if nz > 0.0 {
            dirs.push(to_z.iter().map(|v| v / nz).collect());
        }
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                dirs.push(e);
            }
        }
        for d in dirs {
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            for _ in 0..4 {
                let Some(q) = cuts.iter().find(|q| q.eval(&y) > 0.0) else { break };
                let Some((c, r2)) = q.excluded_ball() else { break };
                let v = crate::linalg::sub(&y, &c);
                let nv = norm(&v);
                if nv == 0.0 {
                    break;
                }
                let dir: Vec<f64> = v.iter().map(|a| a / nv).collect();
                y = push_outside(q, &c, r2, &dir);
            }
            if feasible(cuts, &y) {
                let fy = dist_sq(&y, z);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    x
}

/// Calls `f` on every subset of `0..m` with at most `k` elements, in
/// lexicographic order of sizes then indices.
fn for_subsets(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, size, cur, f);
            cur.pop();
        }
    }
    for size in 0..=k.min(m) {
        rec(0, m, size, &mut Vec::with_capacity(size), &mut f);
    }
}

fn row_tol(p: &Polyhedron, i: usize, x: &[f64]) -> f64 {
    1e-9 * (1.0 + p.rows[i].h.abs().max(norm(&p.rows[i].g) * norm(x)))
}

fn in_polyhedron(p: &Polyhedron, x: &[f64]) -> bool {
    (0..p.rows.len()).all(|i| dot(&p.rows[i].g, x) - p.rows[i].h <= row_tol(p, i, x))
}

/// KKT point of `min ‖x − z‖²` with the rows of `s` held as equalities.
fn equality_projection(p: &Polyhedron, z: &[f64], s: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = p.n;
    let k = s.len();
    if k == 0 {
        return Some((z.to_vec(), Vec::new()));
    }
    let g = DMatrix::from_fn(k, n, |r, c| p.rows[s[r]].g[c]);
    let gram = &g * g.transpose();
    let rhs = DVector::from_fn(k, |r, _| dot(&p.rows[s[r]].g, z) - p.rows[s[r]].h);
    let det = gram.determinant();
    let scale: f64 = (0..k).map(|i| gram[(i, i)]).product();
    if !(det.abs() > 1e-12 * scale.max(1e-300)) {
        return None;
    }
    let lam = gram.lu().solve(&rhs)?;
    let x: Vec<f64> = (0..n)
        .map(|c| z[c] - (0..k).map(|r| g[(r, c)] * lam[r]).sum::<f64>())
        .collect();
    Some((x, lam.iter().copied().collect()))
}

fn projection_unchecked(p: &Polyhedron, z: &[f64]) -> Result<Vec<f64>> {
    let mut found: Option<Vec<f64>> = None;
    for_subsets(p.rows.len(), p.n, |s| {
        if found.is_some() {
            return;
        }
        if let Some((x, lam)) = equality_projection(p, z, s) {
            let dual_ok = lam.iter().all(|l| *l >= -1e-10 * (1.0 + norm(z)));
            if dual_ok && in_polyhedron(p, &x) {
                found = Some(x);
            }
        }
    });
    // Every nonempty polyhedron has a projection whose active rows can be
    // reduced to a linearly independent set of at most n rows, so missing it
    // on every subset certifies emptiness.
    found.ok_or(Error::InfeasiblePolyhedron)
}

/// Projection of `z` onto `p` by enumerating candidate active sets.
pub fn exact_projection_qp(p: &Polyhedron, z: &[f64]) -> Result<Vec<f64>> {
    exact_projection_qp_with(p, z, &OracleBudget::default())
}

pub fn exact_projection_qp_with(p: &Polyhedron, z: &[f64], budget: &OracleBudget) -> Result<Vec<f64>> {
    p.validate()?;
    if z.len() != p.n {
        return Err(Error::InvalidParameter("z has the wrong dimension".into()));
    }
    if p.n > budget.projection_max_n || p.rows.len() > budget.projection_max_rows {
        return Err(Error::PreconditionViolated(format!(
            "projection oracle caps are n ≤ {}, rows ≤ {}",
            budget.projection_max_n, budget.projection_max_rows
        )));
    }
    projection_unchecked(p, z)
}

/// One-dimensional null space of the rows `s` (`|s| = n − 1`), if it is one.
fn null_direction(p: &Polyhedron, s: &[usize]) -> Option<Vec<f64>> {
    let n = p.n;
    let mut m = DMatrix::zeros(n, n);
    for (r, &i) in s.iter().enumerate() {
        for c in 0..n {
            m[(r, c)] = p.rows[i].g[c];
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t?;
    let sv = &svd.singular_values;
    let top = sv.max();
    let imin = sv.imin();
    let second = sv
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != imin)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    if n > 1 && !(second > 1e-9 * top.max(1e-300)) {
        return None;
    }
    Some((0..n).map(|c| vt[(imin, c)]).collect())
}

/// All vertices of a bounded polyhedron, by solving every `n × n` subsystem.
pub fn enumerate_vertices(p: &Polyhedron) -> Result<Vec<Vec<f64>>> {
    enumerate_vertices_with(p, &OracleBudget::default())
}

pub fn enumerate_vertices_with(p: &Polyhedron, budget: &OracleBudget) -> Result<Vec<Vec<f64>>> {
    p.validate()?;
    let n = p.n;
    let m = p.rows.len();
    if n == 0 || n > budget.vertex_max_n || m > budget.vertex_max_rows {
        return Err(Error::PreconditionViolated(format!(
            "vertex enumeration caps are 1 ≤ n ≤ {}, rows ≤ {}",
            budget.vertex_max_n, budget.vertex_max_rows
        )));
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut subset = Vec::with_capacity(n);
    let mut visit = |s: &[usize]| {
        let a = DMatrix::from_fn(n, n, |r, c| p.rows[s[r]].g[c]);
        let scale: f64 = s.iter().map(|&i| norm(&p.rows[i].g)).product();
        if !(a.determinant().abs() > 1e-12 * scale.max(1e-300)) {
            return;
        }
        let rhs = DVector::from_fn(n, |r, _| p.rows[s[r]].h);
        let Some(x) = a.lu().solve(&rhs) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        if in_polyhedron(p, &x) && !vertices.iter().any(|v| dist_sq(v, &x).sqrt() <= 1e-9 * (1.0 + norm(&x))) {
            vertices.push(x);
        }
    };
    for_each_combination(m, n, &mut subset, &mut visit);

    // Rays of the recession cone {d : Gd ≤ 0}.
    let mut ray: Option<Vec<f64>> = None;
    let mut check = |s: &[usize]| {
        if ray.is_some() {
            return;
        }
        let Some(d) = null_direction(p, s) else { return };
        for sign in [1.0, -1.0] {
            let d: Vec<f64> = d.iter().map(|v| sign * v).collect();
            if p.rows.iter().all(|r| dot(&r.g, &d) <= 1e-10 * norm(&r.g)) {
                ray = Some(d);
                return;
            }
        }
    };
    if n == 1 {
        check(&[]);
    } else if m >= n - 1 {
        for_each_combination(m, n - 1, &mut Vec::new(), &mut check);
    }
    // Fewer rows than n − 1 leave a null space of dimension ≥ 2 that the
    // subsets above cannot isolate; any of its directions is a lineality ray.
    if ray.is_none() && m < n.saturating_sub(1) {
        let g = DMatrix::from_fn(n, n, |r, c| if r < m { p.rows[r].g[c] } else { 0.0 });
        let svd = g.svd(false, true);
        if let Some(vt) = svd.v_t {
            let i = svd.singular_values.imin();
            ray = Some((0..n).map(|c| vt[(i, c)]).collect());
        }
    }
    match ray {
        Some(direction) => {
            let point = match vertices.first() {
                Some(v) => v.clone(),
                None => projection_unchecked(p, &vec![0.0; n])?,
            };
            Err(Error::UnboundedPolyhedron { point, direction })
        }
        None if vertices.is_empty() => Err(Error::InfeasiblePolyhedron),
        None => Ok(vertices),
    }
}

fn for_each_combination(m: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    cur.clear();
    rec(0, m, k, cur, f);
}

/// Largest `‖x‖²` over the vertices of a bounded polyhedron.
pub fn max_norm_by_enumeration(p: &Polyhedron) -> Result<(f64, Vec<f64>)> {
    let vs = enumerate_vertices(p)?;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for v in vs {
        let r = norm_sq(&v);
        if r > best.0 {
            best = (r, v);
        }
    }
    Ok(best)
}

/// Outer-approximation subsolver backed by [`brute_force_sqcqp`].
#[derive(Debug, Clone, Default)]
pub struct OracleSubsolver {
    pub budget: OracleBudget,
}

impl OuterSubsolver for OracleSubsolver {
    fn minimize(&self, oa: &OuterApproximation, n: usize) -> Result<Vec<f64>> {
        Ok(brute_force_sqcqp(&oa.all_cuts(n), &vec![0.0; n], &self.budget)?.x)
    }
}
