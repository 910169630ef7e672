use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cuts::{linearize_at_level, restart_set, OuterApproximation, RestartKind};
use crate::error::Result;
use crate::geometry::{sphere_polyhedron_feasibility, FeasibilityOutcome};
use crate::linalg::{norm, norm_sq};
use crate::model::Problem;

use super::{Run, SolveResult, SolveStatus, SolverConfig, TraceSink};

/// Inexact cutting spheres.
///
/// Every subproblem is replaced by the question whether the sphere
/// `‖u‖² = α_k` meets the cuts linearized at `α_k`. A witness becomes the next
/// iterate on the same level; emptiness moves the run to a random point on
/// level `α_k + ε` and discards all cuts.
///
/// The caller is responsible for choosing `ε` so that every level in
/// `(J*, J* + ε)` still meets the feasible set; otherwise the run may end with
/// [`SolveStatus::LowerBoundOnly`].
pub fn solve_inexact(p: &Problem, cfg: &SolverConfig, sink: &mut dyn TraceSink) -> Result<SolveResult> {
    let mut run = Run::new(p, cfg, sink)?;
    let n = p.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut u, mut level, mut oa) = match cfg.start_level {
        Some(a) => (
            random_on_level(n, a, &mut rng),
            a,
            restart_set(&[], a, RestartKind::Inexact, 0),
        ),
        None => (vec![0.0; n], 0.0, OuterApproximation::empty()),
    };
    let mut from_restart = false;

    for k in 0..=cfg.max_iter {
        let visit = run.visit(&u)?;
        if visit.feasible {
            run.record(k, &u, level, &visit, oa.len(), from_restart, "feasible", Vec::new());
            return Ok(run.finish(SolveStatus::FeasibleEpsOptimal, &u, &visit));
        }
        if k == cfg.max_iter {
            run.record(k, &u, level, &visit, oa.len(), from_restart, "max_iter", Vec::new());
            return Ok(run.finish(SolveStatus::LowerBoundOnly, &u, &visit));
        }
        let (cuts, logged) = run.cuts_at(&u, &visit.report, k)?;
        if oa.len() + cuts.len() > cfg.m_bar {
            run.record(k, &u, level, &visit, oa.len(), from_restart, "cap", Vec::new());
            return Ok(run.finish(SolveStatus::LowerBoundOnly, &u, &visit));
        }
        oa = oa.with_cuts(cuts);
        let lp = linearize_at_level(&oa, n, level);
        let mut gcfg = cfg.geometry.clone();
        gcfg.seed = cfg.geometry.seed ^ cfg.seed.rotate_left(17) ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let outcome = sphere_polyhedron_feasibility(&lp.poly, level, &gcfg)?;
        let branch = outcome.branch();
        let cut_count = oa.len();
        log::debug!("k = {k}, level = {level}, cuts = {cut_count}, rows = {}, {branch}", lp.poly.rows.len());

        let (next, restart) = match outcome {
            FeasibilityOutcome::Point { x } => (x, false),
            FeasibilityOutcome::Uncertified { .. } if !cfg.allow_uncertified => {
                run.record(k, &u, level, &visit, cut_count, from_restart, branch, logged);
                return Ok(run.finish(SolveStatus::Uncertified, &u, &visit));
            }
            FeasibilityOutcome::Empty { .. } | FeasibilityOutcome::Uncertified { .. } => {
                let next_level = level + cfg.epsilon;
                oa = restart_set(&[], next_level, RestartKind::Inexact, k + 1);
                run.restarts += 1;
                (random_on_level(n, next_level, &mut rng), true)
            }
        };
        run.record(k, &u, level, &visit, cut_count, from_restart, branch, logged);
        if restart {
            level += cfg.epsilon;
        }
        u = next;
        from_restart = restart;
    }
    unreachable!("loop returns at k == max_iter")
}

/// A point with `‖u‖² = α` in a direction drawn uniformly from the sphere.
pub(crate) fn random_on_level(n: usize, alpha: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let gn = norm(&g);
        if gn > 1e-12 {
            let s = alpha.max(0.0).sqrt() / gn;
            let mut u: Vec<f64> = g.iter().map(|v| v * s).collect();
            // Remove the rounding drift of the scaling.
            let r = norm_sq(&u);
            if r > 0.0 {
                let fix = (alpha / r).sqrt();
                u.iter_mut().for_each(|v| *v *= fix);
            }
            return u;
        }
    }
}
