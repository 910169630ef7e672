use crate::cuts::OuterApproximation;
use crate::error::Result;
use crate::linalg::norm_sq;
use crate::model::Problem;

use super::{OuterSubsolver, Run, SolveResult, SolveStatus, SolverConfig, TraceSink};

/// Cutting spheres without restarts: cut every violated constraint at `x_k`
/// and move to a global minimizer of `J` over all cuts so far.
///
/// Each subproblem is a nonconvex QCQP, so `subsolver` must be global; this
/// variant is meant for small instances.
pub fn solve_exact(
    p: &Problem,
    cfg: &SolverConfig,
    subsolver: &dyn OuterSubsolver,
    sink: &mut dyn TraceSink,
) -> Result<SolveResult> {
    let mut run = Run::new(p, cfg, sink)?;
    let n = p.n;
    let mut u = vec![0.0; n];
    let mut oa = OuterApproximation::empty();
    for k in 0..=cfg.max_iter {
        let visit = run.visit(&u)?;
        let j = norm_sq(&u);
        if visit.feasible {
            run.record(k, &u, j, &visit, oa.len(), false, "feasible", Vec::new());
            return Ok(run.finish(SolveStatus::FeasibleOptimalFinite, &u, &visit));
        }
        if k == cfg.max_iter {
            run.record(k, &u, j, &visit, oa.len(), false, "max_iter", Vec::new());
            return Ok(run.finish(SolveStatus::LowerBoundOnly, &u, &visit));
        }
        let (cuts, logged) = run.cuts_at(&u, &visit.report, k)?;
        oa = oa.with_cuts(cuts);
        let next = subsolver.minimize(&oa, n)?;
        run.record(k, &u, j, &visit, oa.len(), false, "cumulative", logged);
        u = next;
    }
    unreachable!("loop returns at k == max_iter")
}
