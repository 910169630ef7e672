use crate::cuts::{restart_set, OuterApproximation, RestartKind};
use crate::error::Result;
use crate::linalg::norm_sq;
use crate::model::Problem;

use super::{OuterSubsolver, Run, SolveResult, SolveStatus, SolverConfig, TraceSink};

/// Cutting spheres with warm restarts.
///
/// `m_k = |O_{k−1}| + |I(x_k)|` is the size a cumulative step would produce.
/// Below `m̄` the step is cumulative. At or above it, the run restarts from
/// the cuts at `x_k` plus the floor `J ≥ J(x_k)` if `J(x_k)` exceeds the level
/// of the last restart by more than `δ`, and stops otherwise.
pub fn solve_warm(
    p: &Problem,
    cfg: &SolverConfig,
    subsolver: &dyn OuterSubsolver,
    sink: &mut dyn TraceSink,
) -> Result<SolveResult> {
    let mut run = Run::new(p, cfg, sink)?;
    let n = p.n;
    let mut u = vec![0.0; n];
    let mut oa = OuterApproximation::empty();
    let mut j_restart = 0.0;
    let mut from_restart = false;
    for k in 0..=cfg.max_iter {
        let visit = run.visit(&u)?;
        let j = norm_sq(&u);
        if visit.feasible {
            run.record(k, &u, j, &visit, oa.len(), from_restart, "feasible", Vec::new());
            return Ok(run.finish(SolveStatus::FeasibleOptimalFinite, &u, &visit));
        }
        if k == cfg.max_iter {
            run.record(k, &u, j, &visit, oa.len(), from_restart, "max_iter", Vec::new());
            return Ok(run.finish(SolveStatus::LowerBoundOnly, &u, &visit));
        }
        let (cuts, logged) = run.cuts_at(&u, &visit.report, k)?;
        let m_k = oa.len() + cuts.len();
        let restart = m_k >= cfg.m_bar;
        if restart {
            let stop = if j <= j_restart + cfg.delta {
                Some("stall")
            } else if cuts.len() > cfg.m_bar {
                Some("cap")
            } else {
                None
            };
            if let Some(branch) = stop {
                run.record(k, &u, j, &visit, oa.len(), from_restart, branch, Vec::new());
                return Ok(run.finish(SolveStatus::LowerBoundOnly, &u, &visit));
            }
            oa = restart_set(&cuts, j, RestartKind::Warm, k + 1);
            run.restarts += 1;
        } else {
            oa = oa.with_cuts(cuts);
        }
        let next = subsolver.minimize(&oa, n)?;
        let branch = if restart { "restart" } else { "cumulative" };
        run.record(k, &u, j, &visit, oa.len(), from_restart, branch, logged);
        u = next;
        from_restart = restart;
        if restart {
            j_restart = norm_sq(&u);
        }
    }
    unreachable!("loop returns at k == max_iter")
}
