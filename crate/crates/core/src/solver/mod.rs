//! The three cutting-sphere algorithms and the certificates around them.
//!
//! All solvers work in the shifted frame `u = x − z`, where the objective is
//! `‖u‖²`. Points and cuts reported in traces and results are in the
//! problem's own coordinates.

mod exact;
mod inexact;
mod kkt;
mod subsolver;
mod trace;
mod warm;

use serde::{Deserialize, Serialize};

use crate::cuts::{build_cut, QuadraticCut};
use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;
use crate::linalg::{add, norm_sq};
use crate::model::{violated_set, Problem, ViolationReport};

pub use exact::solve_exact;
pub use inexact::solve_inexact;
pub use kkt::{
    check_dimension_condition, check_kkt_certificate, estimate_multipliers, infeasibility_diagnostic,
    KktVerdict, KktViolation,
};
pub use subsolver::{CriticalPointSubsolver, OuterSubsolver};
pub use trace::{CutRecord, IterationRecord, MemorySink, NullSink, TraceEvent, TraceSink};
pub use warm::solve_warm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Exact,
    Warm,
    Inexact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Level increment on an inexact restart.
    pub epsilon: f64,
    /// Minimum objective increase that justifies a warm restart.
    pub delta: f64,
    /// Cap on the number of cuts a subproblem may hold.
    pub m_bar: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Slack on `max_i f_i(x) ≤ 0` used only by the stopping test.
    pub feas_tol: f64,
    /// Inexact only: start on a random point of this level instead of at `z`.
    pub start_level: Option<f64>,
    /// Inexact only: restart when emptiness could not be certified.
    pub allow_uncertified: bool,
    /// Record wall-clock time per iteration (breaks byte-identical traces).
    pub wall_time: bool,
    pub geometry: GeometryConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Inexact,
            epsilon: 0.5,
            delta: 1e-3,
            m_bar: 500,
            max_iter: 10_000,
            seed: 0,
            feas_tol: 1e-9,
            start_level: None,
            allow_uncertified: false,
            wall_time: false,
            geometry: GeometryConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidParameter(s.into()));
        match self.variant {
            Variant::Inexact if !(self.epsilon > 0.0 && self.epsilon.is_finite()) => {
                return bad("epsilon must be positive")
            }
            Variant::Warm if !(self.delta > 0.0 && self.delta.is_finite()) => {
                return bad("delta must be positive")
            }
            _ => {}
        }
        if self.m_bar == 0 {
            return bad("m_bar must be positive");
        }
        if !(self.feas_tol >= 0.0) {
            return bad("feas_tol must be nonnegative");
        }
        if let Some(s) = self.start_level {
            if !(s >= 0.0 && s.is_finite()) {
                return bad("start_level must be nonnegative");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Inexact run ended on a feasible point within ε of the optimum.
    FeasibleEpsOptimal,
    /// Exact or warm run ended on a feasible point.
    FeasibleOptimalFinite,
    /// Stopped infeasible; the final level bounds the optimum from below.
    LowerBoundOnly,
    /// A subproblem could not be decided.
    Uncertified,
}

impl SolveStatus {
    pub fn is_feasible(self) -> bool {
        matches!(self, Self::FeasibleEpsOptimal | Self::FeasibleOptimalFinite)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// `J` at the final point.
    pub objective: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub max_violation: f64,
    /// Distance-to-feasibility surrogate at the final point.
    pub infeasibility_surrogate: f64,
    pub trace: Vec<IterationRecord>,
}

/// Per-run state shared by the three variants.
pub(crate) struct Run<'a> {
    pub p: &'a Problem,
    pub cfg: &'a SolverConfig,
    pub sink: &'a mut dyn TraceSink,
    pub trace: Vec<IterationRecord>,
    pub restarts: usize,
    started: std::time::Instant,
}

pub(crate) struct Visit {
    pub report: ViolationReport,
    pub feasible: bool,
}

impl<'a> Run<'a> {
    pub fn new(p: &'a Problem, cfg: &'a SolverConfig, sink: &'a mut dyn TraceSink) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            p,
            cfg,
            sink,
            trace: Vec::new(),
            restarts: 0,
            started: std::time::Instant::now(),
        })
    }

    pub fn x_of(&self, u: &[f64]) -> Vec<f64> {
        add(u, &self.p.z)
    }

    pub fn visit(&self, u: &[f64]) -> Result<Visit> {
        let report = violated_set(self.p, &self.x_of(u))?;
        let feasible = report.max_value <= self.cfg.feas_tol;
        Ok(Visit { report, feasible })
    }

    /// Cuts for every strictly violated constraint at `x_k`: shifted for the
    /// solver, and in original coordinates for the log.
    pub fn cuts_at(&self, u: &[f64], report: &ViolationReport, k: usize) -> Result<(Vec<QuadraticCut>, Vec<CutRecord>)> {
        let x = self.x_of(u);
        let mut shifted = Vec::with_capacity(report.len());
        let mut logged = Vec::with_capacity(report.len());
        for &i in &report.indices {
            let cut = build_cut(self.p.constraints[i].as_ref(), i, &x, k)?;
            logged.push(CutRecord::from(&cut));
            shifted.push(cut.shifted(&self.p.z));
        }
        Ok((shifted, logged))
    }

    /// Logs iteration `k` and the cuts generated at it.
    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        k: usize,
        u: &[f64],
        level: f64,
        visit: &Visit,
        cut_count: usize,
        restart: bool,
        branch: &str,
        cuts: Vec<CutRecord>,
    ) {
        let rec = IterationRecord {
            k,
            x: self.x_of(u),
            objective: norm_sq(u),
            level,
            violated: visit.report.indices.clone(),
            max_violation: visit.report.max_value,
            cut_count,
            restart,
            branch: branch.to_string(),
            wall_ms: self
                .cfg
                .wall_time
                .then(|| self.started.elapsed().as_secs_f64() * 1e3),
        };
        self.sink.record(&TraceEvent::Iteration(rec.clone()));
        for c in cuts {
            self.sink.record(&TraceEvent::Cut(c));
        }
        self.trace.push(rec);
    }

    pub fn finish(self, status: SolveStatus, u: &[f64], visit: &Visit) -> SolveResult {
        let x = self.x_of(u);
        log::info!(
            "finished: {status:?}, J = {:.6e}, {} iterations, {} restarts",
            norm_sq(u),
            self.trace.len(),
            self.restarts
        );
        SolveResult {
            status,
            objective: norm_sq(u),
            iterations: self.trace.len(),
            restarts: self.restarts,
            max_violation: visit.report.max_value,
            infeasibility_surrogate: infeasibility_diagnostic(self.p, &x).unwrap_or(f64::NAN),
            x,
            trace: self.trace,
        }
    }
}
