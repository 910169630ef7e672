use serde::{Deserialize, Serialize};

use crate::cuts::QuadraticCut;

/// One row of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    /// `J(x_k) = ‖x_k − z‖²`.
    pub objective: f64,
    /// Nominal level of the subproblem solved at `k` (equals `objective` up to
    /// rounding for the inexact variant).
    pub level: f64,
    pub violated: Vec<usize>,
    pub max_violation: f64,
    /// Cuts in the subproblem solved at `k` (in the current set if none was solved).
    pub cut_count: usize,
    /// `x_k` was produced by a restart.
    pub restart: bool,
    /// What the iteration did: `point`, `empty_*`, `cumulative`, `restart`,
    /// `feasible`, `cap`, `stall`, `uncertified`, `max_iter`.
    pub branch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub iter: usize,
    pub constraint: usize,
    pub a: f64,
    pub b: Vec<f64>,
    pub c: f64,
}

impl From<&QuadraticCut> for CutRecord {
    fn from(q: &QuadraticCut) -> Self {
        Self {
            iter: q.iter,
            constraint: q.constraint,
            a: q.a,
            b: q.b.clone(),
            c: q.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TraceEvent {
    Iteration(IterationRecord),
    Cut(CutRecord),
}

/// Receives trace events in iteration order.
pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent);
}

#[derive(Debug, Default)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _: &TraceEvent) {}
}

#[derive(Debug, Default)]
pub struct MemorySink {
    pub events: Vec<TraceEvent>,
}

impl TraceSink for MemorySink {
    fn record(&mut self, event: &TraceEvent) {
        self.events.push(event.clone());
    }
}
