use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cutsphere_core::model::recover_original_solution;
use cutsphere_core::problems::{npc_classify, npc_f1, packing_radius_of, NpcSpec};
use cutsphere_core::solver::{
    solve_exact, solve_inexact, solve_warm, CriticalPointSubsolver, SolveResult, SolveStatus, TraceEvent, TraceSink,
    Variant,
};
use serde_json::{json, Value};

use crate::config::{load, relative_to, Built, RunConfig};

/// Streams events as JSON lines, adding `f1` to iteration lines of
/// classification runs.
struct JsonlSink<'a> {
    out: Option<BufWriter<File>>,
    npc: Option<&'a NpcSpec>,
    error: Option<std::io::Error>,
}

impl TraceSink for JsonlSink<'_> {
    fn record(&mut self, event: &TraceEvent) {
        let Some(out) = self.out.as_mut() else { return };
        if self.error.is_some() {
            return;
        }
        let mut v = serde_json::to_value(event).expect("trace events serialize");
        if let (TraceEvent::Iteration(rec), Some(spec)) = (event, self.npc) {
            v["f1"] = json!(npc_f1(spec, &rec.x));
        }
        if let Err(e) = writeln!(out, "{v}") {
            self.error = Some(e);
        }
    }
}

pub struct SolveArgs {
    pub config: PathBuf,
    pub trace: Option<PathBuf>,
    pub result: Option<PathBuf>,
}

pub fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::FeasibleEpsOptimal | SolveStatus::FeasibleOptimalFinite => 0,
        SolveStatus::LowerBoundOnly => 2,
        SolveStatus::Uncertified => 3,
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let cfg: RunConfig = load(&args.config)?;
    let built = cfg.problem.build(&args.config)?;
    let resolve = |cli: &Option<PathBuf>, file: &Option<PathBuf>| -> Option<PathBuf> {
        cli.clone().or_else(|| file.as_ref().map(|p| relative_to(&args.config, p)))
    };
    let trace_path = resolve(&args.trace, &cfg.output.trace);
    let result_path = resolve(&args.result, &cfg.output.result);

    let out = match &trace_path {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => None,
    };
    let npc = match &built {
        Built::Npc { spec, .. } => Some(spec),
        _ => None,
    };
    let mut sink = JsonlSink { out, npc, error: None };
    let problem = built.problem();
    let solver = &cfg.solver;
    log::info!("solving {} constraints in dimension {} ({:?})", problem.m(), problem.n, solver.variant);
    let r = match solver.variant {
        Variant::Exact => solve_exact(problem, solver, &CriticalPointSubsolver::default(), &mut sink),
        Variant::Warm => solve_warm(problem, solver, &CriticalPointSubsolver::default(), &mut sink),
        Variant::Inexact => solve_inexact(problem, solver, &mut sink),
    }?;
    if let Some(e) = sink.error.take() {
        return Err(e).context("writing the trace");
    }
    if let Some(mut w) = sink.out.take() {
        w.flush().context("writing the trace")?;
    }

    let report = result_json(&built, &r);
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(p) = &result_path {
        write_file(p, &text)?;
    }
    Ok(exit_code(r.status))
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, format!("{text}\n")).with_context(|| format!("cannot write {}", p.display()))
}

fn result_json(built: &Built, r: &SolveResult) -> Value {
    let problem = built.problem();
    let mut v = json!({
        "status": r.status,
        "objective": r.objective,
        "level": r.trace.last().map(|t| t.level),
        "iterations": r.iterations,
        "restarts": r.restarts,
        "max_violation": r.max_violation,
        "infeasibility_surrogate": r.infeasibility_surrogate,
        "x": r.x,
    });
    // Packing and classification are lifted by one slack coordinate.
    if !matches!(built, Built::Custom { .. }) {
        v["original_x"] = json!(recover_original_solution(problem, &r.x));
    }
    match built {
        Built::Packing { spec, .. } => {
            v["radius"] = json!(packing_radius_of(&r.x, spec));
        }
        Built::Npc { spec, .. } => {
            let x = recover_original_solution(problem, &r.x);
            let counts: Vec<[usize; 2]> = spec
                .classes
                .iter()
                .enumerate()
                .map(|(k, c)| [c.iter().filter(|z| npc_classify(&x, z, spec.k()) == k + 1).count(), c.len()])
                .collect();
            v["f1"] = json!(npc_f1(spec, &r.x));
            v["class_counts"] = json!(counts);
        }
        Built::Custom { .. } => {}
    }
    v
}
