use std::path::Path;

use anyhow::Result;
use cutsphere_core::geometry::Halfspace;
use cutsphere_core::oracle::{brute_force_sqcqp, enumerate_vertices, exact_projection_qp, OracleBudget};
use cutsphere_core::{Error, Polyhedron, QuadraticCut};
use serde::Deserialize;
use serde_json::json;

use crate::config::load;

/// `−a‖x‖² + bᵀx + c ≤ 0`
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutSpec {
    a: f64,
    b: Vec<f64>,
    c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SqcqpInput {
    z: Vec<f64>,
    #[serde(default)]
    cuts: Vec<CutSpec>,
    #[serde(default)]
    budget: OracleBudget,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyInput {
    n: Option<usize>,
    rows: Vec<Halfspace>,
    z: Option<Vec<f64>>,
}

impl PolyInput {
    fn polyhedron(&self) -> Result<Polyhedron> {
        let n = self
            .n
            .or_else(|| self.rows.first().map(|r| r.g.len()))
            .or_else(|| self.z.as_ref().map(Vec::len))
            .ok_or_else(|| anyhow::anyhow!("cannot infer the dimension; give n"))?;
        Ok(Polyhedron::new(n, self.rows.clone()))
    }
}

pub enum OracleCommand<'a> {
    Sqcqp(&'a Path),
    Project(&'a Path),
    Vertices(&'a Path),
}

/// Budget and cap violations exit with 2; other failures propagate.
fn budget_exit(e: Error) -> Result<i32> {
    match e {
        Error::BudgetExceeded(msg) => {
            eprintln!("budget exceeded: {msg}");
            Ok(2)
        }
        e => Err(e.into()),
    }
}

pub fn cmd_oracle(cmd: OracleCommand) -> Result<i32> {
    let out = match cmd {
        OracleCommand::Sqcqp(path) => {
            let input: SqcqpInput = load(path)?;
            let cuts: Vec<QuadraticCut> = input
                .cuts
                .into_iter()
                .enumerate()
                .map(|(i, c)| QuadraticCut {
                    a: c.a,
                    b: c.b,
                    c: c.c,
                    constraint: i,
                    iter: 0,
                })
                .collect();
            match brute_force_sqcqp(&cuts, &input.z, &input.budget) {
                Ok(r) => json!({
                    "J": r.objective,
                    "x": r.x,
                    "gap_estimate": r.gap_estimate,
                    "certificate": r.certificate,
                }),
                Err(e) => return budget_exit(e),
            }
        }
        OracleCommand::Project(path) => {
            let input: PolyInput = load(path)?;
            let p = input.polyhedron()?;
            let z = input.z.clone().unwrap_or_else(|| vec![0.0; p.n]);
            match exact_projection_qp(&p, &z) {
                Ok(x) => json!({ "x": x, "distance_sq": x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() }),
                Err(Error::InfeasiblePolyhedron) => json!({ "infeasible": true }),
                Err(Error::PreconditionViolated(msg)) => return budget_exit(Error::BudgetExceeded(msg)),
                Err(e) => return Err(e.into()),
            }
        }
        OracleCommand::Vertices(path) => {
            let input: PolyInput = load(path)?;
            let p = input.polyhedron()?;
            match enumerate_vertices(&p) {
                Ok(vs) => json!({ "vertices": vs }),
                Err(Error::UnboundedPolyhedron { point, direction }) => {
                    json!({ "unbounded": true, "point": point, "direction": direction })
                }
                Err(Error::InfeasiblePolyhedron) => json!({ "infeasible": true }),
                Err(Error::PreconditionViolated(msg)) => return budget_exit(Error::BudgetExceeded(msg)),
                Err(e) => return Err(e.into()),
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}
