//! Global minimization of the squared distance to a point over an
//! intersection of weakly convex level sets.
//!
//! Every constraint `f_i` is paired with a curvature `a_i` such that
//! `f_i + a_i‖·‖²` is convex. A subgradient of that convexification at an
//! infeasible point yields a *quadratic cut* `−a‖x‖² + bᵀx + c ≤ 0`, whose
//! violated region is an open ball (a halfspace when `a = 0`). The solvers
//! accumulate such cuts into outer approximations of the feasible set and
//! minimize the distance over them:
//!
//! - [`solver::solve_exact`]: plain accumulation with a global subsolver,
//! - [`solver::solve_warm`]: accumulation with a cut budget and restarts,
//! - [`solver::solve_inexact`]: level-by-level search, each subproblem reduced
//!   to deciding whether a sphere meets a polyhedron.
//!
//! [`problems`] builds the circle packing and Neyman-Pearson classification
//! instances, and [`oracle`] holds slow brute-force references used to check
//! the kernels on small instances.

pub mod cuts;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod solver;

pub use cuts::{LevelPolyhedron, OuterApproximation, QuadraticCut};
pub use error::{Error, Result};
pub use geometry::{FeasibilityOutcome, GeometryConfig, MaxNormOutcome, Polyhedron};
pub use model::{Constraint, Problem, ViolationReport};
pub use solver::{
    IterationRecord, SolveResult, SolveStatus, SolverConfig, TraceEvent, Variant,
};
