//! The subproblem kernel: projection onto a polyhedron, norm maximization over
//! a polyhedron, and deciding whether a sphere centered at the origin meets a
//! polyhedron.

mod center;
mod feasibility;
mod maxnorm;
mod polyhedron;
mod projection;

use serde::{Deserialize, Serialize};

pub use feasibility::{
    segment_sphere_intersection, sphere_polyhedron_feasibility, EmptyReason, FeasibilityOutcome,
};
pub use maxnorm::{max_norm_over_polyhedron, MaxNormOutcome};
pub use polyhedron::{Halfspace, Polyhedron};
pub use projection::{project_onto_polyhedron, Projection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Row membership: `gᵀx − h ≤ row_tol_abs + row_tol_rel·scale`.
    pub row_tol_abs: f64,
    pub row_tol_rel: f64,
    /// Relative tolerance on `‖x‖² = α`.
    pub sphere_tol_rel: f64,
    /// Certified accuracy of the projection.
    pub projection_tol: f64,
    /// Dual coordinate sweeps before switching to the active-set method.
    pub projection_sweeps: usize,
    /// Below both caps the vertex search runs without a budget.
    pub cap_n: usize,
    pub cap_m: usize,
    /// Bases the vertex search may visit above the caps.
    pub vertex_budget: usize,
    /// Move sphere witnesses away from the faces of the polyhedron.
    pub center_witness: bool,
    pub seed: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            row_tol_abs: 1e-8,
            row_tol_rel: 1e-8,
            sphere_tol_rel: 1e-9,
            projection_tol: 1e-10,
            projection_sweeps: 200,
            cap_n: 10,
            cap_m: 25,
            vertex_budget: 200_000,
            center_witness: true,
            seed: 0,
        }
    }
}
