//! Builders for the two worked applications: packing circles in the smallest
//! enclosing circle, and Neyman-Pearson multiclass classification.

mod libsvm;
mod npc;
mod packing;

pub use libsvm::{iris, parse_libsvm, Dataset, IRIS_SCALE};
pub use npc::{
    build_npc, npc_classify, npc_f1, psi, psi_prime, psi_second, ClassRisk, NormCap, NpcSpec, RHO_PSI,
};
pub use packing::{build_packing, packing_centers, packing_radius_of, EnclosingSquare, PackingSpec, PairOverlap};
