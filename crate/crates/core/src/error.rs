use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {value} for constraint `{label}`")]
    NonFiniteValue { label: String, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no subgradient available for constraint `{0}`")]
    SubgradientUnavailable(String),

    #[error("cut has zero curvature; it describes a halfspace, not a ball")]
    DegenerateHalfspace,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("polyhedron is empty")]
    InfeasiblePolyhedron,

    #[error("polyhedron is unbounded along {direction:?}")]
    UnboundedPolyhedron { point: Vec<f64>, direction: Vec<f64> },

    #[error("iteration limit reached (residual {residual:.3e})")]
    IterationLimit { best: Vec<f64>, residual: f64 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("subproblem could not be certified: {0}")]
    Uncertified(String),

    #[error("subsolver failure: {0}")]
    SubsolverFailure(String),

    #[error("dataset mismatch: {0}")]
    DatasetMismatch(String),

    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
