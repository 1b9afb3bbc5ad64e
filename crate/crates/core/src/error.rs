use thiserror::Error;

/// Errors raised by the simplex toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("invalid derivative pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment of total degree {0} exceeds the supported range")]
    MomentOverflow(u32),

    #[error("degree {degree} out of range (max {max})")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("orthogonality lost at degree {degree}: residual {residual:.3e}, gram condition {condition:.3e}")]
    OrthogonalityLoss { degree: usize, residual: f64, condition: f64 },

    #[error("point too close to the boundary: {0}")]
    BoundaryPoint(String),

    #[error("probe grid too coarse: spacing {spacing:.4e} exceeds {limit:.4e}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("shrunken domain is empty for n = {n}, delta = {delta}")]
    EmptyDomain { n: usize, delta: f64 },

    #[error("grid refinement did not converge: relative drift {0:.3e}")]
    NonConvergent(f64),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("unsupported form/parameter combination: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
