use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for {len} factors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operator is not Hermitian (anti-Hermitian part {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid trace {0}")]
    InvalidTrace(f64),

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("operator side {side} exceeds the configured cap {cap}")]
    CapExceeded { side: usize, cap: usize },

    #[error("factors cannot be split into {groups} equal groups: {dims:?}")]
    NonUniformGrouping { groups: usize, dims: Vec<usize> },

    #[error("eigensolver did not converge within {0} iterations")]
    NotConverged(usize),

    #[error("projection onto the symmetric subspace vanished after {0} attempts")]
    ZeroProjection(usize),

    #[error("input is not permutation symmetric (deviation {0:e})")]
    NotSymmetric(f64),

    #[error("operator is not a contraction: spectrum [{min:e}, {max:e}] leaves [0, 1]")]
    NotContractive { min: f64, max: f64 },

    #[error("POVM element {0} is not a product operator across the cut")]
    NotProduct(usize),

    #[error("vanishing probability {0:e}")]
    VanishingProbability(f64),

    #[error("state lies inside the constraint hull (trace distance {0:e})")]
    InsideHull(f64),

    #[error("invalid permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("independent constructions disagree by {0:e}")]
    ConstructionMismatch(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
