use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem index {index} for a space with {count} factors")]
    InvalidSubsystem { index: usize, count: usize },

    #[error("bipartition does not cover every factor exactly once")]
    InvalidBipartition,

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("vectors are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("not a density operator: {0}")]
    InvalidState(String),

    #[error("channel is not trace preserving (completeness residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("Kraus set is empty or has inconsistent operator shapes")]
    InvalidKrausSet,

    #[error("no affine dependence among {points} points (need at least {required})")]
    InsufficientPoints { points: usize, required: usize },

    #[error("quantum code construction failed: {0}")]
    RadonInfeasible(String),

    #[error("shared code matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state leaks outside the code space (captured weight {captured:.3e})")]
    Leakage { captured: f64 },

    #[error("input is not supported on the message subspace (weight outside {outside:.3e})")]
    OutsideMessageSpace { outside: f64 },

    #[error("sector dimension {dimension} exceeds the budget {budget}")]
    SectorOverflow { dimension: u128, budget: u128 },

    #[error("unsupported link configuration: {0}")]
    UnsupportedLink(String),

    #[error("map is not mixing: {0}")]
    NotMixing(String),

    #[error("map has {count} fixed points")]
    MultipleFixedPoints { count: usize },

    #[error("no measurement outcome has non-zero probability")]
    NoOutcome,

    #[error("operation requires the YES parity outcome")]
    RequiresYes,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
