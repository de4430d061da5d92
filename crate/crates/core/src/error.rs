use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("matrix entries must be finite and form an n x n array")]
    MalformedMatrix,
    #[error("invalid tolerance: eps and eigengap must be positive and finite")]
    InvalidTolerance,
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrices {left} and {right} do not commute (commutator norm {residual:.3e})")]
    NotCommuting {
        left: usize,
        right: usize,
        residual: f64,
    },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("empty matrix family")]
    EmptyFamily,

    #[error("projector {0} is not a Hermitian idempotent")]
    NotProjector(usize),
    #[error("projectors {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("projectors do not sum to the identity")]
    NotComplete,
    #[error("trace of projector {0} is not a positive integer")]
    NonIntegerTrace(usize),
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("ordered partition parts must be positive")]
    InvalidPartition,
    #[error("refinement does not satisfy the partition-sum condition")]
    InvalidRefinement,
    #[error("system type {actual:?} does not match refinement source {expected:?}")]
    TypeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("contexts are not comparable")]
    NotComparable,
    #[error("unknown context id {0}")]
    UnknownContext(String),

    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("valuation weights must be finite and nonnegative")]
    InvalidWeight,
    #[error("points and weights have different lengths ({points} vs {weights})")]
    LengthMismatch { points: usize, weights: usize },
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("kernel targets are not a common space")]
    TargetMismatch,
    #[error("valuation has zero total mass")]
    ZeroMass,
    #[error("total mass {0} is not 1")]
    NotNormalized(f64),

    #[error("Born table entry has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),
    #[error("Born table entry ({row}, {col}) is negative ({value:.3e})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("projector {0} does not have rank one")]
    RankNotOne(usize),
    #[error("state vector is zero")]
    ZeroVector,
    #[error("observable is not in the context")]
    NotInContext,

    #[error("no assignment for context {0}")]
    MissingAssignment(String),

    #[error("Bloch vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("matrix is not a trace-one projector")]
    NotTraceOneProjector,
}
