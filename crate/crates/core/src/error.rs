//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by geometric and group-theoretic operations.
///
/// Rejections of a candidate space form (fixed points, too-small
/// displacement) are *not* errors; see
/// [`crate::quotient::RejectionReport`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("isometries belong to different model spaces")]
    SpaceMismatch,

    #[error("point violates the quadric constraint (residual {residual:e})")]
    OffQuadric { residual: f64 },

    #[error("invalid metric argument {value}: points are not on the model surface")]
    InvalidDistanceArgument { value: f64 },

    #[error("tangent vector is zero or not tangent at the base point")]
    InvalidTangent,

    #[error("zero quaternion cannot be normalized")]
    ZeroQuaternion,

    #[error("operation requires dimension {required}, space has dimension {got}")]
    UnsupportedDimension { required: usize, got: usize },

    #[error("degenerate triangle: {reason}")]
    DegenerateTriangle { reason: String },

    #[error("matrix does not preserve the bilinear form (residual {residual:e})")]
    NotFormPreserving { residual: f64 },

    #[error("group did not close at word-length cutoff {cutoff} ({size} elements found)")]
    NotClosedAtCutoff { cutoff: usize, size: usize },

    #[error("operation `{op}` is not supported for group kind `{kind}`")]
    UnsupportedGroupKind { op: &'static str, kind: String },

    #[error("lattice generators must be pure translations")]
    InvalidLattice,

    #[error("quotient has infinite volume: {reason}")]
    InfiniteVolume { reason: String },

    #[error("enumeration window insufficient: {reason}")]
    WindowInsufficient { reason: String },

    #[error("path step {index} has length {step} >= r/2 = {half_r}; lift is ambiguous")]
    AmbiguousLift { index: usize, step: f64, half_r: f64 },

    #[error("start point does not project to the first path point")]
    StartMismatch,

    #[error("geodesic lines do not intersect")]
    NonIntersectingLines,

    #[error("surface parametrization is metrically degenerate (EG - F^2 = {det:e})")]
    DegenerateSurface { det: f64 },

    #[error("fibers must have distinct base points")]
    SameBase,

    #[error("no stereographic pole clear of both curves could be found")]
    PoleSelectionFailed,

    #[error("test point coincides with an image of the source")]
    CoincidentPoints,

    #[error("star id `{id}` appears more than once in the catalog")]
    DuplicateStarId { id: String },

    #[error("catalog position for `{id}` is not canonical (does not reduce to itself)")]
    NotCanonical { id: String },

    #[error("invalid argument: {what}")]
    InvalidArgument { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
