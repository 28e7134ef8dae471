//! Error type shared by all modules of the crate.

use crate::geometry::GridPoint;
use thiserror::Error;

/// Errors reported by array construction, analysis, search, and imaging.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An element set must contain at least one element.
    #[error("element set is empty")]
    EmptyElementSet,

    /// An element lies outside the declared aperture bounds.
    #[error("element ({}, {}) outside aperture 0..={lx} x 0..={ly}", point.x, point.y)]
    ElementOutOfBounds { point: GridPoint, lx: i64, ly: i64 },

    /// The same element was listed twice.
    #[error("duplicate element ({}, {})", point.x, point.y)]
    DuplicateElement { point: GridPoint },

    /// Aperture bounds invalid for the requested generator.
    #[error("unsupported dimensions for {family}: lx={lx}, ly={ly}")]
    UnsupportedDimensions {
        family: &'static str,
        lx: i64,
        ly: i64,
    },

    /// The generated array failed its mandatory contiguity self-check.
    #[error("generated array failed the contiguity self-check (lx={lx}, ly={ly})")]
    ContiguitySelfCheckFailed { lx: i64, ly: i64 },

    /// Operation requires a mirror-symmetric element set.
    #[error("element set is not mirror symmetric")]
    NotMirrorSymmetric,

    /// The shifted difference-co-array multiplicity disagreed with the sum
    /// multiplicity at `point`.
    #[error(
        "multiplicity mismatch at ({}, {}): sum={sum_mult}, shifted diff={diff_mult}",
        point.x, point.y
    )]
    MultiplicityShiftMismatch {
        point: GridPoint,
        sum_mult: u64,
        diff_mult: u64,
    },

    /// Operation requires an array with a contiguous sum co-array.
    #[error("sum co-array is not contiguous")]
    NonContiguousSumCoarray,

    /// Scalar argument outside its documented domain.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// Search problem exceeds the configured tractability guard.
    #[error("search size {cells} exceeds tractability guard {guard} (raise the guard to force)")]
    TractabilityGuard { cells: usize, guard: usize },

    /// Matrix or grid dimensions disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Taper weight requested at a point missing from the sum co-array.
    #[error("taper support exceeds sum co-array at ({}, {})", point.x, point.y)]
    TaperExceedsCoarray { point: GridPoint },

    /// SVD energy threshold must lie in (0, 1].
    #[error("energy threshold {0} outside (0, 1]")]
    ThresholdOutOfRange(f64),

    /// Scene must contain at least one target and a nonzero waveform.
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    /// A norm or scale factor vanished where a nonzero value is required.
    #[error("zero image has no optimal scaling")]
    ZeroImage,

    /// A post-condition re-verification failed; indicates a bug.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
