//! Sparse planar array design and analysis.
//!
//! The crate builds and analyzes active planar arrays on the integer
//! half-wavelength grid:
//!
//! * [`geometry`] — element sets, exact sum/difference co-arrays,
//!   multiplicities, contiguity, and mirror symmetry.
//! * [`configurations`] — closed-form generators for the Uniform Rectangular
//!   Array, the Boundary Array, and the Concentric Rectangular Array, plus
//!   corner and essential-element checks.
//! * [`metrics`] — redundancy, sparseness profiles, aspect ratio, and the
//!   asymptotic redundancy formulas.
//! * [`mra_search`] — desk-scale exact branch-and-bound search for
//!   Minimum-Redundancy Arrays, with enumeration of all optima and
//!   unit-spacing-regularized selection.
//! * [`imaging`] — active imaging simulation under mutual coupling: snapshot
//!   synthesis, Dolph-Chebyshev co-array tapers, SVD image addition,
//!   beamforming, RMSE evaluation, and deterministic Monte-Carlo studies.
//!
//! Heavy inner loops (beamforming pixels, Monte-Carlo trials, essential
//! element sweeps) run on rayon when the default `parallel` feature is
//! enabled and fall back to plain loops otherwise; both paths produce
//! identical results.

pub mod configurations;
pub mod error;
pub mod geometry;
pub mod imaging;
pub mod metrics;
pub mod mra_search;

pub use error::{Error, Result};

/// Sizes the global rayon thread pool. A no-op when the `parallel` feature is
/// disabled or when a pool has already been installed.
#[cfg(feature = "parallel")]
pub fn configure_thread_pool(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}

/// Sizes the global rayon thread pool. A no-op when the `parallel` feature is
/// disabled or when a pool has already been installed.
#[cfg(not(feature = "parallel"))]
pub fn configure_thread_pool(_threads: usize) {}
