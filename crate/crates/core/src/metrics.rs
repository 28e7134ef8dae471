//! Figures of merit for sparse arrays: redundancy, sparseness profile,
//! aspect ratio, and asymptotic redundancy formulas.
//!
//! Distance comparisons go through exact integer squared norms; `sqrt(2)`
//! versus `1.4142...` never comes down to a floating-point equality test.

use crate::error::{Error, Result};
use crate::geometry::{difference_coarray, sum_coarray, ElementSet};

/// Unordered pair counts per realizable inter-element distance, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsenessProfile {
    entries: Vec<ProfileEntry>,
}

/// One profile row: a squared grid distance and the number of unordered
/// element pairs separated by exactly that distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileEntry {
    pub dist_sq: u64,
    pub count: u64,
}

impl ProfileEntry {
    /// Euclidean distance for display purposes.
    pub fn distance(&self) -> f64 {
        (self.dist_sq as f64).sqrt()
    }
}

impl SparsenessProfile {
    pub fn entries(&self) -> &[ProfileEntry] {
        &self.entries
    }

    /// Total unordered pair count across all entries.
    pub fn total_pairs(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }
}

/// Redundancy `R = N(N + 1) / (2 |C_sum|)`, using the actual support size of
/// the sum co-array so non-contiguous arrays score sensibly too.
pub fn redundancy(d: &ElementSet) -> f64 {
    let (num, den) = redundancy_ratio(d);
    num as f64 / den as f64
}

/// The exact integer ratio behind [`redundancy`]: `(N(N+1), 2 |C_sum|)`.
pub fn redundancy_ratio(d: &ElementSet) -> (u64, u64) {
    let n = d.len() as u64;
    let support = sum_coarray(d).support_len() as u64;
    (n * (n + 1), 2 * support)
}

/// Number of unordered element pairs at squared distance `dist_sq`.
pub fn sparseness_sq(d: &ElementSet, dist_sq: u64) -> u64 {
    if dist_sq == 0 {
        return 0;
    }
    let diff = difference_coarray(d);
    let mass: u64 = diff
        .iter()
        .filter(|(p, _)| p.norm_sq() == dist_sq)
        .map(|(_, w)| w)
        .sum();
    // difference multiplicities count ordered pairs; halve for unordered
    mass / 2
}

/// Number of unordered element pairs at Euclidean distance `dist`.
///
/// A distance whose square is not an integer cannot occur on the grid and
/// yields zero.
pub fn sparseness(d: &ElementSet, dist: f64) -> u64 {
    if !(dist > 0.0) {
        return 0;
    }
    let sq = dist * dist;
    let rounded = sq.round();
    if (sq - rounded).abs() > 1e-9 {
        return 0;
    }
    sparseness_sq(d, rounded as u64)
}

/// All realizable grid distances up to `max_dist` (those of the form
/// `sqrt(a^2 + b^2)`), ascending, each with its pair count — zero counts
/// included.
pub fn sparseness_profile(d: &ElementSet, max_dist: f64) -> SparsenessProfile {
    let max_sq = (max_dist * max_dist + 1e-9).floor() as u64;
    let mut realizable = std::collections::BTreeSet::new();
    let cap = (max_sq as f64).sqrt() as i64 + 1;
    for a in 0..=cap {
        for b in a..=cap {
            let q = (a * a + b * b) as u64;
            if q >= 1 && q <= max_sq {
                realizable.insert(q);
            }
        }
    }
    // one pass over the difference co-array, not one per distance
    let diff = difference_coarray(d);
    let mut counts: std::collections::BTreeMap<u64, u64> =
        realizable.iter().map(|&q| (q, 0)).collect();
    for (p, w) in diff.iter() {
        let q = p.norm_sq();
        if let Some(c) = counts.get_mut(&q) {
            *c += w;
        }
    }
    SparsenessProfile {
        entries: counts
            .into_iter()
            .map(|(dist_sq, mass)| ProfileEntry {
                dist_sq,
                count: mass / 2,
            })
            .collect(),
    }
}

/// Aspect ratio `(shorter + 1) / (longer + 1)`, in `(0, 1]`.
pub fn aspect_ratio(lx: i64, ly: i64) -> f64 {
    let (lo, hi) = if lx < ly { (lx, ly) } else { (ly, lx) };
    (lo + 1) as f64 / (hi + 1) as f64
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!(
            "aspect ratio {rho} outside (0, 1]"
        )))
    }
}

/// Asymptotic redundancy of the CRA and BA families:
/// `R_inf = (rho + 1)^2 / (2 rho)`, minimized at 2 for square apertures.
pub fn asymptotic_redundancy_cra(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok((rho + 1.0) * (rho + 1.0) / (2.0 * rho))
}

/// Element redundancy `eta_inf = sqrt(R_inf / 2) = (rho + 1) / (2 sqrt(rho))`:
/// the asymptotic element-count ratio against aspect-ratio-independent
/// configurations.
pub fn element_redundancy(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok((rho + 1.0) / (2.0 * rho.sqrt()))
}
