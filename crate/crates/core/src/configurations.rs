//! Closed-form array generators (URA, Boundary Array, Concentric Rectangular
//! Array) and structural checks: the mandatory corner set and essential
//! elements.
//!
//! The CRA consists of two sparse interleaved coaxial rectangles displaced by
//! two unit spacings, with reinforced corners. Even apertures follow the
//! closed form directly; odd apertures use mirrored per-side patterns so the
//! set stays point symmetric, and every constructed CRA is validated against
//! a contiguity self-check before it is returned.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{
    is_contiguous, is_mirror_symmetric, sum_coarray, ElementSet, GridPoint,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// The closed-form array families exposed by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Ura,
    Ba,
    Cra,
}

impl ArrayKind {
    pub fn name(self) -> &'static str {
        match self {
            ArrayKind::Ura => "ura",
            ArrayKind::Ba => "ba",
            ArrayKind::Cra => "cra",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ura" => Some(ArrayKind::Ura),
            "ba" => Some(ArrayKind::Ba),
            "cra" => Some(ArrayKind::Cra),
            _ => None,
        }
    }
}

/// A family plus aperture, ready to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayFamily {
    pub kind: ArrayKind,
    pub lx: i64,
    pub ly: i64,
}

impl ArrayFamily {
    pub fn new(kind: ArrayKind, lx: i64, ly: i64) -> Result<Self> {
        let min = match kind {
            ArrayKind::Ura => 0,
            ArrayKind::Ba => 1,
            ArrayKind::Cra => 2,
        };
        if lx < min || ly < min {
            return Err(Error::UnsupportedDimensions {
                family: kind.name(),
                lx,
                ly,
            });
        }
        Ok(Self { kind, lx, ly })
    }

    pub fn generate(&self) -> Result<ElementSet> {
        match self.kind {
            ArrayKind::Ura => make_ura(self.lx, self.ly),
            ArrayKind::Ba => make_ba(self.lx, self.ly),
            ArrayKind::Cra => make_cra(self.lx, self.ly),
        }
    }
}

/// Uniform Rectangular Array: every grid point of the aperture.
/// `N = (lx + 1)(ly + 1)`.
pub fn make_ura(lx: i64, ly: i64) -> Result<ElementSet> {
    if lx < 0 || ly < 0 {
        return Err(Error::UnsupportedDimensions {
            family: "ura",
            lx,
            ly,
        });
    }
    let pts = (0..=lx).flat_map(|x| (0..=ly).map(move |y| GridPoint::new(x, y)));
    ElementSet::new(pts, lx, ly)
}

/// Boundary Array: the hollow perimeter of the aperture rectangle.
/// `N = 2(lx + ly)` for `lx, ly >= 1`.
pub fn make_ba(lx: i64, ly: i64) -> Result<ElementSet> {
    if lx < 0 || ly < 0 {
        return Err(Error::UnsupportedDimensions {
            family: "ba",
            lx,
            ly,
        });
    }
    let mut pts = BTreeSet::new();
    for x in 0..=lx {
        pts.insert(GridPoint::new(x, 0));
        pts.insert(GridPoint::new(x, ly));
    }
    for y in 0..=ly {
        pts.insert(GridPoint::new(0, y));
        pts.insert(GridPoint::new(lx, y));
    }
    ElementSet::new(pts, lx, ly)
}

/// Policy for odd aperture dimensions in [`make_cra_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OddDimPolicy {
    /// Build the validated odd-dimension variant.
    #[default]
    Allow,
    /// Reject odd dimensions outright.
    Reject,
}

// One-dimensional element patterns for the three ring offsets. `high` selects
// the pattern for the far side of the aperture; for even lengths both sides
// share the same symmetric pattern, for odd lengths the two sides carry
// mirror-image patterns so the planar set stays point symmetric.
fn ring_pattern(offset: i64, len: i64, high: bool) -> Vec<i64> {
    let even = len % 2 == 0;
    match offset {
        0 => {
            let mut v = vec![0, len];
            if even {
                v.extend((1..len).step_by(2));
            } else if !high {
                v.extend((1..len - 1).step_by(2)); // interior odds
            } else {
                v.extend((2..len).step_by(2)); // interior evens
            }
            v
        }
        1 => vec![0, 1, len - 1, len],
        2 => {
            if even {
                (2..len - 1).step_by(2).collect()
            } else if !high {
                (2..len - 2).step_by(2).collect() // evens, far end trimmed
            } else {
                (3..len - 1).step_by(2).collect() // odds, near end trimmed
            }
        }
        _ => unreachable!("ring offset is always 0, 1, or 2"),
    }
}

/// Concentric Rectangular Array with the default odd-dimension policy.
pub fn make_cra(lx: i64, ly: i64) -> Result<ElementSet> {
    make_cra_with(lx, ly, OddDimPolicy::Allow)
}

/// Concentric Rectangular Array for `lx, ly >= 2`.
///
/// Every constructed set is checked to be mirror symmetric with a contiguous
/// sum co-array before being returned; a failed self-check is an error, never
/// a silently wrong array.
pub fn make_cra_with(lx: i64, ly: i64, policy: OddDimPolicy) -> Result<ElementSet> {
    if lx < 2 || ly < 2 {
        return Err(Error::UnsupportedDimensions {
            family: "cra",
            lx,
            ly,
        });
    }
    if policy == OddDimPolicy::Reject && (lx % 2 != 0 || ly % 2 != 0) {
        return Err(Error::UnsupportedDimensions {
            family: "cra (even dimensions required)",
            lx,
            ly,
        });
    }

    let mut pts = BTreeSet::new();
    for i in 0..=2 {
        // horizontal ring rows at y = i and y = ly - i
        for (y, high) in [(i, false), (ly - i, true)] {
            for x in ring_pattern(i, lx, high) {
                pts.insert(GridPoint::new(x, y));
            }
        }
        // vertical ring columns at x = i and x = lx - i
        for (x, high) in [(i, false), (lx - i, true)] {
            for y in ring_pattern(i, ly, high) {
                pts.insert(GridPoint::new(x, y));
            }
        }
    }
    // At 3x3 the full corner rows regenerate the two trimmed interior points;
    // drop them explicitly to keep the odd-square element count at 4L + 2.
    if lx == 3 && ly == 3 {
        pts.remove(&GridPoint::new(1, 1));
        pts.remove(&GridPoint::new(2, 2));
    }

    let d = ElementSet::new(pts, lx, ly)?;
    if !is_mirror_symmetric(&d) || !is_contiguous(&sum_coarray(&d), lx, ly) {
        return Err(Error::ContiguitySelfCheckFailed { lx, ly });
    }
    Ok(d)
}

/// The mandatory corner set: every planar array with a contiguous sum
/// co-array must contain these points. Exactly 12 distinct points for
/// `lx, ly >= 4`; the index sets overlap for smaller apertures.
pub fn corner_property_set(lx: i64, ly: i64) -> Vec<GridPoint> {
    let mut pts = BTreeSet::new();
    for x in [1, lx - 1] {
        for y in [0, ly] {
            pts.insert(GridPoint::new(x, y));
        }
    }
    for x in [0, lx] {
        for y in [0, 1, ly - 1, ly] {
            pts.insert(GridPoint::new(x, y));
        }
    }
    pts.retain(|p| p.x >= 0 && p.x <= lx && p.y >= 0 && p.y <= ly);
    pts.into_iter().collect()
}

/// True iff the set contains its mandatory corner points.
pub fn satisfies_corner_property(d: &ElementSet) -> bool {
    corner_property_set(d.lx(), d.ly())
        .into_iter()
        .all(|p| d.contains(p))
}

fn is_essential(d: &ElementSet, p: GridPoint) -> bool {
    match d.without(p) {
        Ok(rest) => !is_contiguous(&sum_coarray(&rest), d.lx(), d.ly()),
        Err(_) => true, // removing the last element certainly breaks coverage
    }
}

/// Elements whose removal punches a hole in the sum co-array.
///
/// Requires the set itself to have a contiguous sum co-array. Removals are
/// evaluated independently (in parallel when the `parallel` feature is on)
/// and the result is always in lexicographic element order.
pub fn essential_elements(d: &ElementSet) -> Result<Vec<GridPoint>> {
    if !is_contiguous(&sum_coarray(d), d.lx(), d.ly()) {
        return Err(Error::NonContiguousSumCoarray);
    }
    #[cfg(feature = "parallel")]
    {
        Ok(d.elements()
            .par_iter()
            .copied()
            .filter(|&p| is_essential(d, p))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        essential_elements_seq_inner(d)
    }
}

/// Single-threaded version of [`essential_elements`]; same output.
pub fn essential_elements_seq(d: &ElementSet) -> Result<Vec<GridPoint>> {
    if !is_contiguous(&sum_coarray(d), d.lx(), d.ly()) {
        return Err(Error::NonContiguousSumCoarray);
    }
    essential_elements_seq_inner(d)
}

fn essential_elements_seq_inner(d: &ElementSet) -> Result<Vec<GridPoint>> {
    Ok(d.elements()
        .iter()
        .copied()
        .filter(|&p| is_essential(d, p))
        .collect())
}
