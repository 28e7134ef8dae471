//! Integer-grid element sets and exact sum/difference co-array computation.
//!
//! Element positions live on the normalized half-wavelength grid, so every
//! coordinate is an exact integer and co-array multiplicities are exact
//! ordered-pair counts. The sum co-array of a set `D` collects `d_n + d_m`
//! over all ordered pairs, the difference co-array collects `d_m - d_n`;
//! both carry a multiplicity per point, and both total `N^2`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point on the integer element grid (units of half a wavelength).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Point reflection about the aperture center `(lx/2, ly/2)`.
    pub fn mirrored(self, lx: i64, ly: i64) -> Self {
        Self::new(lx - self.x, ly - self.y)
    }

    /// Squared Euclidean norm, exact in integers.
    pub fn norm_sq(self) -> u64 {
        (self.x * self.x + self.y * self.y) as u64
    }
}

impl From<[i64; 2]> for GridPoint {
    fn from(v: [i64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<GridPoint> for [i64; 2] {
    fn from(p: GridPoint) -> Self {
        [p.x, p.y]
    }
}

impl Add for GridPoint {
    type Output = GridPoint;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for GridPoint {
    type Output = GridPoint;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for GridPoint {
    type Output = GridPoint;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A physical array: a finite set of grid points inside a declared
/// `[0, lx] x [0, ly]` aperture.
///
/// Elements are kept sorted lexicographically by `(x, y)` and are free of
/// duplicates; both are enforced at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ElementSetRepr", into = "ElementSetRepr")]
pub struct ElementSet {
    lx: i64,
    ly: i64,
    elements: Vec<GridPoint>,
}

/// Wire representation: `{"lx": .., "ly": .., "elements": [[x, y], ..]}`.
#[derive(Serialize, Deserialize)]
struct ElementSetRepr {
    lx: i64,
    ly: i64,
    elements: Vec<GridPoint>,
}

impl TryFrom<ElementSetRepr> for ElementSet {
    type Error = Error;
    fn try_from(r: ElementSetRepr) -> Result<Self> {
        ElementSet::new(r.elements, r.lx, r.ly)
    }
}

impl From<ElementSet> for ElementSetRepr {
    fn from(d: ElementSet) -> Self {
        Self {
            lx: d.lx,
            ly: d.ly,
            elements: d.elements,
        }
    }
}

impl ElementSet {
    /// Builds an element set, sorting the input and validating the
    /// invariants: at least one element, no duplicates, all elements inside
    /// the declared bounds.
    pub fn new(points: impl IntoIterator<Item = GridPoint>, lx: i64, ly: i64) -> Result<Self> {
        let mut elements: Vec<GridPoint> = points.into_iter().collect();
        elements.sort_unstable();
        if elements.is_empty() {
            return Err(Error::EmptyElementSet);
        }
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateElement { point: w[0] });
            }
        }
        for &p in &elements {
            if p.x < 0 || p.x > lx || p.y < 0 || p.y > ly {
                return Err(Error::ElementOutOfBounds { point: p, lx, ly });
            }
        }
        Ok(Self { lx, ly, elements })
    }

    pub fn lx(&self) -> i64 {
        self.lx
    }

    pub fn ly(&self) -> i64 {
        self.ly
    }

    /// Number of elements `N`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: N >= 1
    }

    /// Elements in lexicographic `(x, y)` order.
    pub fn elements(&self) -> &[GridPoint] {
        &self.elements
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        self.elements.binary_search(&p).is_ok()
    }

    /// A copy with one element removed. Errors if removal empties the set.
    pub fn without(&self, p: GridPoint) -> Result<Self> {
        let elements: Vec<GridPoint> = self
            .elements
            .iter()
            .copied()
            .filter(|&q| q != p)
            .collect();
        if elements.is_empty() {
            return Err(Error::EmptyElementSet);
        }
        Ok(Self {
            lx: self.lx,
            ly: self.ly,
            elements,
        })
    }

    /// Serializes to the canonical JSON form
    /// `{"lx": .., "ly": .., "elements": [[x, y], ..]}` with elements in
    /// lexicographic order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("element set serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::DomainViolation(format!("bad element set: {e}")))
    }
}

/// Which pairwise combination a co-array was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoArrayKind {
    Sum,
    Difference,
}

/// A co-array: map from virtual element position to its positive ordered-pair
/// multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoArray {
    kind: CoArrayKind,
    weights: BTreeMap<GridPoint, u64>,
}

impl CoArray {
    pub fn kind(&self) -> CoArrayKind {
        self.kind
    }

    /// Multiplicity at `p`; zero off the support.
    pub fn weight(&self, p: GridPoint) -> u64 {
        self.weights.get(&p).copied().unwrap_or(0)
    }

    /// Number of distinct points in the support.
    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Iterates `(point, multiplicity)` in lexicographic point order.
    pub fn iter(&self) -> impl Iterator<Item = (GridPoint, u64)> + '_ {
        self.weights.iter().map(|(&p, &w)| (p, w))
    }

    /// Sum of all multiplicities; equals `N^2` for either kind.
    pub fn total_multiplicity(&self) -> u64 {
        self.weights.values().sum()
    }

    /// CSV export: header plus `x,y,multiplicity` rows in lexicographic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,multiplicity\n");
        for (p, w) in self.iter() {
            out.push_str(&format!("{},{},{}\n", p.x, p.y, w));
        }
        out
    }
}

/// Sum co-array: multiplicity of `v` counts ordered pairs with `d_n + d_m = v`.
pub fn sum_coarray(d: &ElementSet) -> CoArray {
    let mut weights = BTreeMap::new();
    for &a in d.elements() {
        for &b in d.elements() {
            *weights.entry(a + b).or_insert(0u64) += 1;
        }
    }
    CoArray {
        kind: CoArrayKind::Sum,
        weights,
    }
}

/// Difference co-array: multiplicity of `v` counts ordered pairs with
/// `d_m - d_n = v`. The origin always carries multiplicity `N`.
pub fn difference_coarray(d: &ElementSet) -> CoArray {
    let mut weights = BTreeMap::new();
    for &a in d.elements() {
        for &b in d.elements() {
            *weights.entry(b - a).or_insert(0u64) += 1;
        }
    }
    CoArray {
        kind: CoArrayKind::Difference,
        weights,
    }
}

/// True iff the co-array support fills its full bounding rectangle:
/// `[0, 2lx] x [0, 2ly]` for a sum co-array, `[-lx, lx] x [-ly, ly]` for a
/// difference co-array.
pub fn is_contiguous(c: &CoArray, lx: i64, ly: i64) -> bool {
    if lx < 0 || ly < 0 {
        return false;
    }
    let (x_range, y_range) = match c.kind() {
        CoArrayKind::Sum => ((0, 2 * lx), (0, 2 * ly)),
        CoArrayKind::Difference => ((-lx, lx), (-ly, ly)),
    };
    let rect = ((x_range.1 - x_range.0 + 1) * (y_range.1 - y_range.0 + 1)) as usize;
    if c.support_len() != rect {
        return false;
    }
    c.iter().all(|(p, _)| {
        p.x >= x_range.0 && p.x <= x_range.1 && p.y >= y_range.0 && p.y <= y_range.1
    })
}

/// True iff the set is point symmetric about the aperture center: for every
/// element `(x, y)`, `(lx - x, ly - y)` is also an element.
pub fn is_mirror_symmetric(d: &ElementSet) -> bool {
    d.elements()
        .iter()
        .all(|&p| d.contains(p.mirrored(d.lx(), d.ly())))
}

/// Verifies that the difference multiplicity equals the sum multiplicity up
/// to the aperture shift: `v_diff(v - (lx, ly)) = v_sum(v)` for every `v` in
/// `[0, 2lx] x [0, 2ly]`.
///
/// Requires a mirror-symmetric set; returns the first violating point
/// otherwise (which signals either a precondition breach or a bug).
pub fn multiplicity_shift_equal(d: &ElementSet) -> Result<()> {
    if !is_mirror_symmetric(d) {
        return Err(Error::NotMirrorSymmetric);
    }
    let shift = GridPoint::new(d.lx(), d.ly());
    let sum = sum_coarray(d);
    let diff = difference_coarray(d);
    for x in 0..=2 * d.lx() {
        for y in 0..=2 * d.ly() {
            let v = GridPoint::new(x, y);
            let s = sum.weight(v);
            let q = diff.weight(v - shift);
            if s != q {
                return Err(Error::MultiplicityShiftMismatch {
                    point: v,
                    sum_mult: s,
                    diff_mult: q,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[(i64, i64)], lx: i64, ly: i64) -> ElementSet {
        ElementSet::new(points.iter().map(|&(x, y)| GridPoint::new(x, y)), lx, ly).unwrap()
    }

    fn filled(lx: i64, ly: i64) -> ElementSet {
        let pts = (0..=lx).flat_map(|x| (0..=ly).map(move |y| GridPoint::new(x, y)));
        ElementSet::new(pts, lx, ly).unwrap()
    }

    #[test]
    fn two_element_sum_coarray_is_binomial() {
        let d = set(&[(0, 0), (1, 0)], 1, 0);
        let c = sum_coarray(&d);
        assert_eq!(c.support_len(), 3);
        assert_eq!(c.weight(GridPoint::new(0, 0)), 1);
        assert_eq!(c.weight(GridPoint::new(1, 0)), 2);
        assert_eq!(c.weight(GridPoint::new(2, 0)), 1);
    }

    #[test]
    fn single_element_sum_doubles_position() {
        let d = set(&[(3, 2)], 3, 2);
        let c = sum_coarray(&d);
        assert_eq!(c.support_len(), 1);
        assert_eq!(c.weight(GridPoint::new(6, 4)), 1);
    }

    #[test]
    fn two_element_difference_coarray() {
        let d = set(&[(0, 0), (1, 0)], 1, 0);
        let c = difference_coarray(&d);
        assert_eq!(c.weight(GridPoint::new(-1, 0)), 1);
        assert_eq!(c.weight(GridPoint::new(0, 0)), 2);
        assert_eq!(c.weight(GridPoint::new(1, 0)), 1);
    }

    #[test]
    fn filled_grid_sum_coarray_is_contiguous() {
        let d = filled(5, 7);
        assert!(is_contiguous(&sum_coarray(&d), 5, 7));
        assert!(is_contiguous(&difference_coarray(&d), 5, 7));
    }

    #[test]
    fn sparse_diagonal_pair_is_not_contiguous() {
        let d = set(&[(0, 0), (8, 8)], 8, 8);
        assert!(!is_contiguous(&sum_coarray(&d), 8, 8));
    }

    #[test]
    fn mirror_symmetry_examples() {
        assert!(is_mirror_symmetric(&set(&[(0, 0), (1, 0), (2, 0)], 2, 0)));
        assert!(!is_mirror_symmetric(&set(&[(0, 0), (1, 0)], 2, 0)));
        assert!(is_mirror_symmetric(&filled(3, 3)));
    }

    #[test]
    fn shift_equality_holds_for_filled_grid() {
        assert!(multiplicity_shift_equal(&filled(3, 3)).is_ok());
    }

    #[test]
    fn shift_equality_rejects_asymmetric_set() {
        let d = set(&[(0, 0), (1, 0)], 2, 0);
        assert_eq!(
            multiplicity_shift_equal(&d),
            Err(Error::NotMirrorSymmetric)
        );
    }

    #[test]
    fn element_set_rejects_duplicates_and_out_of_bounds() {
        let dup = ElementSet::new(
            [GridPoint::new(0, 0), GridPoint::new(0, 0)],
            1,
            1,
        );
        assert!(matches!(dup, Err(Error::DuplicateElement { .. })));
        let oob = ElementSet::new([GridPoint::new(2, 0)], 1, 1);
        assert!(matches!(oob, Err(Error::ElementOutOfBounds { .. })));
        assert_eq!(ElementSet::new([], 1, 1), Err(Error::EmptyElementSet));
    }

    #[test]
    fn json_round_trip_and_exact_format() {
        let d = set(&[(1, 0), (0, 0), (0, 1)], 1, 1);
        let json = d.to_json();
        assert_eq!(json, r#"{"lx":1,"ly":1,"elements":[[0,0],[0,1],[1,0]]}"#);
        assert_eq!(ElementSet::from_json(&json).unwrap(), d);
    }

    #[test]
    fn csv_export_is_sorted() {
        let d = set(&[(0, 0), (1, 0)], 1, 0);
        let csv = sum_coarray(&d).to_csv();
        assert_eq!(csv, "x,y,multiplicity\n0,0,1\n1,0,2\n2,0,1\n");
    }

    // Naive dense oracle: count ordered pairs into a dense grid, independent
    // of the map-based production path.
    fn dense_counts(d: &ElementSet, sum: bool) -> Vec<((i64, i64), u64)> {
        let (lx, ly) = (d.lx(), d.ly());
        let (w, h, ox, oy) = if sum {
            ((2 * lx + 1) as usize, (2 * ly + 1) as usize, 0, 0)
        } else {
            ((2 * lx + 1) as usize, (2 * ly + 1) as usize, lx, ly)
        };
        let mut grid = vec![0u64; w * h];
        for &a in d.elements() {
            for &b in d.elements() {
                let p = if sum { a + b } else { b - a };
                grid[((p.x + ox) as usize) * h + ((p.y + oy) as usize)] += 1;
            }
        }
        let mut out = Vec::new();
        for ix in 0..w {
            for iy in 0..h {
                if grid[ix * h + iy] > 0 {
                    out.push(((ix as i64 - ox, iy as i64 - oy), grid[ix * h + iy]));
                }
            }
        }
        out
    }

    fn assert_matches_oracle(d: &ElementSet) {
        let sum = sum_coarray(d);
        let got: Vec<_> = sum.iter().map(|(p, w)| ((p.x, p.y), w)).collect();
        assert_eq!(got, dense_counts(d, true));
        let diff = difference_coarray(d);
        let got: Vec<_> = diff.iter().map(|(p, w)| ((p.x, p.y), w)).collect();
        assert_eq!(got, dense_counts(d, false));
    }

    proptest::proptest! {
        #[test]
        fn coarray_mass_and_symmetry(raw in proptest::collection::btree_set((0i64..6, 0i64..6), 1..=12)) {
            let pts: Vec<GridPoint> = raw.iter().map(|&(x, y)| GridPoint::new(x, y)).collect();
            let d = ElementSet::new(pts, 5, 5).unwrap();
            let n = d.len() as u64;
            let sum = sum_coarray(&d);
            let diff = difference_coarray(&d);
            proptest::prop_assert_eq!(sum.total_multiplicity(), n * n);
            proptest::prop_assert_eq!(diff.total_multiplicity(), n * n);
            proptest::prop_assert_eq!(diff.weight(GridPoint::new(0, 0)), n);
            for (p, w) in diff.iter() {
                proptest::prop_assert_eq!(diff.weight(-p), w);
            }
            assert_matches_oracle(&d);
        }

        #[test]
        fn symmetric_sets_satisfy_shift_equality(
            raw in proptest::collection::btree_set((0i64..7, 0i64..5), 1..=10),
        ) {
            let (lx, ly) = (6, 4);
            // close the set under point reflection to force mirror symmetry
            let mut pts: std::collections::BTreeSet<GridPoint> =
                raw.iter().map(|&(x, y)| GridPoint::new(x, y)).collect();
            let mirrored: Vec<GridPoint> = pts.iter().map(|p| p.mirrored(lx, ly)).collect();
            pts.extend(mirrored);
            let d = ElementSet::new(pts, lx, ly).unwrap();
            proptest::prop_assert!(is_mirror_symmetric(&d));
            proptest::prop_assert!(multiplicity_shift_equal(&d).is_ok());
            // contiguity equivalence for symmetric sets
            let sum_ok = is_contiguous(&sum_coarray(&d), lx, ly);
            let diff_ok = is_contiguous(&difference_coarray(&d), lx, ly);
            proptest::prop_assert_eq!(sum_ok, diff_ok);
        }
    }
}
