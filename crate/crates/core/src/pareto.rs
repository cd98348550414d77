//! Exact 2-D Pareto geometry: dominance, hypervolume, (negative) hypervolume
//! improvement and the cell decomposition of the objective space.
//!
//! Both objectives are minimized. A front is kept sorted by ascending first
//! objective, which makes the hypervolume a single staircase sweep and lets
//! cell constants be read off prefix sums.

use thiserror::Error;

/// An objective vector (f1, f2). Coordinates are finite except for the
/// sentinel points used by [`AugmentedFront`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub y1: f64,
    pub y2: f64,
}

impl Point2 {
    pub fn new(y1: f64, y2: f64) -> Self {
        Self { y1, y2 }
    }

    pub fn is_finite(&self) -> bool {
        self.y1.is_finite() && self.y2.is_finite()
    }
}

/// `a` weakly dominates `b`: no worse in either objective.
pub fn weakly_dominates(a: Point2, b: Point2) -> bool {
    a.y1 <= b.y1 && a.y2 <= b.y2
}

/// Strict Pareto dominance: weakly dominates and differs somewhere.
pub fn dominates(a: Point2, b: Point2) -> bool {
    weakly_dominates(a, b) && (a.y1 != b.y1 || a.y2 != b.y2)
}

/// Minimal elements of `points` under the Pareto order, exact duplicates
/// collapsed, sorted by ascending `y1`.
pub fn non_dominated_filter(points: &[Point2]) -> Vec<Point2> {
    let mut sorted: Vec<Point2> = points.to_vec();
    // Ascending y1, ties broken by ascending y2 so the first of a y1-tie is
    // the only survivor.
    sorted.sort_by(|a, b| (a.y1, a.y2).partial_cmp(&(b.y1, b.y2)).unwrap());
    let mut front: Vec<Point2> = Vec::new();
    for p in sorted {
        match front.last() {
            Some(last) if last.y2 <= p.y2 => {} // dominated (or duplicate) by the running best
            _ => front.push(p),
        }
    }
    front
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("coordinate of point {index} is not finite")]
    NonFinite { index: usize },
    #[error("point {index} does not strictly dominate the reference point")]
    NotDominatingReference { index: usize },
    #[error("points {first} and {second} are not strictly mutually non-dominated")]
    NotStrictlyOrdered { first: usize, second: usize },
    #[error("reference point is not finite")]
    NonFiniteReference,
}

/// A strictly mutually non-dominated set of objective points together with
/// the reference point bounding the measured region.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront2D {
    points: Vec<Point2>,
    ref_point: Point2,
}

impl ParetoFront2D {
    /// Validating constructor. `points` may arrive in any order but must be
    /// strictly mutually non-dominated and must strictly dominate `ref_point`
    /// componentwise.
    pub fn new(mut points: Vec<Point2>, ref_point: Point2) -> Result<Self, FrontError> {
        if !ref_point.is_finite() {
            return Err(FrontError::NonFiniteReference);
        }
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(FrontError::NonFinite { index });
            }
            if !(p.y1 < ref_point.y1 && p.y2 < ref_point.y2) {
                return Err(FrontError::NotDominatingReference { index });
            }
        }
        points.sort_by(|a, b| a.y1.partial_cmp(&b.y1).unwrap());
        for k in 1..points.len() {
            if points[k - 1].y1 >= points[k].y1 || points[k - 1].y2 <= points[k].y2 {
                return Err(FrontError::NotStrictlyOrdered {
                    first: k - 1,
                    second: k,
                });
            }
        }
        Ok(Self { points, ref_point })
    }

    /// Builds the front of an arbitrary observation set: drops points that do
    /// not strictly dominate the reference point, then keeps the
    /// non-dominated subset.
    pub fn from_observations(points: &[Point2], ref_point: Point2) -> Result<Self, FrontError> {
        if !ref_point.is_finite() {
            return Err(FrontError::NonFiniteReference);
        }
        let inside: Vec<Point2> = points
            .iter()
            .copied()
            .filter(|p| p.is_finite() && p.y1 < ref_point.y1 && p.y2 < ref_point.y2)
            .collect();
        Self::new(non_dominated_filter(&inside), ref_point)
    }

    pub fn empty(ref_point: Point2) -> Result<Self, FrontError> {
        Self::new(Vec::new(), ref_point)
    }

    /// Points sorted by ascending `y1` (hence strictly descending `y2`).
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn ref_point(&self) -> Point2 {
        self.ref_point
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Hypervolume of the front w.r.t. its reference point: one staircase
    /// sweep over the sorted points.
    pub fn hypervolume(&self) -> f64 {
        staircase_area(&self.points, self.ref_point)
    }

    /// Hypervolume improvement of `y`: `HV(P ∪ {y}) − HV(P)`. Zero whenever
    /// `y` is weakly dominated or does not strictly dominate the reference
    /// point.
    pub fn hvi_plus(&self, y: Point2) -> f64 {
        let r = self.ref_point;
        if !(y.y1 < r.y1 && y.y2 < r.y2) {
            return 0.0;
        }
        // Insert at the sorted position and sweep; the sweep skips dominated
        // points so no explicit filtering is needed.
        let pos = self.points.partition_point(|p| p.y1 < y.y1);
        let mut augmented = Vec::with_capacity(self.points.len() + 1);
        augmented.extend_from_slice(&self.points[..pos]);
        augmented.push(y);
        augmented.extend_from_slice(&self.points[pos..]);
        staircase_area(&augmented, r) - self.hypervolume()
    }

    /// Negative hypervolume improvement of a dominated point: minus the area
    /// between the front staircase and `y`, i.e. the measure of the region
    /// that weakly dominates `y` yet is already dominated by the augmented
    /// front. Points beyond the reference point are clipped onto it first so
    /// the measured region always stays inside the reference box.
    pub fn hvi_minus(&self, y: Point2) -> Result<f64, DominanceError> {
        if !self.is_weakly_dominated(y) {
            return Err(DominanceError::NotDominated);
        }
        Ok(self.hvi_minus_unchecked(y))
    }

    /// True iff some point of the augmented front weakly dominates `y`;
    /// includes the staircase boundary itself.
    pub fn is_weakly_dominated(&self, y: Point2) -> bool {
        let r = self.ref_point;
        if y.y1 >= r.y1 || y.y2 >= r.y2 {
            return true; // sentinel points cover the region beyond the box
        }
        let k = self.points.partition_point(|p| p.y1 <= y.y1);
        k > 0 && self.points[k - 1].y2 <= y.y2
    }

    fn hvi_minus_unchecked(&self, y: Point2) -> f64 {
        let r = self.ref_point;
        let clipped = Point2::new(y.y1.min(r.y1), y.y2.min(r.y2));
        // Region = union of [p, clipped] over front points p that weakly
        // dominate the clipped point; its area is a staircase sweep with the
        // clipped point as reference.
        let covering: Vec<Point2> = self
            .points
            .iter()
            .copied()
            .filter(|p| weakly_dominates(*p, clipped))
            .collect();
        -staircase_area(&covering, clipped)
    }

    /// True iff some point of the augmented front strictly dominates `y`.
    pub fn is_strictly_dominated(&self, y: Point2) -> bool {
        let r = self.ref_point;
        // The sentinels (r1, −∞) and (−∞, r2) dominate exactly the points on
        // or beyond the reference box walls.
        if y.y1 > r.y1 || y.y2 > r.y2 {
            return true;
        }
        if (y.y1 == r.y1 && y.y2.is_finite()) || (y.y2 == r.y2 && y.y1.is_finite()) {
            return true;
        }
        // Among points with p1 <= y1 the last one has the smallest p2.
        let k = self.points.partition_point(|p| p.y1 <= y.y1);
        k > 0 && {
            let p = self.points[k - 1];
            p.y2 <= y.y2 && (p.y1 != y.y1 || p.y2 != y.y2)
        }
    }

    /// Generalized hypervolume improvement: `hvi_plus` on the non-dominated
    /// region, `hvi_minus` on the dominated region; boundary points take the
    /// non-dominated branch (both branches vanish there).
    pub fn generalized_hvi(&self, y: Point2) -> f64 {
        if self.is_strictly_dominated(y) {
            self.hvi_minus_unchecked(y)
        } else {
            self.hvi_plus(y)
        }
    }

    /// The front plus the sentinel points `(−∞, r2)` and `(r1, −∞)`, indexed
    /// by ascending first coordinate.
    pub fn augmented(&self) -> AugmentedFront {
        let n = self.points.len();
        let mut q = Vec::with_capacity(n + 2);
        q.push(Point2::new(f64::NEG_INFINITY, self.ref_point.y2));
        q.extend_from_slice(&self.points);
        q.push(Point2::new(self.ref_point.y1, f64::NEG_INFINITY));
        AugmentedFront { q }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DominanceError {
    #[error("point lies in the non-dominated region")]
    NotDominated,
}

/// Area of the staircase spanned by `points` (any order, dominated entries
/// allowed) inside the box bounded by `r`. Points not strictly inside the box
/// contribute nothing.
fn staircase_area(points: &[Point2], r: Point2) -> f64 {
    let mut sorted: Vec<Point2> = points
        .iter()
        .copied()
        .filter(|p| p.y1 <= r.y1 && p.y2 <= r.y2)
        .collect();
    sorted.sort_by(|a, b| (a.y1, a.y2).partial_cmp(&(b.y1, b.y2)).unwrap());
    let mut area = 0.0;
    let mut last_y2 = r.y2;
    for p in sorted {
        if p.y2 < last_y2 {
            area += (r.y1 - p.y1) * (last_y2 - p.y2);
            last_y2 = p.y2;
        }
    }
    area
}

/// Augmented front `q^(0) .. q^(n+1)` with `q1` strictly ascending under the
/// convention that `−∞` precedes every finite value.
#[derive(Debug, Clone)]
pub struct AugmentedFront {
    q: Vec<Point2>,
}

impl AugmentedFront {
    pub fn n(&self) -> usize {
        self.q.len() - 2
    }

    pub fn q(&self, k: usize) -> Point2 {
        self.q[k]
    }

    pub fn points(&self) -> &[Point2] {
        &self.q
    }
}

/// Which side of the augmented front a cell lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// `i + j <= n`: every point of the cell improves the front.
    NonDominated,
    /// `i + j > n`: every point of the cell is dominated.
    Dominated,
}

/// One axis-aligned box of the `(n+1) x (n+1)` decomposition of `[−∞, r]`.
/// `lower` may carry `−∞` sentinels.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub lower: Point2,
    pub upper: Point2,
    pub kind: CellKind,
}

/// Cell decomposition of a front plus the prefix sums needed to evaluate
/// hypervolume improvements at cell corners in O(1).
#[derive(Debug, Clone)]
pub struct CellGrid {
    n: usize,
    /// First coordinates of the augmented front, `q1[0] = −∞`, `q1[n+1] = r1`.
    q1: Vec<f64>,
    /// Second coordinates, `q2[0] = r2`, `q2[n+1] = −∞` (strictly descending).
    q2: Vec<f64>,
    /// `s[k]` = hypervolume of the first k front points w.r.t. the reference.
    s: Vec<f64>,
    /// `w[k]` = prefix sum of `q1(k) * (q2(k−1) − q2(k))`.
    w: Vec<f64>,
    hypervolume: f64,
    ref_point: Point2,
}

impl CellGrid {
    pub fn new(front: &ParetoFront2D) -> Self {
        let n = front.len();
        let r = front.ref_point();
        let mut q1 = Vec::with_capacity(n + 2);
        let mut q2 = Vec::with_capacity(n + 2);
        q1.push(f64::NEG_INFINITY);
        q2.push(r.y2);
        for p in front.points() {
            q1.push(p.y1);
            q2.push(p.y2);
        }
        q1.push(r.y1);
        q2.push(f64::NEG_INFINITY);

        let mut s = vec![0.0; n + 1];
        let mut w = vec![0.0; n + 1];
        for k in 1..=n {
            let step = q2[k - 1] - q2[k];
            s[k] = s[k - 1] + (r.y1 - q1[k]) * step;
            w[k] = w[k - 1] + q1[k] * step;
        }
        Self {
            n,
            q1,
            q2,
            hypervolume: s[n],
            s,
            w,
            ref_point: r,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ref_point(&self) -> Point2 {
        self.ref_point
    }

    pub fn hypervolume(&self) -> f64 {
        self.hypervolume
    }

    pub fn q1(&self, k: usize) -> f64 {
        self.q1[k]
    }

    pub fn q2(&self, k: usize) -> f64 {
        self.q2[k]
    }

    pub fn kind(&self, i: usize, j: usize) -> CellKind {
        if i + j <= self.n {
            CellKind::NonDominated
        } else {
            CellKind::Dominated
        }
    }

    /// Cell bounds: `l = (q1(i), q2(n+1−j))`, `u = (q1(i+1), q2(n−j))`.
    pub fn cell(&self, i: usize, j: usize) -> Cell {
        let n = self.n;
        assert!(i <= n && j <= n, "cell index out of range");
        Cell {
            i,
            j,
            lower: Point2::new(self.q1[i], self.q2[n + 1 - j]),
            upper: Point2::new(self.q1[i + 1], self.q2[n - j]),
            kind: self.kind(i, j),
        }
    }

    /// All `(n+1)^2` cells in row-major order.
    pub fn cells(&self) -> Vec<Cell> {
        let n = self.n;
        let mut out = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                out.push(self.cell(i, j));
            }
        }
        out
    }

    /// `Δ+` at the grid corner `(q1(a), q2(b))` with `a ∈ [1..n+1]`,
    /// `b ∈ [0..n]` and `a <= b + 1` (corners on the non-dominated side).
    pub fn hvi_plus_at_corner(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a >= 1 && a <= self.n + 1 && b <= self.n && a <= b + 1);
        if a == b + 1 {
            return 0.0; // staircase corner
        }
        self.s[a - 1] - self.s[b] + (self.ref_point.y1 - self.q1[a]) * (self.q2[a - 1] - self.q2[b])
    }

    /// `|Δ−|` at the grid corner `(q1(a), q2(b))` on the dominated side:
    /// `a ∈ [1..n+1]`, `b ∈ [0..n]`, `a >= b`. The corner is weakly
    /// dominated, so the area between staircase and corner is exact.
    pub fn hvi_minus_abs_at_corner(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a >= 1 && a <= self.n + 1 && b <= self.n && a >= b);
        if a <= b + 1 {
            return 0.0; // front point (a == b) or staircase corner (a == b+1)
        }
        // Front points dominated-by-corner are indices k in [b+1 .. a−1].
        let lo = b + 1;
        let hi = a - 1;
        let l1 = self.q1[a];
        let l2 = self.q2[b];
        let first = (l1 - self.q1[lo]) * (l2 - self.q2[lo]);
        let tail = l1 * (self.q2[lo] - self.q2[hi]) - (self.w[hi] - self.w[lo]);
        first + tail
    }
}

/// Full cell decomposition of the reference box, per the grid point formula.
pub fn decompose_cells(front: &ParetoFront2D) -> Vec<Cell> {
    CellGrid::new(front).cells()
}
