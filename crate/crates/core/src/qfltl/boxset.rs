//! Finite unions of axis-aligned boxes in variable space.
//!
//! Satisfaction domains are built from half-spaces by intersection, union
//! and complement, so every domain is representable exactly as a box union
//! with open or closed bounds per coordinate. Distances and printing use the
//! closure of the set; membership respects the exact bounds.

use std::fmt;

use super::ast::CmpOp;

/// One coordinate's admissible range. Infinite bounds are stored as open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordRange {
    lo: f64,
    hi: f64,
    lo_open: bool,
    hi_open: bool,
}

impl CoordRange {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> CoordRange {
        CoordRange {
            lo,
            hi,
            lo_open: lo_open || lo == f64::NEG_INFINITY,
            hi_open: hi_open || hi == f64::INFINITY,
        }
    }

    pub fn full() -> CoordRange {
        CoordRange::new(f64::NEG_INFINITY, f64::INFINITY, true, true)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    fn contains(&self, v: f64) -> bool {
        (self.lo < v || (self.lo == v && !self.lo_open))
            && (v < self.hi || (v == self.hi && !self.hi_open))
    }

    /// True when self covers all of other.
    fn subsumes(&self, other: &CoordRange) -> bool {
        let lo_ok = self.lo < other.lo || (self.lo == other.lo && (!self.lo_open || other.lo_open));
        let hi_ok = other.hi < self.hi || (other.hi == self.hi && (!self.hi_open || other.hi_open));
        lo_ok && hi_ok
    }

    fn intersect(&self, other: &CoordRange) -> Option<CoordRange> {
        let (lo, lo_open) = if self.lo > other.lo {
            (self.lo, self.lo_open)
        } else if other.lo > self.lo {
            (other.lo, other.lo_open)
        } else {
            (self.lo, self.lo_open || other.lo_open)
        };
        let (hi, hi_open) = if self.hi < other.hi {
            (self.hi, self.hi_open)
        } else if other.hi < self.hi {
            (other.hi, other.hi_open)
        } else {
            (self.hi, self.hi_open || other.hi_open)
        };
        let r = CoordRange { lo, hi, lo_open, hi_open };
        (!r.is_empty()).then_some(r)
    }

    /// Union of two ranges when it is again a single interval (they overlap
    /// or touch at a point at least one of them includes).
    fn try_union(&self, other: &CoordRange) -> Option<CoordRange> {
        let (a, b) = if self.lo < other.lo || (self.lo == other.lo && !self.lo_open) {
            (self, other)
        } else {
            (other, self)
        };
        let connected = b.lo < a.hi || (b.lo == a.hi && (!b.lo_open || !a.hi_open));
        if !connected {
            return None;
        }
        let (lo, lo_open) = (a.lo, a.lo_open && (a.lo != b.lo || b.lo_open));
        let (hi, hi_open) = if a.hi > b.hi {
            (a.hi, a.hi_open)
        } else if b.hi > a.hi {
            (b.hi, b.hi_open)
        } else {
            (a.hi, a.hi_open && b.hi_open)
        };
        Some(CoordRange { lo, hi, lo_open, hi_open })
    }

    /// Squared distance from `v` to the closure of the range.
    fn dist2(&self, v: f64) -> f64 {
        let d = (self.lo - v).max(v - self.hi).max(0.0);
        d * d
    }
}

/// Product of coordinate ranges; the region is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    ranges: Vec<CoordRange>,
}

impl BoxRegion {
    pub fn ranges(&self) -> &[CoordRange] {
        &self.ranges
    }

    fn full(dim: usize) -> BoxRegion {
        BoxRegion { ranges: vec![CoordRange::full(); dim] }
    }

    fn contains(&self, point: &[f64]) -> bool {
        self.ranges.iter().zip(point).all(|(r, v)| r.contains(*v))
    }

    fn subsumes(&self, other: &BoxRegion) -> bool {
        self.ranges.iter().zip(&other.ranges).all(|(a, b)| a.subsumes(b))
    }

    fn intersect(&self, other: &BoxRegion) -> Option<BoxRegion> {
        let mut ranges = Vec::with_capacity(self.ranges.len());
        for (a, b) in self.ranges.iter().zip(&other.ranges) {
            ranges.push(a.intersect(b)?);
        }
        Some(BoxRegion { ranges })
    }

    fn dist2(&self, point: &[f64]) -> f64 {
        self.ranges.iter().zip(point).map(|(r, v)| r.dist2(*v)).sum()
    }

    /// Merges two boxes into one when they agree on every coordinate except
    /// at most one whose ranges join into a single interval.
    fn try_union(&self, other: &BoxRegion) -> Option<BoxRegion> {
        let mut differ: Option<usize> = None;
        for (k, (a, b)) in self.ranges.iter().zip(&other.ranges).enumerate() {
            if a != b {
                if differ.is_some() {
                    return None;
                }
                differ = Some(k);
            }
        }
        let Some(k) = differ else {
            return Some(self.clone());
        };
        let joined = self.ranges[k].try_union(&other.ranges[k])?;
        let mut ranges = self.ranges.clone();
        ranges[k] = joined;
        Some(BoxRegion { ranges })
    }
}

fn cmp_f64(a: f64, b: f64) -> std::cmp::Ordering {
    a.total_cmp(&b)
}

fn cmp_boxes(a: &BoxRegion, b: &BoxRegion) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    for (x, y) in a.ranges.iter().zip(&b.ranges) {
        let ord = cmp_f64(x.lo, y.lo)
            .then_with(|| x.lo_open.cmp(&y.lo_open))
            .then_with(|| cmp_f64(x.hi, y.hi))
            .then_with(|| x.hi_open.cmp(&y.hi_open));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Finite union of boxes in `dim`-dimensional variable space, kept in a
/// normalized form: no empty boxes, no box subsumed by another, mergeable
/// neighbours merged, boxes sorted canonically.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    dim: usize,
    boxes: Vec<BoxRegion>,
}

impl BoxSet {
    pub fn empty(dim: usize) -> BoxSet {
        BoxSet { dim, boxes: Vec::new() }
    }

    /// All of variable space. For `dim = 0` this is the one-point space.
    pub fn universe(dim: usize) -> BoxSet {
        BoxSet { dim, boxes: vec![BoxRegion::full(dim)] }
    }

    /// Solution set of `x_coord op value`.
    pub fn halfspace(dim: usize, coord: usize, op: CmpOp, value: f64) -> BoxSet {
        assert!(coord < dim, "coordinate {coord} out of range for dimension {dim}");
        let range = match op {
            CmpOp::Lt => CoordRange::new(f64::NEG_INFINITY, value, true, true),
            CmpOp::Le => CoordRange::new(f64::NEG_INFINITY, value, true, false),
            CmpOp::Gt => CoordRange::new(value, f64::INFINITY, true, true),
            CmpOp::Ge => CoordRange::new(value, f64::INFINITY, false, true),
        };
        if range.is_empty() {
            return BoxSet::empty(dim);
        }
        let mut region = BoxRegion::full(dim);
        region.ranges[coord] = range;
        BoxSet { dim, boxes: vec![region] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        assert_eq!(point.len(), self.dim);
        self.boxes.iter().any(|b| b.contains(point))
    }

    /// Euclidean distance from `point` to the closure of the set;
    /// `f64::INFINITY` for the empty set.
    pub fn distance(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dim);
        self.boxes
            .iter()
            .map(|b| b.dist2(point))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    pub fn union(&self, other: &BoxSet) -> BoxSet {
        assert_eq!(self.dim, other.dim);
        let mut boxes = self.boxes.clone();
        boxes.extend(other.boxes.iter().cloned());
        BoxSet::normalized(self.dim, boxes)
    }

    pub fn intersect(&self, other: &BoxSet) -> BoxSet {
        assert_eq!(self.dim, other.dim);
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                if let Some(c) = a.intersect(b) {
                    boxes.push(c);
                }
            }
        }
        BoxSet::normalized(self.dim, boxes)
    }

    pub fn complement(&self) -> BoxSet {
        let mut result = BoxSet::universe(self.dim);
        for b in &self.boxes {
            let pieces = BoxSet::normalized(self.dim, complement_of_box(self.dim, b));
            result = result.intersect(&pieces);
            if result.is_empty() {
                break;
            }
        }
        result
    }

    fn normalized(dim: usize, mut boxes: Vec<BoxRegion>) -> BoxSet {
        boxes.retain(|b| b.ranges.iter().all(|r| !r.is_empty()));
        loop {
            // Subsumption prune down to an antichain.
            let mut kept: Vec<BoxRegion> = Vec::with_capacity(boxes.len());
            'next: for b in boxes.drain(..) {
                for k in kept.iter() {
                    if k.subsumes(&b) {
                        continue 'next;
                    }
                }
                kept.retain(|k| !b.subsumes(k));
                kept.push(b);
            }
            boxes = kept;

            let mut merged_any = false;
            'merge: for i in 0..boxes.len() {
                for j in (i + 1)..boxes.len() {
                    if let Some(m) = boxes[i].try_union(&boxes[j]) {
                        boxes.swap_remove(j);
                        boxes[i] = m;
                        merged_any = true;
                        break 'merge;
                    }
                }
            }
            if !merged_any {
                break;
            }
        }
        boxes.sort_by(cmp_boxes);
        BoxSet { dim, boxes }
    }
}

/// Disjoint decomposition of the complement of one box: for each coordinate
/// `k`, a slab below and a slab above the box's range, restricted to the
/// box's ranges on coordinates before `k`. At most `2 * dim` boxes.
fn complement_of_box(dim: usize, b: &BoxRegion) -> Vec<BoxRegion> {
    let mut pieces = Vec::new();
    for k in 0..dim {
        let r = b.ranges[k];
        let below = CoordRange::new(f64::NEG_INFINITY, r.lo, true, !r.lo_open);
        let above = CoordRange::new(r.hi, f64::INFINITY, !r.hi_open, true);
        for side in [below, above] {
            if side.is_empty() {
                continue;
            }
            let mut ranges = Vec::with_capacity(dim);
            ranges.extend_from_slice(&b.ranges[..k]);
            ranges.push(side);
            ranges.extend(std::iter::repeat_n(CoordRange::full(), dim - k - 1));
            pieces.push(BoxRegion { ranges });
        }
    }
    pieces
}

// Sets print through their closure: strict bounds render as `<=` / `>=`.
// A one-box set prints as `{c1 & c2}`, unions parenthesize each box.
impl fmt::Display for BoxSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return write!(f, "{{false}}");
        }
        let fmt_box = |b: &BoxRegion| -> String {
            let mut parts = Vec::new();
            for (k, r) in b.ranges.iter().enumerate() {
                if r.lo != f64::NEG_INFINITY {
                    parts.push(format!("y{} >= {}", k + 1, r.lo));
                }
                if r.hi != f64::INFINITY {
                    parts.push(format!("y{} <= {}", k + 1, r.hi));
                }
            }
            if parts.is_empty() {
                "true".to_string()
            } else {
                parts.join(" & ")
            }
        };
        if self.boxes.len() == 1 {
            return write!(f, "{{{}}}", fmt_box(&self.boxes[0]));
        }
        let rendered: Vec<String> =
            self.boxes.iter().map(|b| format!("({})", fmt_box(b))).collect();
        write!(f, "{{{}}}", rendered.join(" | "))
    }
}
