//! Finite unions of axis-aligned half-open boxes in ℝ^D, kept in a canonical
//! form so that **structural equality is set equality**.
//!
//! Every set manipulated by the engine — cube levels, cylinder bases, filling
//! parts — is a [`BoxSet`].  All coordinates are exact scalars, so union,
//! intersection, difference, translation, and volume are computed without any
//! rounding, and two `BoxSet`s represent the same point set *iff* they compare
//! equal with `==`.
//!
//! # Canonical form
//!
//! The canonicalizer runs a recursive coordinate sweep: sort and split the
//! boxes along the first axis at every endpoint, recurse on the remaining
//! axes inside each slab, then greedily merge adjacent slabs (last axis back
//! to the first) whose cross-sections are identical.  The boundaries that
//! survive are exactly the points where the cross-section changes, which is a
//! property of the point set alone — hence uniqueness of the representation.
//! Boxes come out pairwise disjoint and lexicographically ordered.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Errors from box-set construction and binary operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoxError {
    /// Mixed dimensions in a binary operation or constructor.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    /// A box corner pair with `lo_i ≥ hi_i`; boxes must be nonempty.
    #[error("empty box: lo must be strictly below hi on every axis")]
    EmptyBox,
    /// Dimension zero is not a thing here.
    #[error("dimension must be at least 1")]
    ZeroDim,
}

/// A nonempty half-open axis-aligned box `∏_i [lo_i, hi_i)` with exact
/// corners, `lo_i < hi_i` on every axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Aabb<S> {
    lo: Vec<S>,
    hi: Vec<S>,
}

impl<S: Scalar> Aabb<S> {
    /// Build a box from its corner vectors.
    pub fn new(lo: Vec<S>, hi: Vec<S>) -> Result<Self, BoxError> {
        if lo.is_empty() {
            return Err(BoxError::ZeroDim);
        }
        if lo.len() != hi.len() {
            return Err(BoxError::DimMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(BoxError::EmptyBox);
        }
        Ok(Aabb { lo, hi })
    }

    /// The 1-dimensional box `[lo, hi)`.
    pub fn interval(lo: S, hi: S) -> Result<Self, BoxError> {
        Aabb::new(vec![lo], vec![hi])
    }

    /// The cube `[0, h)^dim`.
    pub fn cube(dim: usize, h: &S) -> Result<Self, BoxError> {
        if h <= &S::zero() {
            return Err(BoxError::EmptyBox);
        }
        Aabb::new(vec![S::zero(); dim], vec![h.clone(); dim])
    }

    /// Lower corner.
    pub fn lo(&self) -> &[S] {
        &self.lo
    }

    /// Upper corner (exclusive).
    pub fn hi(&self) -> &[S] {
        &self.hi
    }

    /// Number of axes.
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Product of the edge lengths.
    pub fn volume(&self) -> S {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(S::one(), |acc, (l, h)| acc * (h.clone() - l.clone()))
    }

    /// The box shifted by `v`.
    pub fn translate(&self, v: &[S]) -> Result<Self, BoxError> {
        if v.len() != self.dim() {
            return Err(BoxError::DimMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(Aabb {
            lo: self.lo.iter().zip(v).map(|(a, b)| a.clone() + b.clone()).collect(),
            hi: self.hi.iter().zip(v).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    /// Whether `p` lies in the box (half-open on every axis).
    pub fn contains_point(&self, p: &[S]) -> bool {
        p.len() == self.dim()
            && self
                .lo
                .iter()
                .zip(&self.hi)
                .zip(p)
                .all(|((l, h), x)| l <= x && x < h)
    }

    /// Intersection with another box, `None` when disjoint.
    fn clip(&self, other: &Aabb<S>) -> Option<Aabb<S>> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let l = if self.lo[i] >= other.lo[i] { &self.lo[i] } else { &other.lo[i] };
            let h = if self.hi[i] <= other.hi[i] { &self.hi[i] } else { &other.hi[i] };
            if l >= h {
                return None;
            }
            lo.push(l.clone());
            hi.push(h.clone());
        }
        Some(Aabb { lo, hi })
    }

    /// Whether the two boxes share any point.
    fn overlaps(&self, other: &Aabb<S>) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((al, ah), (bl, bh))| al < bh && bl < ah)
    }
}

impl<S: Scalar> fmt::Display for Aabb<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, "×")?;
            }
            write!(f, "[{}, {})", self.lo[i], self.hi[i])?;
        }
        Ok(())
    }
}

/// A finite union of half-open boxes in canonical form.
///
/// The empty set is representable at every dimension.  Construction always
/// canonicalizes, so `==` compares point sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxSet<S> {
    dim: usize,
    boxes: Vec<Aabb<S>>,
}

/// Working representation inside the canonicalizer: a box as its per-axis
/// interval list.
type Ivs<S> = Vec<(S, S)>;

fn to_ivs<S: Scalar>(b: &Aabb<S>) -> Ivs<S> {
    b.lo.iter().cloned().zip(b.hi.iter().cloned()).collect()
}

fn from_ivs<S: Scalar>(ivs: Ivs<S>) -> Aabb<S> {
    let (lo, hi) = ivs.into_iter().unzip();
    Aabb { lo, hi }
}

/// Recursive slab canonicalization; see the module docs.  Input boxes may
/// overlap arbitrarily; output boxes are disjoint, merged, and sorted.
fn canon_rec<S: Scalar>(boxes: &[Ivs<S>]) -> Vec<Ivs<S>> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let k = boxes[0].len();
    if k == 1 {
        // Base case: union of intervals by sort-and-sweep.
        let mut ivs: Vec<(S, S)> = boxes.iter().map(|b| b[0].clone()).collect();
        ivs.sort();
        let mut out: Vec<(S, S)> = Vec::new();
        for (lo, hi) in ivs {
            match out.last_mut() {
                Some((_, prev_hi)) if *prev_hi >= lo => {
                    if hi > *prev_hi {
                        *prev_hi = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        return out.into_iter().map(|iv| vec![iv]).collect();
    }

    // Cut the first axis at every endpoint.
    let mut cuts: Vec<S> = Vec::with_capacity(boxes.len() * 2);
    for b in boxes {
        cuts.push(b[0].0.clone());
        cuts.push(b[0].1.clone());
    }
    cuts.sort();
    cuts.dedup();

    // Each slab between consecutive cuts is covered by a box iff the box's
    // first interval contains it (endpoints were all cut, so coverage is
    // all-or-nothing per slab).  Recurse on the tails, then merge adjacent
    // slabs with identical cross-sections.
    let mut slabs: Vec<((S, S), Vec<Ivs<S>>)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let sub: Vec<Ivs<S>> = boxes
            .iter()
            .filter(|bx| &bx[0].0 <= a && &bx[0].1 >= b)
            .map(|bx| bx[1..].to_vec())
            .collect();
        if sub.is_empty() {
            continue;
        }
        let tails = canon_rec(&sub);
        if let Some(((_, prev_hi), prev_tails)) = slabs.last_mut() {
            if prev_hi == a && *prev_tails == tails {
                *prev_hi = b.clone();
                continue;
            }
        }
        slabs.push(((a.clone(), b.clone()), tails));
    }

    let mut out = Vec::new();
    for ((a, b), tails) in slabs {
        for t in tails {
            let mut v = Vec::with_capacity(k);
            v.push((a.clone(), b.clone()));
            v.extend(t);
            out.push(v);
        }
    }
    out
}

impl<S: Scalar> BoxSet<S> {
    /// The empty set in dimension `dim`.
    pub fn empty(dim: usize) -> Result<Self, BoxError> {
        if dim == 0 {
            return Err(BoxError::ZeroDim);
        }
        Ok(BoxSet { dim, boxes: Vec::new() })
    }

    /// Canonical set built from arbitrary (possibly overlapping) boxes.
    pub fn from_boxes(dim: usize, boxes: Vec<Aabb<S>>) -> Result<Self, BoxError> {
        if dim == 0 {
            return Err(BoxError::ZeroDim);
        }
        for b in &boxes {
            if b.dim() != dim {
                return Err(BoxError::DimMismatch { expected: dim, got: b.dim() });
            }
        }
        let ivs: Vec<Ivs<S>> = boxes.iter().map(to_ivs).collect();
        let canon = canon_rec(&ivs);
        Ok(BoxSet {
            dim,
            boxes: canon.into_iter().map(from_ivs).collect(),
        })
    }

    /// The set of a single box.
    pub fn from_box(b: Aabb<S>) -> Self {
        BoxSet { dim: b.dim(), boxes: vec![b] }
    }

    /// The cube `[0, h)^dim`.
    pub fn cube(dim: usize, h: &S) -> Result<Self, BoxError> {
        Ok(BoxSet::from_box(Aabb::cube(dim, h)?))
    }

    /// Number of axes.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The canonical boxes, disjoint and sorted.
    pub fn boxes(&self) -> &[Aabb<S>] {
        &self.boxes
    }

    /// Number of canonical boxes.
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    /// Whether the set has no points.
    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn check_dim(&self, other: &BoxSet<S>) -> Result<(), BoxError> {
        if self.dim != other.dim {
            return Err(BoxError::DimMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    /// Exact total volume (the boxes are disjoint, so a plain sum).
    pub fn volume(&self) -> S {
        self.boxes
            .iter()
            .fold(S::zero(), |acc, b| acc + b.volume())
    }

    /// Set union.
    pub fn union(&self, other: &BoxSet<S>) -> Result<BoxSet<S>, BoxError> {
        self.check_dim(other)?;
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        let ivs: Vec<Ivs<S>> = self.boxes.iter().chain(&other.boxes).map(to_ivs).collect();
        Ok(BoxSet {
            dim: self.dim,
            boxes: canon_rec(&ivs).into_iter().map(from_ivs).collect(),
        })
    }

    /// Set intersection.
    pub fn intersect(&self, other: &BoxSet<S>) -> Result<BoxSet<S>, BoxError> {
        self.check_dim(other)?;
        if self.is_empty() || other.is_empty() {
            return BoxSet::empty(self.dim);
        }
        let mut pieces: Vec<Ivs<S>> = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                if let Some(c) = a.clip(b) {
                    pieces.push(to_ivs(&c));
                }
            }
        }
        // Pieces are disjoint already (both inputs canonical), but the sweep
        // also re-merges fragments into canonical shape.
        Ok(BoxSet {
            dim: self.dim,
            boxes: canon_rec(&pieces).into_iter().map(from_ivs).collect(),
        })
    }

    /// Set difference `self ∖ other`.
    pub fn subtract(&self, other: &BoxSet<S>) -> Result<BoxSet<S>, BoxError> {
        self.check_dim(other)?;
        if self.is_empty() || other.is_empty() {
            return Ok(self.clone());
        }
        let holes: Vec<&Aabb<S>> = other.boxes.iter().collect();
        let mut fragments: Vec<Ivs<S>> = Vec::new();
        for a in &self.boxes {
            carve(a.clone(), &holes, &mut fragments);
        }
        Ok(BoxSet {
            dim: self.dim,
            boxes: canon_rec(&fragments).into_iter().map(from_ivs).collect(),
        })
    }

    /// The set shifted by `v`.  Canonical form is preserved by a rigid shift,
    /// so this is linear in the number of boxes.
    pub fn translate(&self, v: &[S]) -> Result<BoxSet<S>, BoxError> {
        if v.len() != self.dim {
            return Err(BoxError::DimMismatch { expected: self.dim, got: v.len() });
        }
        Ok(BoxSet {
            dim: self.dim,
            boxes: self
                .boxes
                .iter()
                .map(|b| b.translate(v))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Whether `self ⊆ other`.
    pub fn is_subset(&self, other: &BoxSet<S>) -> Result<bool, BoxError> {
        Ok(self.subtract(other)?.is_empty())
    }

    /// Whether the two sets share no points.
    pub fn is_disjoint(&self, other: &BoxSet<S>) -> Result<bool, BoxError> {
        self.check_dim(other)?;
        for a in &self.boxes {
            for b in &other.boxes {
                if a.overlaps(b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Whether `p` lies in the set.
    pub fn contains_point(&self, p: &[S]) -> bool {
        self.boxes.iter().any(|b| b.contains_point(p))
    }

    /// Smallest single box containing the set, `None` when empty.
    pub fn bounding_box(&self) -> Option<Aabb<S>> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for i in 0..self.dim {
                if b.lo[i] < lo[i] {
                    lo[i] = b.lo[i].clone();
                }
                if b.hi[i] > hi[i] {
                    hi[i] = b.hi[i].clone();
                }
            }
        }
        Some(Aabb { lo, hi })
    }
}

/// Subtract every hole from `bx`, pushing the surviving fragments.
///
/// Splits `bx` along the first overlapping hole's planes axis by axis; the
/// off-hole slabs are disjoint from that hole and recurse against the later
/// holes only, the core inside the hole is dropped.
fn carve<S: Scalar>(bx: Aabb<S>, holes: &[&Aabb<S>], out: &mut Vec<Ivs<S>>) {
    let Some(pos) = holes.iter().position(|h| bx.overlaps(h)) else {
        out.push(to_ivs(&bx));
        return;
    };
    let hole = holes[pos];
    let rest = &holes[pos + 1..];
    let mut core = bx;
    for axis in 0..core.dim() {
        if core.lo[axis] < hole.lo[axis] {
            let mut piece = core.clone();
            piece.hi[axis] = hole.lo[axis].clone();
            carve(piece, rest, out);
            core.lo[axis] = hole.lo[axis].clone();
        }
        if hole.hi[axis] < core.hi[axis] {
            let mut piece = core.clone();
            piece.lo[axis] = hole.hi[axis].clone();
            carve(piece, rest, out);
            core.hi[axis] = hole.hi[axis].clone();
        }
    }
    // What is left of `core` lies inside `hole`: removed.
}
