//! Point-level dynamics on finite-level coordinates.
//!
//! A point of the inductive-limit space is an infinite object: a level-`M`
//! coordinate in `F_M` plus a tail of translation choices `c_{M+1}, c_{M+2},
//! …`.  A [`FiberPoint`] carries the finite part explicitly and derives the
//! tail deterministically from a seed, so every point is finitely
//! representable and every computation on it is reproducible.
//!
//! Translation acts by adding `g` to the coordinate once the representation
//! sits at a level where the sum stays inside the cube — the same climb the
//! cylinder action performs, but one point at a time.  This gives an
//! independent cross-check of the set-level machinery: moving a point and
//! moving the cylinder around it must agree wherever both are defined.

use thiserror::Error;

use crate::cfcore::{CFSchedule, CfError, Cylinder};
use crate::rng::mix;
use crate::scalar::Scalar;

/// Errors from point-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    /// Coordinate not inside the cube at the stated level.
    #[error("coordinate is not inside the level-{level} cube")]
    OutOfCube { level: usize },
    /// No level of the schedule brings the translated coordinate in range.
    #[error("schedule too short: no level up to {top} keeps the translate in range")]
    ScheduleTooShort { top: usize },
    /// Cylinder-layer failure (level range, dimension mixing).
    #[error(transparent)]
    Cf(#[from] CfError),
}

/// A point given by a level, a coordinate in that level's cube, and a seed
/// that deterministically supplies the infinite tail of translation choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPoint<S> {
    level: usize,
    coord: Vec<S>,
    tail_seed: u64,
}

impl<S: Scalar> FiberPoint<S> {
    /// Build a point after checking `coord ∈ F_level`.
    pub fn new(
        s: &CFSchedule<S>,
        level: usize,
        coord: Vec<S>,
        tail_seed: u64,
    ) -> Result<Self, OrbitError> {
        let h = s.h(level)?;
        if coord.len() != s.dim()
            || !coord.iter().all(|x| !x.is_negative() && x < h)
        {
            return Err(OrbitError::OutOfCube { level });
        }
        Ok(FiberPoint { level, coord, tail_seed })
    }

    /// The level of the stored coordinate.
    pub fn level(&self) -> usize {
        self.level
    }

    /// The coordinate in `F_level`.
    pub fn coord(&self) -> &[S] {
        &self.coord
    }

    /// The tail seed.
    pub fn tail_seed(&self) -> u64 {
        self.tail_seed
    }
}

/// The tail's translation choice entering level `k` (an index into `C_k`),
/// derived statelessly from the seed so that the choice for a level never
/// depends on which other levels were materialized first.
fn tail_choice(seed: u64, entering_level: usize, c_len: usize) -> usize {
    (mix(seed, entering_level as u64) % c_len as u64) as usize
}

/// Re-express a point at level `m ≥ x.level` by consuming tail choices:
/// `coord ↦ coord + c_{level+1} + … + c_m`.
pub fn embed<S: Scalar>(
    s: &CFSchedule<S>,
    x: &FiberPoint<S>,
    m: usize,
) -> Result<FiberPoint<S>, OrbitError> {
    if m < x.level {
        return Err(CfError::LiftDownward { from: x.level, to: m }.into());
    }
    s.h(m)?; // level range check
    let mut coord = x.coord.clone();
    for k in x.level..m {
        let cset = s.c_next(k)?;
        let c = &cset[tail_choice(x.tail_seed, k + 1, cset.len())];
        for (xi, ci) in coord.iter_mut().zip(c) {
            *xi = xi.clone() + ci.clone();
        }
    }
    FiberPoint::new(s, m, coord, x.tail_seed)
}

/// Translate a point by `g`: climb (consuming tail choices) to the first
/// level where `coord + g` stays inside the cube, then add `g`.
pub fn flow_point<S: Scalar>(
    s: &CFSchedule<S>,
    x: &FiberPoint<S>,
    g: &[S],
) -> Result<FiberPoint<S>, OrbitError> {
    if g.len() != s.dim() {
        return Err(CfError::Box(crate::boxset::BoxError::DimMismatch {
            expected: s.dim(),
            got: g.len(),
        })
        .into());
    }
    let mut cur = x.clone();
    loop {
        let h = s.h(cur.level)?;
        let ok = cur
            .coord
            .iter()
            .zip(g)
            .all(|(xi, gi)| {
                let y = xi.clone() + gi.clone();
                !y.is_negative() && y < *h
            });
        if ok {
            let coord = cur
                .coord
                .iter()
                .zip(g)
                .map(|(xi, gi)| xi.clone() + gi.clone())
                .collect();
            return FiberPoint::new(s, cur.level, coord, cur.tail_seed);
        }
        if cur.level + 1 > s.top() {
            return Err(OrbitError::ScheduleTooShort { top: s.top() });
        }
        cur = embed(s, &cur, cur.level + 1)?;
    }
}

/// Whether the point lies in the cylinder, evaluated at the higher of the
/// two levels (embedding the point or lifting the cylinder as needed).
pub fn in_cylinder<S: Scalar>(
    s: &CFSchedule<S>,
    x: &FiberPoint<S>,
    c: &Cylinder<S>,
) -> Result<bool, OrbitError> {
    let m = x.level.max(c.level());
    let y = embed(s, x, m)?;
    let lc = s.lift(c, m)?;
    Ok(lc.base().contains_point(&y.coord))
}

/// Hit statistics for one target of a sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    /// Index into the target list.
    pub target: usize,
    /// Samples that entered the target within the horizon.
    pub hits: u64,
    /// Samples that ran the full horizon without entering.
    pub misses: u64,
    /// Samples whose orbit left the finite schedule before the question was
    /// settled (reported, never silently dropped).
    pub censored: u64,
    /// Sum of first-hit step indices over the hitting samples (for mean
    /// first-hit reporting).
    pub first_hit_sum: u64,
}

/// Sweep diagnostics: iterate the diagonal translation and record, per
/// target, how many sample points enter it and when.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepTable {
    /// Number of samples swept.
    pub samples: u64,
    /// Horizon (number of iterations applied after step 0).
    pub horizon: usize,
    /// One row per target, in target order.
    pub rows: Vec<SweepRow>,
}

/// Iterate `x ↦ x + (t,…,t)` up to `horizon` times per sample and record
/// first hits into each target cylinder.  Step 0 (the unmoved point) counts,
/// so a point already inside a target registers a hit at time 0.  Orbits
/// that exhaust the schedule mid-flight are tallied as censored for every
/// target they had not yet settled.
pub fn sweep_stats<S: Scalar>(
    s: &CFSchedule<S>,
    t: &S,
    sample: &[FiberPoint<S>],
    horizon: usize,
    targets: &[Cylinder<S>],
) -> Result<SweepTable, OrbitError> {
    let g: Vec<S> = vec![t.clone(); s.dim()];
    let mut rows: Vec<SweepRow> = (0..targets.len())
        .map(|target| SweepRow { target, hits: 0, misses: 0, censored: 0, first_hit_sum: 0 })
        .collect();
    for x0 in sample {
        let mut first_hit: Vec<Option<u64>> = vec![None; targets.len()];
        let mut x = x0.clone();
        let mut censored_at: Option<usize> = None;
        for step in 0..=horizon {
            for (ti, target) in targets.iter().enumerate() {
                if first_hit[ti].is_none() && in_cylinder(s, &x, target)? {
                    first_hit[ti] = Some(step as u64);
                }
            }
            if step == horizon || first_hit.iter().all(|h| h.is_some()) {
                break;
            }
            match flow_point(s, &x, &g) {
                Ok(y) => x = y,
                Err(OrbitError::ScheduleTooShort { .. }) => {
                    censored_at = Some(step);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        for (ti, row) in rows.iter_mut().enumerate() {
            match (first_hit[ti], censored_at) {
                (Some(s0), _) => {
                    row.hits += 1;
                    row.first_hit_sum += s0;
                }
                (None, Some(_)) => row.censored += 1,
                (None, None) => row.misses += 1,
            }
        }
    }
    Ok(SweepTable { samples: sample.len() as u64, horizon, rows })
}
