//! The filling recursion: transporting one set into another along powers of a
//! translation, with exact bookkeeping of how much lands where.
//!
//! Given two equal-measure cylinders `A`, `B` and the map `S = T_q`, the
//! recursion peels off
//!
//! ```text
//! A_0 = A ∩ B,
//! A_i = (A ∖ (A_0 ⊔ … ⊔ A_{i−1})) ∩ S^{−i}(B ∖ (A_0 ⊔ S A_1 ⊔ … ⊔ S^{i−1} A_{i−1}))
//! ```
//!
//! so `A_i` is the not-yet-transported part of `A` that `S^i` carries onto a
//! not-yet-covered part of `B`.  The *filling number* `N` is the first index
//! at which the transported mass exceeds half of `μ(A)` — a strict, exact
//! rational comparison.  The images `S^i A_i` are pairwise disjoint subsets
//! of `B`, which is what downstream certificates are made of.
//!
//! Everything runs at a *common lift level*: translation by `i·q` is only the
//! coordinate shift once every translate of `A` stays inside the level cube,
//! and on strongly-validated schedules climbing one level absorbs one unit of
//! shift, so level `A.level + Q·i` (with `Q = ⌊‖q‖⌋+1`) always suffices.  The
//! implementation climbs lazily — only when the bounding box actually leaves
//! the cube — which in practice stays far below that a-priori bound.
//!
//! The module also hosts the time-grid scan: the maximum of `N` over every
//! ordered pair of partition atoms and every time in a rational grid, which
//! is the finite, recorded substitute for a supremum over a real segment.

use rayon::prelude::*;
use thiserror::Error;

use crate::boxset::{Aabb, BoxError, BoxSet};
use crate::cfcore::{CFSchedule, CfError, Cylinder, Measure};
use crate::scalar::{norm_ceil_plus_one, Scalar};

/// How out-of-range mass is handled during the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FillMode<S> {
    /// Require every translate to come fully in range (strong schedules,
    /// `q ≥ 0`); results match the recursion verbatim.
    Exact,
    /// Allow stopping the climb at the schedule top: mass that cannot be
    /// tested at any available level is skipped once its per-step measure is
    /// below `eps`, and the total skipped mass is reported.  Parts remain
    /// genuine disjoint transports into `B`; only completeness is lost.
    Tracked {
        /// Per-step budget for untestable mass.
        eps: S,
    },
}

/// Knobs for [`fill`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillOptions<S> {
    /// Out-of-range policy.
    pub mode: FillMode<S>,
    /// Number of indices `i = 0, 1, …, budget−1` the recursion may try
    /// before giving up.
    pub budget: usize,
    /// Highest level the recursion may lift to (default: schedule top).
    pub max_level: Option<usize>,
    /// Cap on the box count of the working sets; exceeding it aborts the
    /// fill rather than letting a lift blow up memory.
    pub max_boxes: usize,
}

impl<S> Default for FillOptions<S> {
    fn default() -> Self {
        FillOptions {
            mode: FillMode::Exact,
            budget: 64,
            max_level: None,
            max_boxes: 200_000,
        }
    }
}

/// Errors from the filling recursion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FillError {
    /// The two cylinders must have equal positive measure.
    #[error("measures differ: μ(A) = {a}, μ(B) = {b}")]
    MassMismatch { a: String, b: String },
    /// Empty input set.
    #[error("cylinders must have positive measure")]
    ZeroMass,
    /// Exact mode requires a nonnegative shift.
    #[error("shift component {axis} is negative; exact mode requires q ≥ 0")]
    NegativeShift { axis: usize },
    /// Exact mode requires the strong containment margin.
    #[error("exact mode requires a strongly-validated schedule")]
    ScheduleNotStrong,
    /// The budget ran out before half the mass was transported.
    #[error("budget exhausted after {steps} steps: transported {filled} of target > {target}")]
    BudgetExhausted { steps: usize, filled: String, target: String },
    /// Working sets grew past the configured box cap.
    #[error("box cap exceeded at step {at_step}: {boxes} boxes > cap {cap}")]
    BoxesExceeded { at_step: usize, boxes: usize, cap: usize },
    /// No permitted level keeps the current translate in range.
    #[error("schedule too short: step {at_step} needs a level above {top}")]
    ScheduleTooShort { at_step: usize, top: usize },
    /// An emitted result failed its own re-verification.
    #[error("certificate violation at part {index}: {what}")]
    CertificateViolation { index: usize, what: String },
    /// Cylinder-layer failure.
    #[error(transparent)]
    Cf(#[from] CfError),
}

impl From<BoxError> for FillError {
    fn from(e: BoxError) -> Self {
        FillError::Cf(CfError::Box(e))
    }
}

/// Output of [`fill`]: the parts `A_0, …, A_N` at a common level, with the
/// exact masses and the levels involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillingResult<S> {
    /// The defining shift (`S = T_q`).
    pub q: Vec<S>,
    /// The inputs as given.
    pub a: Cylinder<S>,
    /// See `a`.
    pub b: Cylinder<S>,
    /// The filling number: first index with transported mass `> μ(A)/2`.
    pub n: usize,
    /// `⌊‖q‖⌋ + 1`, the least integer exceeding the sup-norm of `q`.
    pub big_q: i64,
    /// `a.level + big_q · n` — the a-priori level bound; parts are always
    /// re-expressible there.
    pub work_level: usize,
    /// The level the parts are actually stored at (never above
    /// `work_level`).
    pub parts_level: usize,
    /// `A_0, …, A_N`, pairwise disjoint, all at `parts_level`.
    pub parts: Vec<Cylinder<S>>,
    /// Measure of each part, index-aligned with `parts`.
    pub masses: Vec<Measure<S>>,
    /// Total transported mass `μ(A_0 ⊔ … ⊔ A_N)`.
    pub mass: Measure<S>,
    /// `μ(A)`.
    pub total: Measure<S>,
    /// `mass / total`, exactly; `> 1/2` by construction.
    pub mass_fraction: S,
    /// Mass skipped as untestable (always zero in exact mode).
    pub censored: Measure<S>,
}

/// Axis-aligned hull of a set, tracked separately from the boxes so range
/// checks and lifts cost `O(d)` instead of a pass over every box.
#[derive(Debug, Clone)]
struct Hull<S> {
    lo: Vec<S>,
    hi: Vec<S>,
}

impl<S: Scalar> Hull<S> {
    fn of(set: &BoxSet<S>) -> Option<Self> {
        set.bounding_box()
            .map(|bb| Hull { lo: bb.lo().to_vec(), hi: bb.hi().to_vec() })
    }

    /// Hull after one lift: each copy shifts by some `c ∈ cset`, so the hull
    /// translates by the componentwise min/max over the translation set.
    fn lifted(&self, cset: &[Vec<S>]) -> Self {
        let d = self.lo.len();
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for i in 0..d {
            let min_c = cset.iter().map(|c| c[i].clone()).min().unwrap();
            let max_c = cset.iter().map(|c| c[i].clone()).max().unwrap();
            lo[i] = lo[i].clone() + min_c;
            hi[i] = hi[i].clone() + max_c;
        }
        Hull { lo, hi }
    }

    /// Whether the hull shifted by `shift` stays inside `[0, h)^d`.
    fn shifted_fits(&self, shift: &[S], h: &S) -> bool {
        self.lo
            .iter()
            .zip(shift)
            .all(|(l, s)| !(l.clone() + s.clone()).is_negative())
            && self.hi.iter().zip(shift).all(|(u, s)| u.clone() + s.clone() <= *h)
    }
}

/// Run the filling recursion for `S = T_q` from `a` into `b`.
///
/// Preconditions: `μ(a) = μ(b) > 0`; in exact mode the schedule must carry
/// the strong margin and `q` must be componentwise nonnegative.  The
/// recursion tries indices `i = 0, …, budget−1` and succeeds at the first
/// index where the transported mass strictly exceeds `μ(a)/2`.
pub fn fill<S: Scalar>(
    s: &CFSchedule<S>,
    q: &[S],
    a: &Cylinder<S>,
    b: &Cylinder<S>,
    opts: &FillOptions<S>,
) -> Result<FillingResult<S>, FillError> {
    if q.len() != s.dim() {
        return Err(CfError::Box(BoxError::DimMismatch { expected: s.dim(), got: q.len() }).into());
    }
    if let FillMode::Exact = opts.mode {
        if !s.is_strong() {
            return Err(FillError::ScheduleNotStrong);
        }
        if let Some(axis) = q.iter().position(|x| x.is_negative()) {
            return Err(FillError::NegativeShift { axis });
        }
    }
    let total = s.cylinder_measure(a)?;
    let total_b = s.cylinder_measure(b)?;
    if total.is_zero() || total_b.is_zero() {
        return Err(FillError::ZeroMass);
    }
    if total != total_b {
        return Err(FillError::MassMismatch {
            a: total.value().frac_string(),
            b: total_b.value().frac_string(),
        });
    }
    let top = opts.max_level.unwrap_or(s.top()).min(s.top());

    // Working state at the common level: the unfilled remainders of A and B,
    // and the hull of all of A (so the range check covers every earlier
    // translate too, q being monotone in i when nonnegative; for general q
    // the per-step check is exactly what the step needs).
    let mut level = a.level().max(b.level());
    if level > top {
        return Err(FillError::ScheduleTooShort { at_step: 0, top });
    }
    let mut ua = s.lift(a, level)?.into_parts().1;
    let mut ub = s.lift(b, level)?.into_parts().1;
    let mut a_hull = Hull::of(&ua).expect("positive measure implies nonempty");

    let target = total.half();
    let mut filled = Measure::<S>::zero();
    let mut censored = Measure::<S>::zero();
    let mut parts: Vec<Cylinder<S>> = Vec::new();
    let mut masses: Vec<Measure<S>> = Vec::new();
    let mut shift: Vec<S> = vec![S::zero(); q.len()];
    let mut success_at: Option<usize> = None;

    for i in 0..opts.budget {
        if i > 0 {
            for (sh, qi) in shift.iter_mut().zip(q) {
                *sh = sh.clone() + qi.clone();
            }
        }
        // Climb until the whole translate fits, or (tracked mode) the top is
        // reached and the unfit mass is small enough to skip.
        let mut skipped_here = BoxSet::empty(s.dim())?;
        loop {
            if a_hull.shifted_fits(&shift, s.h(level)?) {
                break;
            }
            if level < top {
                let cset = s.c_next(level)?.to_vec();
                a_hull = a_hull.lifted(&cset);
                let lifted_a = s.lift(&s.cylinder(level, ua)?, level + 1)?;
                let lifted_b = s.lift(&s.cylinder(level, ub)?, level + 1)?;
                ua = lifted_a.into_parts().1;
                ub = lifted_b.into_parts().1;
                level += 1;
                let boxes = ua.len() + ub.len();
                if boxes > opts.max_boxes {
                    return Err(FillError::BoxesExceeded {
                        at_step: i,
                        boxes,
                        cap: opts.max_boxes,
                    });
                }
                continue;
            }
            // At the top.  Exact mode cannot proceed; tracked mode may skip
            // the part of UA that the shift pushes out of the cube, if that
            // mass is under the per-step budget.
            match &opts.mode {
                FillMode::Exact => {
                    return Err(FillError::ScheduleTooShort { at_step: i, top });
                }
                FillMode::Tracked { eps } => {
                    let h = s.h(level)?;
                    let mut lo = Vec::with_capacity(s.dim());
                    let mut hi = Vec::with_capacity(s.dim());
                    let mut window_nonempty = true;
                    for sh in &shift {
                        let l = if sh.is_negative() { -sh.clone() } else { S::zero() };
                        let u = if sh.is_positive() { h.clone() - sh.clone() } else { h.clone() };
                        if l >= u {
                            window_nonempty = false;
                        }
                        lo.push(l);
                        hi.push(u);
                    }
                    let in_range = if window_nonempty {
                        let window = BoxSet::from_box(Aabb::new(lo, hi)?);
                        ua.intersect(&window)?
                    } else {
                        BoxSet::empty(s.dim())?
                    };
                    skipped_here = ua.subtract(&in_range)?;
                    let skipped_measure =
                        s.cylinder_measure(&s.cylinder(level, skipped_here.clone())?)?;
                    if skipped_measure.value() >= eps {
                        return Err(FillError::ScheduleTooShort { at_step: i, top });
                    }
                    censored += skipped_measure;
                    ua = in_range;
                    break;
                }
            }
        }

        // A_i = ((UA + shift) ∩ UB) − shift, all at the common level.
        let moved = ua.translate(&shift)?;
        let hit = moved.intersect(&ub)?;
        let part = hit.translate(&shift.iter().map(|x| -x.clone()).collect::<Vec<S>>())?;
        // Restore any skipped mass to UA: it was not tested this step, but a
        // later (different) shift may still bring it in range.
        if !skipped_here.is_empty() {
            ua = ua.union(&skipped_here)?;
        }
        let part_measure = s.cylinder_measure(&s.cylinder(level, part.clone())?)?;
        if !part.is_empty() {
            ua = ua.subtract(&part)?;
            ub = ub.subtract(&hit)?;
        }
        parts.push(s.cylinder(level, part)?);
        filled += part_measure.clone();
        masses.push(part_measure);
        if filled > target {
            success_at = Some(i);
            break;
        }
    }

    let n = match success_at {
        Some(n) => n,
        None => {
            return Err(FillError::BudgetExhausted {
                steps: opts.budget,
                filled: filled.value().frac_string(),
                target: target.value().frac_string(),
            })
        }
    };

    // Normalize all parts to the final common level.
    let parts = parts
        .into_iter()
        .map(|p| s.lift(&p, level))
        .collect::<Result<Vec<_>, _>>()?;
    let big_q = norm_ceil_plus_one(q);
    let mass_fraction = filled.frac_of(&total);
    Ok(FillingResult {
        q: q.to_vec(),
        a: a.clone(),
        b: b.clone(),
        n,
        big_q,
        work_level: a.level() + (big_q as usize) * n,
        parts_level: level,
        parts,
        masses,
        mass: filled,
        total,
        mass_fraction,
        censored,
    })
}

/// The images `S^i A_i`, re-verified: each inside `B`, pairwise disjoint,
/// with total mass equal to the transported mass.  A failure here is an
/// engine bug, surfaced as [`FillError::CertificateViolation`].
pub fn image_stack<S: Scalar>(
    s: &CFSchedule<S>,
    r: &FillingResult<S>,
) -> Result<Vec<Cylinder<S>>, FillError> {
    let level = r.parts_level;
    let b_lift = s.lift(&r.b, level)?;
    let mut images: Vec<Cylinder<S>> = Vec::with_capacity(r.parts.len());
    let mut shift: Vec<S> = vec![S::zero(); r.q.len()];
    let mut mass_sum = Measure::<S>::zero();
    for (i, part) in r.parts.iter().enumerate() {
        if i > 0 {
            for (sh, qi) in shift.iter_mut().zip(&r.q) {
                *sh = sh.clone() + qi.clone();
            }
        }
        let base = part.base().translate(&shift)?;
        if !base.is_subset(b_lift.base())? {
            return Err(FillError::CertificateViolation {
                index: i,
                what: "image not contained in B".into(),
            });
        }
        for (j, prev) in images.iter().enumerate() {
            if !base.is_disjoint(prev.base())? {
                return Err(FillError::CertificateViolation {
                    index: i,
                    what: format!("image overlaps image {j}"),
                });
            }
        }
        let cyl = s.cylinder(level, base)?;
        mass_sum += s.cylinder_measure(&cyl)?;
        images.push(cyl);
    }
    if mass_sum != r.mass {
        return Err(FillError::CertificateViolation {
            index: r.parts.len(),
            what: format!(
                "image masses sum to {}, expected {}",
                mass_sum.value().frac_string(),
                r.mass.value().frac_string()
            ),
        });
    }
    Ok(images)
}

/// The rational time grid covering `[1/n, n]` with step at most
/// `1/density`: `t_k = 1/n + k·(n²−1)/(n²·density)` for `k = 0, …, n·density`.
///
/// Doubling `density` halves the step and keeps every old point, so grids
/// nest under refinement.  For `n = 1` the segment is the single point `{1}`.
pub fn time_grid<S: Scalar>(n: u32, density: u32) -> Vec<S> {
    assert!(n >= 1 && density >= 1, "grid parameters must be positive");
    let n_s = S::from_int(n as i64);
    if n == 1 {
        return vec![S::one()];
    }
    let start = S::one() / n_s.clone();
    let step = (n_s.clone() * n_s.clone() - S::one())
        / (n_s.clone() * n_s * S::from_int(density as i64));
    let count = (n as usize) * (density as usize);
    let mut out = Vec::with_capacity(count + 1);
    let mut t = start;
    for _ in 0..=count {
        out.push(t.clone());
        t = t + step.clone();
    }
    out
}

/// One evaluated cell of a [`GridMax`] table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridEntry<S> {
    /// Index of the source atom `Δ`.
    pub a: usize,
    /// Index of the target atom `Δ′`.
    pub b: usize,
    /// The time driving `S_t`.
    pub t: S,
    /// The filling number for this triple.
    pub n_fill: usize,
}

/// The grid scan result: every ordered atom pair crossed with every grid
/// time, and the maximum filling number over the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMax<S> {
    /// Step index (sets the segment `[1/n, n]`).
    pub n: u32,
    /// Power recorded for provenance (the schedule is its caller-built power).
    pub p: u32,
    /// The evaluated times.
    pub grid: Vec<S>,
    /// One entry per `(a, b, t)`, sorted by that key.
    pub table: Vec<GridEntry<S>>,
    /// `max` of `n_fill` over the table (0 for an empty table).
    pub d_max: usize,
}

/// Errors from the grid scan.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    /// The atom list must partition the level-0 cube.
    #[error("atoms do not partition the level-0 cube: {why}")]
    AtomsNotPartition { why: String },
    /// A fill failed; the offending triple is named.
    #[error("fill failed at atoms ({a},{b}), t = {t}: {source}")]
    Fill { a: usize, b: usize, t: String, source: FillError },
    /// Cylinder-layer failure.
    #[error(transparent)]
    Cf(#[from] CfError),
}

impl From<BoxError> for GridError {
    fn from(e: BoxError) -> Self {
        GridError::Cf(CfError::Box(e))
    }
}

/// Evaluate `N(S_t, [Δ]_0, [Δ′]_0)` for every ordered pair of `atoms` and
/// every `t` in the grid for step `n`, where `S_t` shifts every coordinate of
/// the (power) schedule by `t`.
///
/// The `p` argument is recorded in the output for provenance; `s_pow` is
/// expected to be the `p`-th power of the underlying schedule, but any valid
/// schedule is accepted.  Tasks run in parallel; the table is merged in key
/// order, so the result is independent of scheduling.
pub fn grid_max<S: Scalar>(
    s_pow: &CFSchedule<S>,
    atoms: &[BoxSet<S>],
    n: u32,
    p: u32,
    grid_density: u32,
    opts: &FillOptions<S>,
) -> Result<GridMax<S>, GridError> {
    if atoms.is_empty() {
        return Err(GridError::AtomsNotPartition { why: "no atoms".into() });
    }
    let cube = s_pow.cube_at(0)?;
    let mut union = BoxSet::empty(s_pow.dim())?;
    for (i, a) in atoms.iter().enumerate() {
        if a.is_empty() {
            return Err(GridError::AtomsNotPartition { why: format!("atom {i} is empty") });
        }
        if !union.is_disjoint(a)? {
            return Err(GridError::AtomsNotPartition {
                why: format!("atom {i} overlaps an earlier atom"),
            });
        }
        union = union.union(a)?;
    }
    if union != cube {
        return Err(GridError::AtomsNotPartition {
            why: "union of atoms is not the level-0 cube".into(),
        });
    }

    let grid: Vec<S> = time_grid(n, grid_density);
    let mut tasks: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..atoms.len() {
        for b in 0..atoms.len() {
            for k in 0..grid.len() {
                tasks.push((a, b, k));
            }
        }
    }
    let cylinders: Vec<Cylinder<S>> = atoms
        .iter()
        .map(|a| s_pow.cylinder(0, a.clone()))
        .collect::<Result<_, _>>()?;

    let results: Vec<Result<GridEntry<S>, GridError>> = tasks
        .par_iter()
        .map(|&(a, b, k)| {
            let t = &grid[k];
            let q = vec![t.clone(); s_pow.dim()];
            match fill(s_pow, &q, &cylinders[a], &cylinders[b], opts) {
                Ok(r) => Ok(GridEntry { a, b, t: t.clone(), n_fill: r.n }),
                Err(source) => Err(GridError::Fill { a, b, t: t.frac_string(), source }),
            }
        })
        .collect();
    let mut table = Vec::with_capacity(results.len());
    for r in results {
        table.push(r?);
    }
    // Tasks were generated in key order and rayon's indexed collect preserves
    // input order, but sort anyway so the contract is explicit.
    table.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)).then_with(|| x.t.cmp(&y.t)));
    let d_max = table.iter().map(|e| e.n_fill).max().unwrap_or(0);
    Ok(GridMax { n, p, grid, table, d_max })
}

/// One probe of [`semicontinuity_probe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiProbe<S> {
    /// Probed time.
    pub t: S,
    /// Filling number there.
    pub n_fill: usize,
    /// Whether it exceeds the center value — the phenomenon expected to die
    /// out as the radius shrinks.
    pub exceeds: bool,
}

/// Report of [`semicontinuity_probe`]: purely diagnostic, no pass/fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiReport<S> {
    /// Center time.
    pub t0: S,
    /// Filling number at the center.
    pub n0: usize,
    /// Probes at `t0 ± r` for each radius, nearest first, skipping
    /// nonpositive times.
    pub probes: Vec<SemiProbe<S>>,
}

/// Evaluate the filling number at `t0` and at `t0 ± r` for each radius,
/// flagging probes whose `N` exceeds the center's.  Upper semicontinuity
/// predicts the flags thin out as radii shrink; the report just records what
/// happened at these finitely many times.
pub fn semicontinuity_probe<S: Scalar>(
    s_pow: &CFSchedule<S>,
    a: &Cylinder<S>,
    b: &Cylinder<S>,
    t0: &S,
    radii: &[S],
    opts: &FillOptions<S>,
) -> Result<SemiReport<S>, FillError> {
    assert!(t0.is_positive(), "probe center must be positive");
    let at = |t: &S| -> Result<usize, FillError> {
        let q = vec![t.clone(); s_pow.dim()];
        Ok(fill(s_pow, &q, a, b, opts)?.n)
    };
    let n0 = at(t0)?;
    let mut probes = Vec::new();
    for r in radii {
        for t in [t0.clone() - r.clone(), t0.clone() + r.clone()] {
            if !t.is_positive() {
                continue;
            }
            let n_fill = at(&t)?;
            probes.push(SemiProbe { t, n_fill, exceeds: n_fill > n0 });
        }
    }
    Ok(SemiReport { t0: t0.clone(), n0, probes })
}
