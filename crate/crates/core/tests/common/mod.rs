//! Shared support for the integration suites: a bitmap oracle for the box
//! algebra, random generators for valid strong schedules and lattice sets,
//! a flat, unoptimized transcription of the transport recursion used as an
//! independent cross-check of `fill`, and the randomized batteries the
//! acceptance suite runs at full scale.
//!
//! Every generator runs off an explicit [`SplitMix64`] stream so all suites
//! are deterministic.

#![allow(dead_code)] // each test target uses its own subset of this module

use forge_core::boxset::{Aabb, BoxSet};
use forge_core::cfcore::{CFLevel, CFSchedule, CfError, Containment, Cylinder};
use forge_core::filling::{fill, FillOptions};
use forge_core::rng::SplitMix64;
use forge_core::scalar::{frac, int, Scalar};
use forge_core::Rat;

// ---------------------------------------------------------------------------
// Rational helpers
// ---------------------------------------------------------------------------

pub fn rat(p: i64, q: i64) -> Rat {
    frac(p, q)
}

pub fn rint(n: i64) -> Rat {
    int(n)
}

/// `x · q` as an exact integer; panics if `x` is off the `(1/q)`-lattice.
pub fn lattice_index(x: &Rat, q: i64) -> i64 {
    let scaled = x.clone() * rint(q);
    assert!(scaled.is_integer_value(), "endpoint {x} not on the 1/{q} lattice");
    scaled.floor_i64()
}

// ---------------------------------------------------------------------------
// Bitmap oracle
// ---------------------------------------------------------------------------

/// Brute-force model of a set in the window `[0, 8)^dim` with all endpoints
/// on `(1/q)ℤ`: one bool per lattice cell, row-major with axis 0 slowest.
#[derive(Clone, PartialEq, Eq)]
pub struct BitGrid {
    pub dim: usize,
    pub q: i64,
    /// Cells per axis (`8q`).
    pub side: i64,
    pub bits: Vec<bool>,
}

impl std::fmt::Debug for BitGrid {
    // Keep assert_eq! failure output readable: the raw bit vector can run to
    // hundreds of thousands of cells.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BitGrid {{ dim: {}, q: {}, filled: {}/{} }}",
            self.dim,
            self.q,
            self.count(),
            self.bits.len()
        )
    }
}

pub const WINDOW: i64 = 8;

impl BitGrid {
    pub fn empty(dim: usize, q: i64) -> Self {
        let side = WINDOW * q;
        let len = (side as usize).pow(dim as u32);
        BitGrid { dim, q, side, bits: vec![false; len] }
    }

    fn offset(&self, cell: &[i64]) -> usize {
        let mut off = 0usize;
        for &c in cell {
            debug_assert!((0..self.side).contains(&c));
            off = off * self.side as usize + c as usize;
        }
        off
    }

    /// Rasterize a box set (panics when endpoints are off-lattice or outside
    /// the window — the generators never produce those).
    pub fn from_set(set: &BoxSet<Rat>, q: i64) -> Self {
        let mut g = Self::empty(set.dim(), q);
        for b in set.boxes() {
            let lo: Vec<i64> = b.lo().iter().map(|x| lattice_index(x, q)).collect();
            let hi: Vec<i64> = b.hi().iter().map(|x| lattice_index(x, q)).collect();
            for c in &lo {
                assert!((0..g.side).contains(c), "box leaves the window");
            }
            for c in &hi {
                assert!((0..=g.side).contains(c), "box leaves the window");
            }
            g.fill_box(&lo, &hi);
        }
        g
    }

    fn fill_box(&mut self, lo: &[i64], hi: &[i64]) {
        let mut cell: Vec<i64> = lo.to_vec();
        loop {
            let off = self.offset(&cell);
            self.bits[off] = true;
            // Odometer over the cell ranges, last axis fastest.
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                cell[axis] += 1;
                if cell[axis] < hi[axis] {
                    break;
                }
                cell[axis] = lo[axis];
                if axis == 0 {
                    return;
                }
            }
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!((self.dim, self.q), (other.dim, other.q));
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect();
        BitGrid { dim: self.dim, q: self.q, side: self.side, bits }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn subtract(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !(a && b))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Exact volume: `count / q^dim`.
    pub fn volume(&self) -> Rat {
        rat(self.count() as i64, 1) / rat(self.q, 1).pow(self.dim as i32)
    }

    /// Shift by whole cells; `None` if any filled cell leaves the window.
    pub fn translate(&self, shift: &[i64]) -> Option<Self> {
        let mut out = Self::empty(self.dim, self.q);
        let mut cell = vec![0i64; self.dim];
        for &bit in &self.bits {
            if bit {
                let mut target = Vec::with_capacity(self.dim);
                for (c, s) in cell.iter().zip(shift) {
                    let t = c + s;
                    if !(0..self.side).contains(&t) {
                        return None;
                    }
                    target.push(t);
                }
                let toff = out.offset(&target);
                out.bits[toff] = true;
            }
            // Advance the odometer.
            for axis in (0..self.dim).rev() {
                cell[axis] += 1;
                if cell[axis] < self.side {
                    break;
                }
                cell[axis] = 0;
            }
        }
        Some(out)
    }

    pub fn contains_cell(&self, cell: &[i64]) -> bool {
        self.bits[self.offset(cell)]
    }
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

/// Deterministic generator with convenience draws.
pub struct Gen(pub SplitMix64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(SplitMix64::new(seed))
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.0.below(bound)
    }

    pub fn usize_below(&mut self, bound: usize) -> usize {
        self.0.below(bound as u64) as usize
    }

    pub fn range_i64(&mut self, lo: i64, hi_exclusive: i64) -> i64 {
        lo + self.0.below((hi_exclusive - lo) as u64) as i64
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.usize_below(xs.len())]
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.0.below(den) < num
    }

    /// `k` distinct values from `0..m`, ascending.
    pub fn distinct(&mut self, k: usize, m: usize) -> Vec<usize> {
        assert!(k <= m);
        let mut pool: Vec<usize> = (0..m).collect();
        for i in 0..k {
            let j = i + self.usize_below(m - i);
            pool.swap(i, j);
        }
        let mut out = pool[..k].to_vec();
        out.sort_unstable();
        out
    }
}

/// A random box with endpoints on `(1/q)ℤ` inside the window.
pub fn rand_lattice_box(g: &mut Gen, dim: usize, q: i64) -> Aabb<Rat> {
    let side = WINDOW * q;
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for _ in 0..dim {
        let a = g.range_i64(0, side);
        let b = g.range_i64(a + 1, side + 1);
        lo.push(rat(a, q));
        hi.push(rat(b, q));
    }
    Aabb::new(lo, hi).expect("nonempty by construction")
}

/// A random canonical set of up to `max_boxes` lattice boxes (overlaps are
/// merged away by canonicalization).
pub fn rand_lattice_set(g: &mut Gen, dim: usize, q: i64, max_boxes: usize) -> BoxSet<Rat> {
    let count = 1 + g.usize_below(max_boxes);
    let boxes: Vec<Aabb<Rat>> = (0..count).map(|_| rand_lattice_box(g, dim, q)).collect();
    BoxSet::from_boxes(dim, boxes).expect("lattice boxes are well-formed")
}

/// 1-D schedule with cubes `[0,2)`, `[0,8)`, `[0,27)` and translation sets
/// `{0,3}` and `{0,9}`; both levels satisfy the strong containment margin.
pub fn toy_schedule() -> CFSchedule<Rat> {
    CFSchedule::validate(
        1,
        vec![
            CFLevel { h: rint(2), c_next: vec![vec![rint(0)], vec![rint(3)]] },
            CFLevel { h: rint(8), c_next: vec![vec![rint(0)], vec![rint(9)]] },
            CFLevel { h: rint(27), c_next: Vec::new() },
        ],
        Containment::Strong,
    )
    .expect("toy schedule is strong-valid")
}

/// A random valid strong schedule.
///
/// Each level places its translations along one axis (rotating with the
/// level) with spacing `h + 1 + jitter`, so copies are pairwise `> h` apart
/// on that axis (independence) whatever the other axes do; the next cube
/// side is sized from the worst corner plus the unit margin plus random
/// slack (strong containment).  The result is re-checked by the validator.
pub fn rand_strong_schedule(g: &mut Gen, dim: usize, levels: usize) -> CFSchedule<Rat> {
    assert!(levels >= 2);
    let jitters = [rint(0), rat(1, 2), rint(1)];
    let mut h = (*g.pick(&[rint(1), rat(3, 2), rint(2)])).clone();
    let mut out: Vec<CFLevel<Rat>> = Vec::with_capacity(levels);
    for k in 0..levels - 1 {
        let r = 2 + g.usize_below(2);
        let axis = k % dim;
        let spacing = h.clone() + rint(1) + (*g.pick(&jitters)).clone();
        let mut c_next = Vec::with_capacity(r);
        let mut worst = vec![rint(0); dim];
        for i in 0..r {
            let mut c = Vec::with_capacity(dim);
            for a in 0..dim {
                let comp = if a == axis {
                    spacing.clone() * rint(i as i64)
                } else {
                    (*g.pick(&jitters)).clone()
                };
                if comp > worst[a] {
                    worst[a] = comp.clone();
                }
                c.push(comp);
            }
            c_next.push(c);
        }
        let slack = (*g.pick(&[rint(0), rat(1, 2)])).clone();
        let h_next = worst.iter().cloned().fold(rint(0), |m, w| if w > m { w } else { m })
            + h.clone()
            + rint(1)
            + slack;
        out.push(CFLevel { h: h.clone(), c_next });
        h = h_next;
    }
    out.push(CFLevel { h, c_next: Vec::new() });
    CFSchedule::validate(dim, out, Containment::Strong).expect("generator output is strong-valid")
}

/// A cylinder at `level` whose base is a union of `k` distinct cells of the
/// uniform `m`-per-axis grid on the level cube.
pub fn rand_cell_cylinder(
    g: &mut Gen,
    s: &CFSchedule<Rat>,
    level: usize,
    m: usize,
    k: usize,
) -> Cylinder<Rat> {
    let dim = s.dim();
    let h = s.h(level).expect("level in range").clone();
    let cell = h / rint(m as i64);
    let total = m.pow(dim as u32);
    let picks = g.distinct(k, total);
    let boxes: Vec<Aabb<Rat>> = picks
        .iter()
        .map(|&flat| {
            let mut rest = flat;
            let mut digits = vec![0usize; dim];
            for d in digits.iter_mut().rev() {
                *d = rest % m;
                rest /= m;
            }
            let lo: Vec<Rat> = digits.iter().map(|&d| cell.clone() * rint(d as i64)).collect();
            let hi: Vec<Rat> =
                digits.iter().map(|&d| cell.clone() * rint(d as i64 + 1)).collect();
            Aabb::new(lo, hi).expect("cell box")
        })
        .collect();
    let base = BoxSet::from_boxes(dim, boxes).expect("cells are well-formed");
    s.cylinder(level, base).expect("cells sit inside the cube")
}

// ---------------------------------------------------------------------------
// Transcription oracle for the transport recursion
// ---------------------------------------------------------------------------

/// Outcome of the flat recursion: parts at one common level.
pub struct OracleFill {
    /// First index whose cumulative transported mass strictly exceeds half.
    pub n: usize,
    /// Common level of all parts.
    pub level: usize,
    /// `A_0, …, A_N` as bare box sets in the level cube.
    pub parts: Vec<BoxSet<Rat>>,
    /// Cylinder measures of the parts.
    pub masses: Vec<Rat>,
    /// Cylinder measure of `A`.
    pub total: Rat,
}

/// Raise a base one level: the union of translated copies over the level's
/// translation set (deliberately *not* the engine's lift — direct formula).
pub fn raise_once(s: &CFSchedule<Rat>, set: &BoxSet<Rat>, level: usize) -> BoxSet<Rat> {
    let mut out = BoxSet::empty(s.dim()).expect("dim ok");
    for c in s.c_next(level).expect("level in range") {
        let copy = set.translate(c).expect("translate");
        out = out.union(&copy).expect("union");
    }
    out
}

/// Raise a base from `from` to `to` by repeated single raises.
pub fn raise_to(
    s: &CFSchedule<Rat>,
    set: &BoxSet<Rat>,
    from: usize,
    to: usize,
) -> BoxSet<Rat> {
    let mut cur = set.clone();
    for level in from..to {
        cur = raise_once(s, &cur, level);
    }
    cur
}

/// Direct transcription of the transport recursion, kept deliberately plain:
/// whole-set arithmetic at one climbing level, no windows, no per-part
/// remainder accounting.  At step `i` the still-unmoved part of `A` is
/// translated by `i·q`, intersected with the still-unfilled part of `B`, and
/// the hit is pulled back; the level climbs exactly when the translated set
/// no longer fits inside the current cube.
pub fn transcription_fill(
    s: &CFSchedule<Rat>,
    q: &[Rat],
    a: &Cylinder<Rat>,
    b: &Cylinder<Rat>,
    budget: usize,
) -> Result<OracleFill, String> {
    let top = s.len() - 1;
    let mut level = a.level().max(b.level());
    let mut ua = raise_to(s, a.base(), a.level(), level);
    let mut ub = raise_to(s, b.base(), b.level(), level);
    let total = ua.volume() / s.measure_divisor(level).expect("divisor");
    if total != ub.volume() / s.measure_divisor(level).expect("divisor") {
        return Err("unequal measures".into());
    }
    if total == rint(0) {
        return Err("zero mass".into());
    }
    let half = total.clone() / rint(2);
    let mut parts: Vec<BoxSet<Rat>> = Vec::new();

    for i in 0..budget {
        let shift: Vec<Rat> = q.iter().map(|x| x.clone() * rint(i as i64)).collect();
        // Climb until A's unmoved remainder, translated, fits in the cube.
        loop {
            let shifted = ua.translate(&shift).expect("translate");
            let cube = s.cube_at(level).expect("cube");
            if shifted.is_subset(&cube).expect("subset") {
                break;
            }
            if level == top {
                return Err(format!("schedule too short at step {i}"));
            }
            ua = raise_once(s, &ua, level);
            ub = raise_once(s, &ub, level);
            for p in parts.iter_mut() {
                *p = raise_once(s, p, level);
            }
            level += 1;
        }
        let shifted = ua.translate(&shift).expect("translate");
        let hit = shifted.intersect(&ub).expect("intersect");
        let neg: Vec<Rat> = shift.iter().map(|x| -x.clone()).collect();
        let part = hit.translate(&neg).expect("translate back");
        ua = ua.subtract(&part).expect("subtract");
        ub = ub.subtract(&hit).expect("subtract");
        parts.push(part);
        let div = s.measure_divisor(level).expect("divisor");
        let moved =
            parts.iter().map(|p| p.volume()).fold(rint(0), |acc, v| acc + v) / div.clone();
        if moved > half {
            let masses: Vec<Rat> = parts.iter().map(|p| p.volume() / div.clone()).collect();
            return Ok(OracleFill { n: i, level, parts, masses, total });
        }
    }
    Err(format!("budget {budget} exhausted"))
}

// ---------------------------------------------------------------------------
// Randomized batteries (shared by the per-module suites and acceptance)
// ---------------------------------------------------------------------------

/// Box-algebra oracle battery: `cases_per_op` randomized cases per operation
/// (union, intersect, subtract, translate, volume), dims 1–3, endpoints on
/// `(1/q)ℤ` with `q ≤ 16`, window `[0, 8)`.  Subset/disjoint predicates are
/// cross-checked alongside intersection.  Returns the number of operation
/// cases checked.
pub fn boxset_battery(seed: u64, cases_per_op: usize) -> usize {
    let mut g = Gen::new(seed);
    let mut checked = 0usize;

    // Union / intersect / subtract, plus the boolean predicates.
    for case in 0..cases_per_op {
        let dim = 1 + case % 3;
        let q = 1 + g.range_i64(0, 16);
        let x = rand_lattice_set(&mut g, dim, q, 3);
        let y = rand_lattice_set(&mut g, dim, q, 3);
        let gx = BitGrid::from_set(&x, q);
        let gy = BitGrid::from_set(&y, q);

        let u = x.union(&y).expect("union");
        assert_eq!(BitGrid::from_set(&u, q), gx.union(&gy), "union raster mismatch");
        assert_eq!(u.volume(), gx.union(&gy).volume(), "union volume mismatch");

        let i = x.intersect(&y).expect("intersect");
        assert_eq!(BitGrid::from_set(&i, q), gx.intersect(&gy), "intersect raster mismatch");
        assert_eq!(
            x.is_subset(&y).expect("subset"),
            gx.is_subset(&gy),
            "subset predicate mismatch"
        );
        assert_eq!(
            x.is_disjoint(&y).expect("disjoint"),
            gx.is_disjoint(&gy),
            "disjoint predicate mismatch"
        );

        let s = x.subtract(&y).expect("subtract");
        assert_eq!(BitGrid::from_set(&s, q), gx.subtract(&gy), "subtract raster mismatch");
        checked += 3;
    }

    // Translation, constrained to stay inside the window so the oracle can
    // follow.
    for case in 0..cases_per_op {
        let dim = 1 + case % 3;
        let q = 1 + g.range_i64(0, 16);
        let x = rand_lattice_set(&mut g, dim, q, 3);
        let gx = BitGrid::from_set(&x, q);
        let bb = x.bounding_box().expect("nonempty");
        let side = WINDOW * q;
        let mut shift_cells = Vec::with_capacity(dim);
        let mut shift = Vec::with_capacity(dim);
        for a in 0..dim {
            let lo = lattice_index(&bb.lo()[a], q);
            let hi = lattice_index(&bb.hi()[a], q);
            let cells = g.range_i64(-lo, side - hi + 1);
            shift_cells.push(cells);
            shift.push(rat(cells, q));
        }
        let moved = x.translate(&shift).expect("translate");
        let oracle = gx.translate(&shift_cells).expect("oracle translate in window");
        assert_eq!(BitGrid::from_set(&moved, q), oracle, "translate raster mismatch");
        assert_eq!(moved.volume(), x.volume(), "translate must preserve volume");
        checked += 1;
    }

    // Volume.
    for case in 0..cases_per_op {
        let dim = 1 + case % 3;
        let q = 1 + g.range_i64(0, 16);
        let x = rand_lattice_set(&mut g, dim, q, 4);
        assert_eq!(x.volume(), BitGrid::from_set(&x, q).volume(), "volume mismatch");
        checked += 1;
    }

    checked
}

/// Cylinder-calculus battery over random valid strong schedules (≤ 5 levels,
/// d ≤ 2): lift preserves measure exactly; the partial translation splits
/// measure exactly; composing two zero-remainder translations equals the
/// combined translation; and an in-range translation acts verbatim on the
/// base.  Returns (schedules, checks, group-law compositions verified).
pub fn cylinder_battery(seed: u64, schedules: usize) -> (usize, usize, usize) {
    let mut g = Gen::new(seed);
    let mut checks = 0usize;
    let mut compositions = 0usize;

    for i in 0..schedules {
        let dim = 1 + i % 2;
        let levels = 2 + g.usize_below(4);
        let s = rand_strong_schedule(&mut g, dim, levels);
        let top = s.len() - 1;

        // (a) Lift preserves measure.
        let level = g.usize_below(top.max(1));
        let m = 2 + g.usize_below(2);
        let total = m.pow(dim as u32);
        let k = 1 + g.usize_below(total.min(4));
        let c = rand_cell_cylinder(&mut g, &s, level, m, k);
        let to = level + g.usize_below(top - level + 1);
        let lifted = s.lift(&c, to).expect("lift");
        assert_eq!(
            s.cylinder_measure(&lifted).expect("measure"),
            s.cylinder_measure(&c).expect("measure"),
            "lift changed the measure"
        );
        checks += 1;

        // (b) Exact mass split under the partial translation, any direction.
        let cell = s.h(level).expect("h").clone() / rint(m as i64);
        let steps = [-2i64, -1, 0, 1, 2];
        let gv: Vec<Rat> =
            (0..dim).map(|_| cell.clone() * rint(*g.pick(&steps))).collect();
        match s.apply_tg(&c, &gv, &rint(1)) {
            Ok(t) => {
                let lhs = s.cylinder_measure(&t.image).expect("measure").into_value()
                    + s.cylinder_measure(&t.remainder).expect("measure").into_value();
                assert_eq!(
                    lhs,
                    s.cylinder_measure(&c).expect("measure").into_value(),
                    "image + remainder must carry the full mass"
                );
                checks += 1;
            }
            Err(CfError::ScheduleTooShort { .. }) => {}
            Err(e) => panic!("unexpected transport error: {e}"),
        }

        // (c) Group law on zero-remainder compositions (nonnegative shifts,
        // tight remainder threshold so the climb runs to absorption).
        let eps = rat(1, 1000);
        let nonneg = [0i64, 1, 2];
        let g1: Vec<Rat> =
            (0..dim).map(|_| cell.clone() * rint(*g.pick(&nonneg))).collect();
        let g2: Vec<Rat> =
            (0..dim).map(|_| cell.clone() * rint(*g.pick(&nonneg))).collect();
        let g12: Vec<Rat> = g1.iter().zip(&g2).map(|(a, b)| a.clone() + b.clone()).collect();
        let all = (|| -> Result<_, CfError> {
            let t1 = s.apply_tg(&c, &g1, &eps)?;
            let t2 = s.apply_tg(&t1.image, &g2, &eps)?;
            let t12 = s.apply_tg(&c, &g12, &eps)?;
            Ok((t1, t2, t12))
        })();
        if let Ok((t1, t2, t12)) = all {
            let zero_remainders = t1.remainder.base().volume() == rint(0)
                && t2.remainder.base().volume() == rint(0)
                && t12.remainder.base().volume() == rint(0);
            if zero_remainders {
                let common = t2.image.level().max(t12.image.level());
                let a = s.lift(&t2.image, common).expect("lift");
                let b = s.lift(&t12.image, common).expect("lift");
                assert_eq!(a, b, "group law failed on zero-remainder composition");
                compositions += 1;
                checks += 1;
            }
        }

        // (d) In-range translation acts verbatim on the base: a one-cell
        // base moved to another cell of the same level cube.
        let from = g.usize_below(total);
        let to_cell = g.usize_below(total);
        let single = rand_cell_cylinder(&mut g, &s, level, m, 1);
        let delta: Vec<Rat> = {
            // Decompose flat indices into per-axis digits.
            let digits = |mut flat: usize| {
                let mut d = vec![0usize; dim];
                for slot in d.iter_mut().rev() {
                    *slot = flat % m;
                    flat /= m;
                }
                d
            };
            let df = digits(from);
            let dt = digits(to_cell);
            (0..dim)
                .map(|a| cell.clone() * (rint(dt[a] as i64) - rint(df[a] as i64)))
                .collect()
        };
        let shifted_base = single.base().translate(&delta).expect("translate");
        let cube = s.cube_at(level).expect("cube");
        if shifted_base.is_subset(&cube).expect("subset") {
            let t = s.apply_tg(&single, &delta, &rint(1)).expect("in-range transport");
            assert_eq!(t.image.level(), level, "in-range action must not climb");
            assert_eq!(t.image.base(), &shifted_base, "in-range action must act verbatim");
            assert_eq!(t.remainder.base().volume(), rint(0), "in-range remainder nonzero");
            checks += 1;
        }
    }
    (schedules, checks, compositions)
}

/// Outcome counters of [`fill_battery`].
pub struct FillBatteryOutcome {
    /// Instances that ran to success and were cross-checked.
    pub instances: usize,
    /// Total candidate draws (unsuccessful fills are skipped, not hidden).
    pub attempts: usize,
}

/// Transport-recursion battery: every counted instance is a successful fill
/// with nonnegative shift on a strong schedule whose `a.level + Q·N` level
/// exists, and on it the engine must match the flat transcription oracle
/// exactly — same filling number, same masses, exact base equality after
/// re-expression at the bound level — plus minimality of the filling number.
/// Draws that cannot fill within the budget, or whose bound level lies past
/// the schedule top, are skipped openly and show up in `attempts`.
pub fn fill_battery(seed: u64, instances: usize) -> FillBatteryOutcome {
    let mut g = Gen::new(seed);
    let mut done = 0usize;
    let mut attempts = 0usize;
    let budget = 8usize;
    let opts = FillOptions { budget, ..FillOptions::default() };

    while done < instances {
        attempts += 1;
        assert!(
            attempts <= instances * 80,
            "generator keeps producing unusable instances ({done}/{instances})"
        );
        let dim = if attempts % 5 == 0 { 2 } else { 1 };
        let levels = 4 + g.usize_below(2);
        let s = rand_strong_schedule(&mut g, dim, levels);
        let top = s.len() - 1;
        let level = if g.chance(2, 3) { 0 } else { 1 };
        let m = *g.pick(&[2usize, 4]);
        let total = m.pow(dim as u32);
        let k = 1 + g.usize_below(total);
        let a = rand_cell_cylinder(&mut g, &s, level, m, k);
        let b = rand_cell_cylinder(&mut g, &s, level, m, k);
        // Nonnegative shifts, mostly below the independence margin: {0, 1/2,
        // 1} with weight on the middle and an occasional 3/2.
        let halves = [0i64, 1, 1, 2, 2, 3];
        let q: Vec<Rat> = if g.chance(1, 10) {
            vec![rint(0); dim]
        } else {
            (0..dim).map(|_| rat(*g.pick(&halves), 2)).collect()
        };

        let engine = match fill(&s, &q, &a, &b, &opts) {
            Ok(r) => r,
            Err(_) => continue, // infeasible draw at this budget; skip openly
        };

        // The a-priori bound level must exist for the re-expression check.
        let work = a.level() + engine.big_q as usize * engine.n;
        assert_eq!(engine.work_level, work, "bound-level formula violated");
        if work > top {
            continue;
        }

        let oracle = transcription_fill(&s, &q, &a, &b, budget)
            .expect("oracle must fill whenever the engine does");

        // Same filling number and exact masses.
        assert_eq!(engine.n, oracle.n, "filling number mismatch");
        assert_eq!(engine.parts.len(), oracle.parts.len());
        for (em, om) in engine.masses.iter().zip(&oracle.masses) {
            assert_eq!(em.value(), om, "part mass mismatch");
        }
        assert_eq!(engine.total.value(), &oracle.total, "total mass mismatch");

        // Minimality: dropping the last part leaves at most half the mass.
        let half = engine.total.value().clone() / rint(2);
        let sum_all: Rat = engine
            .masses
            .iter()
            .map(|m| m.value().clone())
            .fold(rint(0), |acc, v| acc + v);
        let last = engine.masses[engine.n].value().clone();
        assert!(sum_all.clone() > half, "filled mass must strictly exceed half");
        assert!(sum_all - last <= half, "filling number is not minimal");

        // Re-expression at the bound level: each part, lifted there, is an
        // exact cylinder whose base equals the oracle's raw set raised to
        // the same level, with measure preserved.
        assert!(engine.parts_level <= work, "parts stored above the bound");
        assert!(oracle.level <= work, "oracle climbed above the bound");
        for ((ep, op), om) in engine.parts.iter().zip(&oracle.parts).zip(&oracle.masses) {
            let lifted = s.lift(ep, work).expect("re-expression at the bound");
            let oracle_base = raise_to(&s, op, oracle.level, work);
            assert_eq!(lifted.base(), &oracle_base, "base mismatch at the bound level");
            assert_eq!(
                s.cylinder_measure(&lifted).expect("measure").value(),
                om,
                "re-expression changed the measure"
            );
        }

        done += 1;
    }
    FillBatteryOutcome { instances: done, attempts }
}
