//! Tower schedules, cylinder sets, and the partially-defined translation
//! action.
//!
//! A *schedule* is the combinatorial skeleton of a cutting-and-stacking
//! construction over ℝ^d: a chain of half-open cubes `F_0, F_1, …` (each
//! `F_n = [0, h_n)^d`) together with finite translation sets `C_1, C_2, …`
//! subject to two structural conditions linking level `n` to level `n+1`:
//!
//! * **independence** — `(F_n − F_n) ∩ (C_{n+1} − C_{n+1}) = {0}`, so the
//!   translated copies `F_n + c`, `c ∈ C_{n+1}`, are pairwise disjoint;
//! * **containment** — `F_n + C_{n+1} ⊆ F_{n+1}`, so all those copies sit
//!   inside the next cube.  In *strong* mode the stricter
//!   `a + F_n + C_{n+1} ⊆ F_{n+1}` for every `a ≥ 0` with `‖a‖_∞ ≤ 1` is
//!   enforced (equivalently, at the worst corner `a = (1,…,1)`), leaving a
//!   unit margin that lets translations be absorbed level by level.
//!
//! A *cylinder* `[A]_n` is a measurable set named by a level `n` and a base
//! `A ⊆ F_n`; the same set reappears one level up with base
//! `⊔_{c ∈ C_{n+1}} (A + c)` ([`CFSchedule::lift`]), and its measure is
//! `λ(A) / (#C_1 ⋯ #C_n)` — exactly, as a rational.  Translation by `g` acts
//! on in-range cylinders by shifting the base ([`CFSchedule::apply_tg`]); the
//! out-of-range remainder is returned explicitly rather than swept under a
//! rug, and shrinks as the level grows.

use std::fmt;
use std::ops::{Add, AddAssign};


use thiserror::Error;

use crate::boxset::{Aabb, BoxError, BoxSet};
use crate::scalar::Scalar;

/// One level of a schedule: the cube edge `h_n` and the translation set
/// `C_{n+1}` carrying copies of `F_n` into `F_{n+1}`.
///
/// `c_next` is empty exactly at the open tail of the schedule (the last
/// level, whose successor does not exist yet).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFLevel<S> {
    /// Edge length of the cube `F_n = [0, h_n)^d`.
    pub h: S,
    /// The translation vectors of `C_{n+1}`, each of length `d`.
    pub c_next: Vec<Vec<S>>,
}

/// Containment regime a schedule is validated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    /// Plain containment `F_n + C_{n+1} ⊆ F_{n+1}`.
    Plain,
    /// Unit-margin containment `a + F_n + C_{n+1} ⊆ F_{n+1}` for all
    /// `0 ≤ a`, `‖a‖_∞ ≤ 1`.
    Strong,
}

/// Validation failures, each naming the lowest offending level.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidateError {
    /// No levels at all.
    #[error("schedule has no levels")]
    EmptySchedule,
    /// `h ≤ 0` at the named level.
    #[error("level {level}: cube edge must be positive")]
    BadCube { level: usize },
    /// A translation vector of the wrong length.
    #[error("level {level}: translation vector has length {got}, expected {expected}")]
    DimMismatch { level: usize, expected: usize, got: usize },
    /// Fewer than two translations at an interior level.
    #[error("level {level}: an interior level needs at least two translations")]
    TooFewTranslations { level: usize },
    /// Two identical vectors in one translation set.
    #[error("level {level}: duplicate translation vector")]
    DuplicateTranslation { level: usize },
    /// Translations on the last level, which has no successor cube to land in.
    #[error("level {level}: last level must have an empty translation set")]
    TrailingTranslations { level: usize },
    /// Two translations closer than the cube edge on every axis: the copies
    /// they carry would overlap.
    #[error("level {level}: translation copies overlap (independence fails)")]
    IndependenceViolation { level: usize },
    /// A translated copy of the cube leaves the next cube.
    #[error("level {level}: translated copy leaves the next cube (containment fails)")]
    ContainmentViolation { level: usize },
    /// A translated copy fits, but not with the required unit margin.
    #[error("level {level}: translated copy lacks the unit margin (strong containment fails)")]
    StrongContainmentViolation { level: usize },
}

/// Errors from cylinder-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfError {
    /// Level index outside the schedule.
    #[error("level {level} out of range: schedule has {len} levels")]
    LevelOutOfRange { level: usize, len: usize },
    /// A cylinder base that is not inside its level cube.
    #[error("cylinder base leaves the level-{level} cube")]
    BaseOutsideCube { level: usize },
    /// Requested lift below the cylinder's own level.
    #[error("cannot lift from level {from} down to level {to}")]
    LiftDownward { from: usize, to: usize },
    /// The remainder budget must be positive.
    #[error("remainder budget must be positive")]
    BadEps,
    /// No level of the schedule brings the out-of-range remainder under the
    /// budget.
    #[error("schedule too short: remainder still {remainder} at top level {top}")]
    ScheduleTooShort { top: usize, remainder: String },
    /// Power exponent 0, or a powered translation set too large to build.
    #[error("bad power: {0}")]
    BadPower(String),
    /// Geometry error bubbled up from box algebra (dimension mixing).
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// An exact non-negative measure value.
///
/// Distinct from a raw volume: cylinder measures carry the product-of-counts
/// normalization, and keeping them in their own type prevents mixing the two.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Measure<S>(S);

impl<S: Scalar> Measure<S> {
    /// Wrap a non-negative scalar as a measure.
    ///
    /// # Panics
    /// If `value < 0`.
    pub fn new(value: S) -> Self {
        assert!(!value.is_negative(), "negative measure");
        Measure(value)
    }

    /// The zero measure.
    pub fn zero() -> Self {
        Measure(S::zero())
    }

    /// The underlying scalar.
    pub fn value(&self) -> &S {
        &self.0
    }

    /// Move the underlying scalar out.
    pub fn into_value(self) -> S {
        self.0
    }

    /// Whether the measure is zero.
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// The exact ratio `self / whole`.
    ///
    /// # Panics
    /// If `whole` is zero.
    pub fn frac_of(&self, whole: &Measure<S>) -> S {
        assert!(!whole.is_zero(), "ratio against zero measure");
        self.0.clone() / whole.0.clone()
    }

    /// Half of the measure, exactly.
    pub fn half(&self) -> Measure<S> {
        Measure(self.0.clone() / S::from_int(2))
    }
}

impl<S: Scalar> Add for Measure<S> {
    type Output = Measure<S>;
    fn add(self, rhs: Measure<S>) -> Measure<S> {
        Measure(self.0 + rhs.0)
    }
}

impl<S: Scalar> AddAssign for Measure<S> {
    fn add_assign(&mut self, rhs: Measure<S>) {
        self.0 = self.0.clone() + rhs.0;
    }
}

impl<S: Scalar> fmt::Display for Measure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A measurable set named by a level and a base inside that level's cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder<S> {
    level: usize,
    base: BoxSet<S>,
}

impl<S: Scalar> Cylinder<S> {
    /// The level the base lives at.
    pub fn level(&self) -> usize {
        self.level
    }

    /// The base set `A ⊆ F_level`.
    pub fn base(&self) -> &BoxSet<S> {
        &self.base
    }

    /// Disassemble into `(level, base)`.
    pub fn into_parts(self) -> (usize, BoxSet<S>) {
        (self.level, self.base)
    }

    /// Whether the named set is empty.
    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

/// The result of applying a translation to a cylinder: the translated
/// in-range part and the untranslated out-of-range remainder, both at the
/// level where the remainder first dipped under the requested budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transport<S> {
    /// `[A_in + g]` — the image of the in-range part.
    pub image: Cylinder<S>,
    /// `[A ∖ A_in]` — what could not be moved at this level.
    pub remainder: Cylinder<S>,
}

/// A validated schedule: the cubes, the translation sets, and the containment
/// regime they were checked under.
///
/// Schedules are append-only: levels can be added on top
/// ([`CFSchedule::push_level`]) but existing levels never change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFSchedule<S> {
    dim: usize,
    levels: Vec<CFLevel<S>>,
    mode: Containment,
}

impl<S: Scalar> CFSchedule<S> {
    /// Validate raw levels into a schedule.
    ///
    /// Checks, for every consecutive pair of levels: positive cube edges,
    /// translation-vector dimensions, at least two distinct translations,
    /// independence, and (strong) containment.  The last level must carry no
    /// translations — it is the open tail.
    pub fn validate(
        dim: usize,
        levels: Vec<CFLevel<S>>,
        mode: Containment,
    ) -> Result<Self, ValidateError> {
        if levels.is_empty() {
            return Err(ValidateError::EmptySchedule);
        }
        for (n, lv) in levels.iter().enumerate() {
            if lv.h <= S::zero() {
                return Err(ValidateError::BadCube { level: n });
            }
        }
        let last = levels.len() - 1;
        if !levels[last].c_next.is_empty() {
            return Err(ValidateError::TrailingTranslations { level: last });
        }
        for n in 0..last {
            Self::validate_link(dim, n, &levels[n], &levels[n + 1].h, mode)?;
        }
        Ok(CFSchedule { dim, levels, mode })
    }

    /// Check the conditions linking level `n` (cube `h`, translations
    /// `c_next`) to the next cube edge `h_next`.
    fn validate_link(
        dim: usize,
        n: usize,
        lv: &CFLevel<S>,
        h_next: &S,
        mode: Containment,
    ) -> Result<(), ValidateError> {
        let c = &lv.c_next;
        if c.len() < 2 {
            return Err(ValidateError::TooFewTranslations { level: n });
        }
        for v in c {
            if v.len() != dim {
                return Err(ValidateError::DimMismatch { level: n, expected: dim, got: v.len() });
            }
        }
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                if c[i] == c[j] {
                    return Err(ValidateError::DuplicateTranslation { level: n });
                }
                // Independence: some axis must separate the two copies by at
                // least the cube edge, otherwise the difference of the two
                // translations lies in the open cube difference (−h, h)^d.
                let separated = c[i]
                    .iter()
                    .zip(&c[j])
                    .any(|(a, b)| (a.clone() - b.clone()).abs() >= lv.h);
                if !separated {
                    return Err(ValidateError::IndependenceViolation { level: n });
                }
            }
        }
        for v in c {
            for x in v {
                // Containment: [0,h)^d + v ⊆ [0,h')^d needs v ≥ 0 and
                // v + h ≤ h'; the strong margin adds one more unit.
                if x.is_negative() || x.clone() + lv.h.clone() > *h_next {
                    return Err(ValidateError::ContainmentViolation { level: n });
                }
                if mode == Containment::Strong
                    && x.clone() + lv.h.clone() + S::one() > *h_next
                {
                    return Err(ValidateError::StrongContainmentViolation { level: n });
                }
            }
        }
        Ok(())
    }

    /// A fresh single-level schedule `F_0 = [0, h)^dim`.
    pub fn seed(dim: usize, h: S, mode: Containment) -> Result<Self, ValidateError> {
        Self::validate(dim, vec![CFLevel { h, c_next: Vec::new() }], mode)
    }

    /// Append one level: attach the translation set `c` to the current top
    /// and push the new cube `h_next` above it.  Validates only the new link.
    pub fn push_level(&mut self, c: Vec<Vec<S>>, h_next: S) -> Result<(), ValidateError> {
        let top = self.levels.len() - 1;
        if h_next <= S::zero() {
            return Err(ValidateError::BadCube { level: top + 1 });
        }
        let trial = CFLevel { h: self.levels[top].h.clone(), c_next: c };
        Self::validate_link(self.dim, top, &trial, &h_next, self.mode)?;
        self.levels[top].c_next = trial.c_next;
        self.levels.push(CFLevel { h: h_next, c_next: Vec::new() });
        Ok(())
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of levels (the top level index is `len() − 1`).
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    /// Whether the schedule is the bare seed with no translations yet.
    pub fn is_seed_only(&self) -> bool {
        self.levels.len() == 1
    }

    /// Index of the top level.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// The validated levels.
    pub fn levels(&self) -> &[CFLevel<S>] {
        &self.levels
    }

    /// The containment regime this schedule was validated under.
    pub fn mode(&self) -> Containment {
        self.mode
    }

    /// Whether the schedule carries the strong containment margin.
    pub fn is_strong(&self) -> bool {
        self.mode == Containment::Strong
    }

    fn check_level(&self, level: usize) -> Result<(), CfError> {
        if level >= self.levels.len() {
            return Err(CfError::LevelOutOfRange { level, len: self.levels.len() });
        }
        Ok(())
    }

    /// Cube edge `h_n`.
    pub fn h(&self, level: usize) -> Result<&S, CfError> {
        self.check_level(level)?;
        Ok(&self.levels[level].h)
    }

    /// The cube `F_n = [0, h_n)^d` as a box set.
    pub fn cube_at(&self, level: usize) -> Result<BoxSet<S>, CfError> {
        self.check_level(level)?;
        Ok(BoxSet::cube(self.dim, &self.levels[level].h)?)
    }

    /// The translation set `C_{n+1}` sitting on level `n`.
    pub fn c_next(&self, level: usize) -> Result<&[Vec<S>], CfError> {
        self.check_level(level)?;
        Ok(&self.levels[level].c_next)
    }

    /// `#C_1 ⋯ #C_n`, the measure normalizer at level `n`.
    pub fn measure_divisor(&self, level: usize) -> Result<S, CfError> {
        self.check_level(level)?;
        let mut d = S::one();
        for lv in &self.levels[..level] {
            d = d * S::from_int(lv.c_next.len() as i64);
        }
        Ok(d)
    }

    /// Make a cylinder after checking the base sits inside the level cube.
    pub fn cylinder(&self, level: usize, base: BoxSet<S>) -> Result<Cylinder<S>, CfError> {
        self.check_level(level)?;
        if base.dim() != self.dim {
            return Err(CfError::Box(BoxError::DimMismatch {
                expected: self.dim,
                got: base.dim(),
            }));
        }
        if let Some(bb) = base.bounding_box() {
            let h = &self.levels[level].h;
            let inside = bb.lo().iter().all(|x| !x.is_negative())
                && bb.hi().iter().all(|x| x <= h);
            if !inside {
                return Err(CfError::BaseOutsideCube { level });
            }
        }
        Ok(Cylinder { level, base })
    }

    /// The full-cube cylinder `[F_n]_n`.
    pub fn full_cylinder(&self, level: usize) -> Result<Cylinder<S>, CfError> {
        let cube = self.cube_at(level)?;
        self.cylinder(level, cube)
    }

    /// Exact measure `λ(A) / (#C_1 ⋯ #C_n)` of a cylinder.
    pub fn cylinder_measure(&self, c: &Cylinder<S>) -> Result<Measure<S>, CfError> {
        let d = self.measure_divisor(c.level)?;
        Ok(Measure::new(c.base.volume() / d))
    }

    /// Express the same set one level up: replace the base by
    /// `⊔_{v ∈ C_{n+1}} (A + v)`.
    fn lift_once(&self, c: &Cylinder<S>) -> Result<Cylinder<S>, CfError> {
        let n = c.level;
        self.check_level(n + 1)?;
        let cset = &self.levels[n].c_next;
        debug_assert!(!cset.is_empty());
        let mut boxes: Vec<Aabb<S>> = Vec::with_capacity(c.base.len() * cset.len());
        for v in cset {
            for b in c.base.boxes() {
                boxes.push(b.translate(v)?);
            }
        }
        let base = BoxSet::from_boxes(self.dim, boxes)?;
        self.cylinder(n + 1, base)
    }

    /// Re-express a cylinder at level `m ≥ c.level`.  The named point set is
    /// unchanged; only the description moves up the tower.
    pub fn lift(&self, c: &Cylinder<S>, m: usize) -> Result<Cylinder<S>, CfError> {
        if m < c.level {
            return Err(CfError::LiftDownward { from: c.level, to: m });
        }
        self.check_level(m)?;
        let mut cur = c.clone();
        while cur.level < m {
            cur = self.lift_once(&cur)?;
        }
        Ok(cur)
    }

    /// Apply the translation by `g` to a cylinder, with an explicit
    /// out-of-range remainder.
    ///
    /// Starting at the cylinder's own level, the base is intersected with the
    /// in-range window `F_m ∩ (F_m − g)`; whatever falls outside cannot be
    /// moved at level `m` and is re-examined one level up (where the base has
    /// more room) until its measure drops strictly below `eps`.  Returns the
    /// translated in-range part and the remainder at the level where the
    /// budget was met; fails with [`CfError::ScheduleTooShort`] if even the
    /// top level leaves `eps` or more unmoved.
    pub fn apply_tg(&self, c: &Cylinder<S>, g: &[S], eps: &S) -> Result<Transport<S>, CfError> {
        if eps <= &S::zero() {
            return Err(CfError::BadEps);
        }
        if g.len() != self.dim {
            return Err(CfError::Box(BoxError::DimMismatch {
                expected: self.dim,
                got: g.len(),
            }));
        }
        let mut cur = c.clone();
        loop {
            let m = cur.level;
            let h = &self.levels[m].h;
            // Window F_m ∩ (F_m − g): lo_i = max(0, −g_i), hi_i = min(h, h−g_i).
            let mut lo = Vec::with_capacity(self.dim);
            let mut hi = Vec::with_capacity(self.dim);
            let mut window_nonempty = true;
            for gi in g {
                let l = if gi.is_negative() { -gi.clone() } else { S::zero() };
                let u = if gi.is_positive() { h.clone() - gi.clone() } else { h.clone() };
                if l >= u {
                    window_nonempty = false;
                }
                lo.push(l);
                hi.push(u);
            }
            let in_part = if window_nonempty {
                let window = BoxSet::from_box(Aabb::new(lo, hi)?);
                cur.base.intersect(&window)?
            } else {
                BoxSet::empty(self.dim)?
            };
            let rem = cur.base.subtract(&in_part)?;
            let rem_cyl = Cylinder { level: m, base: rem };
            let rem_measure = self.cylinder_measure(&rem_cyl)?;
            if rem_measure.value() < eps {
                let image = Cylinder { level: m, base: in_part.translate(g)? };
                debug_assert!(self.cylinder(m, image.base.clone()).is_ok());
                return Ok(Transport { image, remainder: rem_cyl });
            }
            if m + 1 >= self.levels.len() {
                return Err(CfError::ScheduleTooShort {
                    top: m,
                    remainder: format!("{}", rem_measure),
                });
            }
            cur = self.lift_once(&cur)?;
        }
    }

    /// The `p`-th power schedule over `(ℝ^d)^p`: same cube edges, translation
    /// sets replaced by their `p`-fold Cartesian powers (concatenated
    /// vectors, lexicographic in the factor indices).
    ///
    /// The result is re-validated; independence and containment are inherited
    /// factorwise, so this cannot fail for a valid input.
    pub fn power_schedule(&self, p: usize) -> Result<CFSchedule<S>, CfError> {
        const POWER_SIZE_CAP: u128 = 1 << 20;
        if p == 0 {
            return Err(CfError::BadPower("exponent must be at least 1".into()));
        }
        for (n, lv) in self.levels.iter().enumerate() {
            let sz = (lv.c_next.len() as u128).checked_pow(p as u32);
            match sz {
                Some(s) if s <= POWER_SIZE_CAP => {}
                _ => {
                    return Err(CfError::BadPower(format!(
                        "level {n}: #C^p = {}^{p} exceeds the size cap",
                        lv.c_next.len()
                    )))
                }
            }
        }
        let levels: Vec<CFLevel<S>> = self
            .levels
            .iter()
            .map(|lv| CFLevel {
                h: lv.h.clone(),
                c_next: cartesian_power(&lv.c_next, p),
            })
            .collect();
        CFSchedule::validate(self.dim * p, levels, self.mode)
            .map_err(|e| CfError::BadPower(format!("power schedule failed to validate: {e}")))
    }

    /// The sub-schedule consisting of levels `from ..` re-indexed from zero.
    ///
    /// All linking conditions are local to consecutive levels, so the tail of
    /// a valid schedule is valid under the same mode.
    pub fn tail_schedule(&self, from: usize) -> Result<CFSchedule<S>, CfError> {
        self.check_level(from)?;
        Ok(CFSchedule {
            dim: self.dim,
            levels: self.levels[from..].to_vec(),
            mode: self.mode,
        })
    }

    /// Growth diagnostic for the total-measure sequence
    /// `r_n = h_n^d / (#C_1 ⋯ #C_n)` (the measure of the level-`n` cube as a
    /// cylinder).  The tower's invariant measure is infinite iff `r_n → ∞`;
    /// on a finite schedule the report records the exact ratios, where the
    /// running maximum sits, and whether the final ratio beats the first by
    /// the caller's `factor`.
    pub fn measure_growth(&self, factor: &S) -> MeasureGrowthReport<S> {
        let mut ratios = Vec::with_capacity(self.levels.len());
        let mut divisor = S::one();
        for (n, lv) in self.levels.iter().enumerate() {
            if n > 0 {
                divisor = divisor.clone()
                    * S::from_int(self.levels[n - 1].c_next.len() as i64);
            }
            let mut vol = S::one();
            for _ in 0..self.dim {
                vol = vol * lv.h.clone();
            }
            ratios.push(vol / divisor.clone());
        }
        let last = ratios.len() - 1;
        // Ties resolve to the latest maximum (max_by keeps the last of
        // equals), so a plateau running to the end still counts as climbing.
        let argmax = ratios
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.cmp(b))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let growth = ratios[last].clone() / ratios[0].clone();
        let diverging = argmax == last && growth > *factor;
        MeasureGrowthReport { ratios, growth, argmax, diverging }
    }
}

/// Report from [`CFSchedule::measure_growth`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureGrowthReport<S> {
    /// `r_n` per level, exact.
    pub ratios: Vec<S>,
    /// `r_top / r_0`.
    pub growth: S,
    /// Index of the (latest) maximal ratio.
    pub argmax: usize,
    /// Whether the sequence is still climbing: the top ratio is the running
    /// maximum and exceeds `factor · r_0`.
    pub diverging: bool,
}

/// All `p`-tuples of the given vectors, concatenated, in lexicographic order
/// of the factor indices.  `p = 0` is not used here; the empty input yields
/// the empty output.
pub fn cartesian_power<S: Clone>(vs: &[Vec<S>], p: usize) -> Vec<Vec<S>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<Vec<S>> = vec![Vec::new()];
    for _ in 0..p {
        let mut next = Vec::with_capacity(out.len() * vs.len());
        for prefix in &out {
            for v in vs {
                let mut w = prefix.clone();
                w.extend(v.iter().cloned());
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// The diagonal time vector `(t, …, t)` of length `p`, the direction in which
/// a product of `p` copies of a one-dimensional flow moves.
pub fn diag_time<S: Scalar>(t: &S, p: usize) -> Vec<S> {
    vec![t.clone(); p]
}

/// `g` repeated `p` times, the product-translation of a `d`-dimensional
/// vector acting diagonally on `(ℝ^d)^p`.
pub fn diag_vector<S: Scalar>(g: &[S], p: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(g.len() * p);
    for _ in 0..p {
        out.extend(g.iter().cloned());
    }
    out
}
