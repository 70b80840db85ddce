//! The inductive construction: grow one translation schedule step by step,
//! certifying at every step that the diagonal powers of the chosen time-`t`
//! maps spread half of every probed cell into every probed cell.
//!
//! Each step `n`:
//!   1. partitions the current top cube into cells of mesh `≤ 1/level`,
//!   2. spins up a fresh finite-measure staircase schedule seeded on that
//!      cube and runs the filling recursion for every probed cell pair and
//!      every time in a rational grid on `[1/n, n]`,
//!   3. takes `D_n` = the worst filling number seen (floored at 1),
//!   4. grafts `n·D_n` staircase levels onto the main schedule, doubling the
//!      final cube so the total measure keeps diverging,
//!   5. emits one [`Certificate`] per probed `(Δ, Δ′, t)`, re-checked on the
//!      grafted schedule itself before it is handed out.
//!
//! Certificates are finite, self-contained, and re-verifiable from scratch
//! by [`check_certificates`] — nothing in them is trusted from the builder.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::boxset::{Aabb, BoxError, BoxSet};
use crate::cfcore::{
    diag_time, CFSchedule, CfError, Containment, Cylinder, Measure, MeasureGrowthReport,
    ValidateError,
};
use crate::filling::{fill, time_grid, FillError, FillMode, FillOptions, FillingResult};
use crate::rng::SplitMix64;
use crate::scalar::{gcd_all, Scalar};

/// Errors from the forcing layer.
#[derive(Debug, Error)]
pub enum ForcingError {
    /// Power sequence rejected (empty, too short, or an entry < 2).
    #[error("power sequence invalid: {0}")]
    BadPSeq(String),
    /// Auxiliary staircase spec rejected.
    #[error("auxiliary spec invalid: {0}")]
    BadAuxSpec(String),
    /// Run options rejected.
    #[error("options invalid: {0}")]
    BadOptions(String),
    /// Finite-measure diagnostic `h_k / ∏ r_j` left the configured bound.
    #[error("finite-measure ratio cap exceeded at stage {stage}: ratio {ratio}")]
    RatioCapExceeded { stage: usize, ratio: String },
    /// A generated or grafted level failed schedule validation.
    #[error("schedule extension rejected at stage {stage}: {source}")]
    AuxValidation { stage: usize, source: ValidateError },
    /// The spec pinned a base cube that differs from the schedule top.
    #[error("base cube mismatch: spec wants side {expected}, schedule top has {got}")]
    BaseCubeMismatch { expected: String, got: String },
    /// Steps must run 1, 2, 3, … in order.
    #[error("step out of order: next step is {expected}, got {got}")]
    StepOutOfOrder { expected: u32, got: u32 },
    /// Partitions are defined for one-dimensional schedules only.
    #[error("partitions need a one-dimensional schedule (got dim {got})")]
    DimUnsupported { got: usize },
    /// `make_partition` fed the wrong previous level.
    #[error("partition at level {level} needs the level-{} partition (got level {prev})", level.saturating_sub(1))]
    PartitionChain { level: usize, prev: usize },
    /// The probe workload would exceed the configured cap.
    #[error("work cap exceeded: {pairs} pairs × {times} times = {work} fills > cap {cap}")]
    WorkCapExceeded { pairs: u128, times: usize, work: u128, cap: usize },
    /// `K^p` does not fit the index type.
    #[error("power atom count overflow: {k}^{p}")]
    PowerOverflow { k: u64, p: u32 },
    /// A probed pair failed to fill.
    #[error("fill failed for atom pair ({a}, {b}) at t = {t}: {source}")]
    Fill { a: u64, b: u64, t: String, source: FillError },
    /// A state invariant broke mid-run; always a bug, never user error.
    #[error("internal consistency failure: {0}")]
    Internal(String),
    /// Cylinder-layer failure.
    #[error(transparent)]
    Cf(#[from] CfError),
}

impl From<BoxError> for ForcingError {
    fn from(e: BoxError) -> Self {
        ForcingError::Cf(CfError::Box(e))
    }
}

impl ForcingError {
    /// True when the failure is a resource ceiling (budget, box cap, work
    /// cap, schedule depth) rather than bad input or broken data.
    pub fn is_resource_limit(&self) -> bool {
        match self {
            ForcingError::WorkCapExceeded { .. } => true,
            ForcingError::Fill { source, .. } => matches!(
                source,
                FillError::BudgetExhausted { .. }
                    | FillError::BoxesExceeded { .. }
                    | FillError::ScheduleTooShort { .. }
            ),
            ForcingError::Cf(CfError::ScheduleTooShort { .. }) => true,
            _ => false,
        }
    }

    /// True when a mathematical precondition failed (measure mismatch,
    /// wrong base cube) as opposed to malformed input or resource limits.
    pub fn is_precondition_failure(&self) -> bool {
        match self {
            ForcingError::BaseCubeMismatch { .. } => true,
            ForcingError::Fill { source, .. } => {
                matches!(source, FillError::MassMismatch { .. } | FillError::ZeroMass)
            }
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Partitions
// ---------------------------------------------------------------------------

/// A uniform interval partition of the level cube `[0, h)`: `h / cell`
/// half-open cells of equal length.  The cell length divides `h`, every
/// translation component of the level, and the previous level's cell, so
/// translated cells are unions of finer cells by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition<S> {
    level: usize,
    h: S,
    cell: S,
}

impl<S: Scalar> Partition<S> {
    /// The one-atom partition of the seed cube.
    pub fn initial(s: &CFSchedule<S>) -> Result<Self, ForcingError> {
        if s.dim() != 1 {
            return Err(ForcingError::DimUnsupported { got: s.dim() });
        }
        let h = s.h(0)?.clone();
        Ok(Partition { level: 0, h: h.clone(), cell: h })
    }

    /// The schedule level this partition covers.
    pub fn level(&self) -> usize {
        self.level
    }

    /// Cube side at that level.
    pub fn h(&self) -> &S {
        &self.h
    }

    /// Common length of every atom (also the mesh).
    pub fn cell(&self) -> &S {
        &self.cell
    }

    /// Number of atoms, exact.
    pub fn count(&self) -> u64 {
        let k = self.h.clone() / self.cell.clone();
        debug_assert!(k.is_integer_value());
        k.floor_i64() as u64
    }

    /// The `i`-th atom `[i·cell, (i+1)·cell)`.
    pub fn atom(&self, i: u64) -> Result<Aabb<S>, ForcingError> {
        if i >= self.count() {
            return Err(ForcingError::Internal(format!(
                "atom index {i} out of range (level {} has {} atoms)",
                self.level,
                self.count()
            )));
        }
        let lo = self.cell.clone() * S::from_int(i as i64);
        let hi = lo.clone() + self.cell.clone();
        Ok(Aabb::interval(lo, hi)?)
    }

    /// Number of `p`-fold product atoms, `count^p`, guarded against
    /// overflow.
    pub fn power_count(&self, p: u32) -> Result<u64, ForcingError> {
        let k = self.count();
        k.checked_pow(p)
            .ok_or(ForcingError::PowerOverflow { k, p })
    }

    /// The product atom with flat index `flat` (base-`count` digits, most
    /// significant first): a single box of dimension `p`.
    pub fn power_atom(&self, p: u32, flat: u64) -> Result<BoxSet<S>, ForcingError> {
        let digits = unflatten(flat, self.count(), p);
        let mut lo = Vec::with_capacity(p as usize);
        let mut hi = Vec::with_capacity(p as usize);
        for d in digits {
            let l = self.cell.clone() * S::from_int(d as i64);
            hi.push(l.clone() + self.cell.clone());
            lo.push(l);
        }
        Ok(BoxSet::from_box(Aabb::new(lo, hi)?))
    }
}

fn unflatten(flat: u64, k: u64, p: u32) -> Vec<u64> {
    let mut digits = vec![0u64; p as usize];
    let mut rest = flat;
    for slot in digits.iter_mut().rev() {
        *slot = rest % k;
        rest /= k;
    }
    digits
}

fn flatten(digits: &[u64], k: u64) -> u64 {
    digits.iter().fold(0, |acc, d| acc * k + d)
}

/// Refine `prev` (the level-`level − 1` partition) into the level-`level`
/// partition with mesh `≤ 1/level`.
///
/// The cell is the greatest common divisor of the previous cell, the cube
/// side, and the incoming translation components, shrunk by an integer
/// factor until it meets the mesh bound.  Consequences, all exact: the cells
/// tile `[0, h)`; every translate of a coarser cell is a union of cells; the
/// mesh shrinks at least like `1/level`.
pub fn make_partition<S: Scalar>(
    s: &CFSchedule<S>,
    level: usize,
    prev: &Partition<S>,
) -> Result<Partition<S>, ForcingError> {
    let mesh = S::one() / S::from_int(level.max(1) as i64);
    make_partition_to(s, level, prev, &mesh)
}

/// As [`make_partition`] with an explicit mesh bound.
pub fn make_partition_to<S: Scalar>(
    s: &CFSchedule<S>,
    level: usize,
    prev: &Partition<S>,
    mesh: &S,
) -> Result<Partition<S>, ForcingError> {
    if s.dim() != 1 {
        return Err(ForcingError::DimUnsupported { got: s.dim() });
    }
    if level == 0 || prev.level + 1 != level {
        return Err(ForcingError::PartitionChain { level, prev: prev.level });
    }
    if mesh.is_negative() || mesh.is_zero() {
        return Err(ForcingError::BadOptions("mesh bound must be positive".into()));
    }
    let h = s.h(level)?.clone();
    let mut values = vec![prev.cell.clone(), h.clone()];
    for c in s.c_next(level - 1)? {
        values.push(c[0].clone());
    }
    let g = gcd_all(&values);
    // Smallest integer m ≥ 1 with g/m ≤ mesh.
    let ratio = g.clone() / mesh.clone();
    let mut m = ratio.floor_i64();
    if !ratio.is_integer_value() {
        m += 1;
    }
    let m = m.max(1);
    let cell = g / S::from_int(m);
    Ok(Partition { level, h, cell })
}

// ---------------------------------------------------------------------------
// Auxiliary staircase schedules
// ---------------------------------------------------------------------------

/// Parameters for a finite-measure staircase schedule.  Stage `k` cuts the
/// current column into `r_k` pieces separated by a base gap `σ_k` plus a
/// staircase of `u_k`-sized increments:
///
/// `C_{k+1} = { i·(h_k + σ_k) + u_k·i(i+1)/2 : 0 ≤ i < r_k }`,
/// `h_{k+1} = max C_{k+1} + h_k + max(slack_k, 1)`.
///
/// All parameter lists cycle, so one entry configures every stage.  The
/// `max(·, 1)` keeps the strong containment margin; `σ_k > 1` keeps the
/// translates independent with room to spare; per-stage overhead stays
/// bounded while the piece count multiplies, so `h_k / ∏ r_j` converges —
/// the finite-measure diagnostic reported by [`gen_aux`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxFlowSpec<S> {
    /// When set, the seed cube side is pinned and must match the schedule
    /// this spec is used on.
    pub base_h: Option<S>,
    /// Pieces per stage, each ≥ 2.
    pub cuts: Vec<u32>,
    /// Base gap per stage, each > 1.
    pub sigma: Vec<S>,
    /// Staircase increment per stage, each ≥ 0.
    pub stair_unit: Vec<S>,
    /// Extra headroom beyond the strong margin, each ≥ 0.
    pub slack: Vec<S>,
    /// Optional bound enforced on the finite-measure ratio at every stage.
    pub ratio_cap: Option<S>,
}

impl<S: Scalar> AuxFlowSpec<S> {
    /// A small general-purpose spec: alternate 2- and 3-piece stages with
    /// unit staircase and unit slack.
    pub fn standard() -> Self {
        AuxFlowSpec {
            base_h: None,
            cuts: vec![2, 3],
            sigma: vec![S::from_int(2)],
            stair_unit: vec![S::one()],
            slack: vec![S::one()],
            ratio_cap: None,
        }
    }

    fn validate(&self) -> Result<(), ForcingError> {
        if self.cuts.is_empty() {
            return Err(ForcingError::BadAuxSpec("cuts must be nonempty".into()));
        }
        if let Some(r) = self.cuts.iter().find(|&&r| r < 2) {
            return Err(ForcingError::BadAuxSpec(format!("cut count {r} < 2")));
        }
        if self.sigma.is_empty() || self.stair_unit.is_empty() || self.slack.is_empty() {
            return Err(ForcingError::BadAuxSpec(
                "sigma, stair_unit, and slack must be nonempty".into(),
            ));
        }
        if let Some(s) = self.sigma.iter().find(|s| **s <= S::one()) {
            return Err(ForcingError::BadAuxSpec(format!("base gap {s} must exceed 1")));
        }
        if self.stair_unit.iter().any(|u| u.is_negative())
            || self.slack.iter().any(|x| x.is_negative())
        {
            return Err(ForcingError::BadAuxSpec(
                "stair_unit and slack must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// A generated staircase schedule plus its finite-measure diagnostic
/// `ratios[k] = h_k / ∏_{j≤k} r_j`.
#[derive(Debug, Clone)]
pub struct AuxFlow<S> {
    /// Strong-mode schedule, `k_levels` links deep.
    pub schedule: CFSchedule<S>,
    /// Finite-measure ratios, one per level (index 0 = seed).
    pub ratios: Vec<S>,
}

/// Generate `k_levels` staircase stages above a seed cube of side `base_h`.
pub fn gen_aux<S: Scalar>(
    spec: &AuxFlowSpec<S>,
    base_h: &S,
    k_levels: usize,
) -> Result<AuxFlow<S>, ForcingError> {
    spec.validate()?;
    if base_h.is_zero() || base_h.is_negative() {
        return Err(ForcingError::BadAuxSpec("seed cube side must be positive".into()));
    }
    if let Some(pinned) = &spec.base_h {
        if pinned != base_h {
            return Err(ForcingError::BaseCubeMismatch {
                expected: pinned.frac_string(),
                got: base_h.frac_string(),
            });
        }
    }
    let mut schedule = CFSchedule::seed(1, base_h.clone(), Containment::Strong)
        .map_err(|source| ForcingError::AuxValidation { stage: 0, source })?;
    let mut ratios = vec![base_h.clone()];
    let mut pieces = S::one();
    for k in 0..k_levels {
        let r = spec.cuts[k % spec.cuts.len()];
        let sigma = &spec.sigma[k % spec.sigma.len()];
        let u = &spec.stair_unit[k % spec.stair_unit.len()];
        let slack = &spec.slack[k % spec.slack.len()];
        let h = schedule.h(k)?.clone();
        let stride = h.clone() + sigma.clone();
        let c: Vec<Vec<S>> = (0..r as i64)
            .map(|i| {
                let tri = S::from_int(i * (i + 1) / 2);
                vec![stride.clone() * S::from_int(i) + u.clone() * tri]
            })
            .collect();
        let c_max = c.last().expect("r ≥ 2")[0].clone();
        let margin = if *slack < S::one() { S::one() } else { slack.clone() };
        let h_next = c_max + h + margin;
        schedule
            .push_level(c, h_next.clone())
            .map_err(|source| ForcingError::AuxValidation { stage: k + 1, source })?;
        pieces = pieces * S::from_int(r as i64);
        let ratio = h_next / pieces.clone();
        if let Some(cap) = &spec.ratio_cap {
            if ratio > *cap {
                return Err(ForcingError::RatioCapExceeded {
                    stage: k + 1,
                    ratio: ratio.frac_string(),
                });
            }
        }
        ratios.push(ratio);
    }
    Ok(AuxFlow { schedule, ratios })
}

// ---------------------------------------------------------------------------
// Pair scopes
// ---------------------------------------------------------------------------

/// Which ordered product-atom pairs `(Δ, Δ′)` a step probes.
///
/// `All` is the exhaustive lattice.  The structured scopes trade coverage
/// for feasibility and are recorded verbatim in the step log: a certificate
/// set speaks only for the pairs it actually probed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairScope {
    /// Every ordered pair.
    All,
    /// Only `Δ = Δ′`.
    Diagonal,
    /// Pairs whose index tuples differ by a constant shift `(k, …, k)`,
    /// `0 ≤ k ≤ width` (diagonal displacement band).
    Banded { width: u64 },
    /// A deterministic pseudo-random sample of at most `cap` ordered pairs.
    Sample { cap: usize, seed: u64 },
}

impl PairScope {
    /// Canonical text form: `all`, `diagonal`, `banded:W`, `sample:CAP:SEED`.
    pub fn describe(&self) -> String {
        match self {
            PairScope::All => "all".into(),
            PairScope::Diagonal => "diagonal".into(),
            PairScope::Banded { width } => format!("banded:{width}"),
            PairScope::Sample { cap, seed } => format!("sample:{cap}:{seed}"),
        }
    }

    /// Parse the canonical text form.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["all"] => Ok(PairScope::All),
            ["diagonal"] => Ok(PairScope::Diagonal),
            ["banded", w] => w
                .parse()
                .map(|width| PairScope::Banded { width })
                .map_err(|_| format!("bad band width in {s:?}")),
            ["sample", cap, seed] => {
                let cap = cap.parse().map_err(|_| format!("bad sample cap in {s:?}"))?;
                let seed = seed.parse().map_err(|_| format!("bad sample seed in {s:?}"))?;
                Ok(PairScope::Sample { cap, seed })
            }
            _ => Err(format!(
                "unknown pair scope {s:?}; expected all, diagonal, banded:W, or sample:CAP:SEED"
            )),
        }
    }

    /// Number of pairs the scope yields over `total = K^p` product atoms,
    /// without materializing them.
    pub fn pair_count(&self, k: u64, p: u32) -> Result<u128, ForcingError> {
        let total = k.checked_pow(p).ok_or(ForcingError::PowerOverflow { k, p })? as u128;
        Ok(match self {
            PairScope::All => total * total,
            PairScope::Diagonal => total,
            PairScope::Banded { width } => {
                let mut n = 0u128;
                for shift in 0..=(*width).min(k.saturating_sub(1)) {
                    n += ((k - shift) as u128).pow(p);
                }
                n
            }
            PairScope::Sample { cap, .. } => (*cap as u128).min(total * total),
        })
    }

    /// Materialize the pair list, sorted and duplicate-free.
    pub fn pairs(&self, k: u64, p: u32) -> Result<Vec<(u64, u64)>, ForcingError> {
        let total = k.checked_pow(p).ok_or(ForcingError::PowerOverflow { k, p })?;
        let mut out: Vec<(u64, u64)> = Vec::new();
        match self {
            PairScope::All => {
                for a in 0..total {
                    for b in 0..total {
                        out.push((a, b));
                    }
                }
            }
            PairScope::Diagonal => out.extend((0..total).map(|a| (a, a))),
            PairScope::Banded { width } => {
                for a in 0..total {
                    let digits = unflatten(a, k, p);
                    let max_digit = digits.iter().copied().max().unwrap_or(0);
                    let room = k - 1 - max_digit;
                    for shift in 0..=(*width).min(room) {
                        let shifted: Vec<u64> = digits.iter().map(|d| d + shift).collect();
                        out.push((a, flatten(&shifted, k)));
                    }
                }
                out.sort_unstable();
            }
            PairScope::Sample { cap, seed } => {
                let mut rng = SplitMix64::new(*seed);
                let mut seen = BTreeSet::new();
                let want = (*cap as u128).min(total as u128 * total as u128) as usize;
                let mut draws = 0usize;
                while seen.len() < want && draws < want.saturating_mul(20).max(64) {
                    let a = rng.below(total);
                    let b = rng.below(total);
                    seen.insert((a, b));
                    draws += 1;
                }
                out.extend(seen);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// State, options, outputs
// ---------------------------------------------------------------------------

/// Knobs for [`run_step`] / [`build_flow`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Grid density: step `n` probes `n·density + 1` times in `[1/n, n]`.
    pub grid_density: u32,
    /// Per-fill index budget.
    pub budget: usize,
    /// Which atom pairs each step probes.
    pub scope: PairScope,
    /// Multiplier on `D_n` (≥ 1); grafts extra depth beyond the minimum.
    pub d_margin: usize,
    /// Cap on fills per step (pairs × grid times).
    pub work_cap: usize,
    /// Per-fill cap on working-set box counts.
    pub max_boxes: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            grid_density: 4,
            budget: 64,
            scope: PairScope::All,
            d_margin: 1,
            work_cap: 200_000,
            max_boxes: 200_000,
        }
    }
}

impl RunOptions {
    fn validate(&self) -> Result<(), ForcingError> {
        if self.grid_density == 0 {
            return Err(ForcingError::BadOptions("grid density must be ≥ 1".into()));
        }
        if self.d_margin == 0 {
            return Err(ForcingError::BadOptions("depth margin must be ≥ 1".into()));
        }
        if self.work_cap == 0 {
            return Err(ForcingError::BadOptions("work cap must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// The three transport conditions a certificate asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertChecks {
    /// `μ(⊔ A_i) > μ([Δ])/2`, strictly.
    pub mass_over_half: bool,
    /// Every `V_t^i A_i` is fully defined and lands inside `[Δ′]`.
    pub images_inside: bool,
    /// The images are pairwise disjoint.
    pub images_disjoint: bool,
}

impl CertChecks {
    /// All three conditions hold.
    pub fn all(&self) -> bool {
        self.mass_over_half && self.images_inside && self.images_disjoint
    }
}

/// One certified `(Δ, Δ′, t)` probe: the filling parts, their mass, and the
/// recomputed transport conditions.  Part cylinders are indexed relative to
/// the step's base marker (level `k` here means main-schedule level
/// `base_marker + k`), which is exactly how [`check_certificates`] reads
/// them back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate<S> {
    /// Step number `n` (1-based).
    pub step: u32,
    /// Power `p_n`.
    pub p: u32,
    /// `m_{n−1}`, the schedule level the step started from.
    pub base_marker: usize,
    /// `D_n` for the step; `parts` has `D_n + 1` entries.
    pub d_n: usize,
    /// Flat product-atom index of `Δ`.
    pub a_idx: u64,
    /// Flat product-atom index of `Δ′`.
    pub b_idx: u64,
    /// The source atom `Δ` (one box of dimension `p`).
    pub delta: BoxSet<S>,
    /// The target atom `Δ′`.
    pub delta_prime: BoxSet<S>,
    /// Probe time.
    pub t: S,
    /// Filling number `N` (index of the last transporting part).
    pub n_fill: usize,
    /// `A_0, …, A_{D_n}` at a common level, empty-padded past `N`.
    pub parts: Vec<Cylinder<S>>,
    /// `μ(⊔ A_i) / μ([Δ])`, exact, strictly above one half.
    pub mass_fraction: S,
    /// Recomputed transport conditions (all true on emission).
    pub checks: CertChecks,
    /// The full time grid of the step, for context.
    pub grid: Vec<S>,
}

/// Per-step record kept in [`ForcingState::log`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepLog<S> {
    /// Step number `n`.
    pub n: u32,
    /// Power `p_n`.
    pub p: u32,
    /// Marker before the step (`m_{n−1}`).
    pub m_prev: usize,
    /// Marker after the step (`m_n = m_{n−1} + n·D_n`).
    pub m_n: usize,
    /// The grafting depth divisor `D_n`.
    pub d_n: usize,
    /// Worst filling number actually observed (before flooring).
    pub d_raw: usize,
    /// Deepest level any part needed.
    pub max_parts_level: usize,
    /// The probe grid.
    pub grid: Vec<S>,
    /// Base-partition atom count `K`.
    pub atoms: u64,
    /// `K^p`.
    pub power_atoms: u64,
    /// Scope actually probed, in canonical text form.
    pub scope: String,
    /// Fills run (pairs × grid times).
    pub fills: usize,
    /// Certificates emitted.
    pub certificates: usize,
    /// Depth of the staircase schedule generated for the step.
    pub aux_levels: usize,
    /// Finite-measure diagnostic of that staircase.
    pub aux_ratios: Vec<S>,
    /// Seed cube side the staircase grew from (= `h_{m_{n−1}}`).
    pub base_h: S,
    /// Staircase top cube side `a` before doubling; the grafted top is `2a`.
    pub aux_top_h: S,
}

/// The growing construction: schedule, per-level partitions, markers, the
/// power sequence, and the per-step log.
#[derive(Debug, Clone)]
pub struct ForcingState<S> {
    schedule: CFSchedule<S>,
    partitions: Vec<Partition<S>>,
    markers: Vec<usize>,
    p_seq: Vec<u32>,
    log: Vec<StepLog<S>>,
}

impl<S: Scalar> ForcingState<S> {
    /// Fresh state: seed cube `[0, 1)`, one-atom partition, no steps run.
    pub fn new(p_seq: Vec<u32>) -> Result<Self, ForcingError> {
        validate_p_seq(&p_seq)?;
        let schedule = CFSchedule::seed(1, S::one(), Containment::Strong)
            .map_err(|source| ForcingError::AuxValidation { stage: 0, source })?;
        let initial = Partition::initial(&schedule)?;
        Ok(ForcingState {
            schedule,
            partitions: vec![initial],
            markers: Vec::new(),
            p_seq,
            log: Vec::new(),
        })
    }

    /// Rebuild a state from serialized pieces, re-deriving the partitions
    /// and re-checking the marker arithmetic.
    pub fn from_parts(
        schedule: CFSchedule<S>,
        markers: Vec<usize>,
        p_seq: Vec<u32>,
        log: Vec<StepLog<S>>,
    ) -> Result<Self, ForcingError> {
        validate_p_seq(&p_seq)?;
        if schedule.dim() != 1 {
            return Err(ForcingError::DimUnsupported { got: schedule.dim() });
        }
        if !schedule.is_strong() {
            return Err(ForcingError::BadPSeq("schedule must be strong-mode".into()));
        }
        if p_seq.len() < markers.len() {
            return Err(ForcingError::BadPSeq(format!(
                "{} markers but only {} powers",
                markers.len(),
                p_seq.len()
            )));
        }
        if log.len() != markers.len() {
            return Err(ForcingError::Internal(format!(
                "log has {} entries for {} markers",
                log.len(),
                markers.len()
            )));
        }
        let mut prev = 0usize;
        for (i, &m) in markers.iter().enumerate() {
            let n = i + 1;
            if m <= prev || m > schedule.top() {
                return Err(ForcingError::Internal(format!(
                    "marker m_{n} = {m} out of order or beyond the schedule top"
                )));
            }
            if (m - prev) % n != 0 {
                return Err(ForcingError::Internal(format!(
                    "marker gap m_{n} − m_{} = {} is not a multiple of {n}",
                    n - 1,
                    m - prev
                )));
            }
            prev = m;
        }
        let mut partitions = vec![Partition::initial(&schedule)?];
        for level in 1..=schedule.top() {
            let next = make_partition(&schedule, level, &partitions[level - 1])?;
            partitions.push(next);
        }
        Ok(ForcingState { schedule, partitions, markers, p_seq, log })
    }

    /// The schedule built so far.
    pub fn schedule(&self) -> &CFSchedule<S> {
        &self.schedule
    }

    /// Partitions for levels `0..=top`, index = level.
    pub fn partitions(&self) -> &[Partition<S>] {
        &self.partitions
    }

    /// Markers `m_1, m_2, …` of completed steps.
    pub fn markers(&self) -> &[usize] {
        &self.markers
    }

    /// The power sequence.
    pub fn p_seq(&self) -> &[u32] {
        &self.p_seq
    }

    /// Per-step logs.
    pub fn log(&self) -> &[StepLog<S>] {
        &self.log
    }

    /// Number of completed steps.
    pub fn steps_done(&self) -> usize {
        self.markers.len()
    }

    fn marker_before(&self, n: u32) -> usize {
        if n <= 1 { 0 } else { self.markers[n as usize - 2] }
    }
}

fn validate_p_seq(p_seq: &[u32]) -> Result<(), ForcingError> {
    if p_seq.is_empty() {
        return Err(ForcingError::BadPSeq("power sequence is empty".into()));
    }
    if let Some(p) = p_seq.iter().find(|&&p| p < 2) {
        return Err(ForcingError::BadPSeq(format!("power {p} < 2")));
    }
    Ok(())
}

/// The canonical default power sequence: the diagonal enumeration
/// `2; 2,3; 2,3,4; …` truncated to `steps` entries, so every integer ≥ 2
/// recurs unboundedly in the untruncated sequence.
pub fn default_p_seq(steps: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(steps);
    let mut m = 2u32;
    while out.len() < steps {
        for v in 2..=m {
            if out.len() == steps {
                break;
            }
            out.push(v);
        }
        m += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// The step
// ---------------------------------------------------------------------------

/// Run step `n`: probe the current top partition under the `p_n`-th diagonal
/// power, graft `n·D_n` staircase levels (final cube doubled), advance the
/// marker, and emit one certificate per probed `(Δ, Δ′, t)`.
pub fn run_step<S: Scalar>(
    state: &mut ForcingState<S>,
    n: u32,
    aux_spec: &AuxFlowSpec<S>,
    opts: &RunOptions,
) -> Result<Vec<Certificate<S>>, ForcingError> {
    opts.validate()?;
    aux_spec.validate()?;
    let expected = state.markers.len() as u32 + 1;
    if n != expected {
        return Err(ForcingError::StepOutOfOrder { expected, got: n });
    }
    if state.p_seq.len() < n as usize {
        return Err(ForcingError::BadPSeq(format!(
            "step {n} needs {n} powers, have {}",
            state.p_seq.len()
        )));
    }
    let p = state.p_seq[n as usize - 1];
    let m_prev = state.marker_before(n);
    if state.schedule.top() != m_prev {
        return Err(ForcingError::Internal(format!(
            "schedule top {} does not sit at marker {m_prev}",
            state.schedule.top()
        )));
    }
    let base_h = state.schedule.h(m_prev)?.clone();

    // The partition being certified and its product atoms.
    let partition = state.partitions[m_prev].clone();
    let total_atoms = partition.power_count(p)?;
    let grid: Vec<S> = time_grid(n, opts.grid_density);

    // Workload guard before materializing anything.
    let pair_count = opts.scope.pair_count(partition.count(), p)?;
    let work = pair_count * grid.len() as u128;
    if work > opts.work_cap as u128 {
        return Err(ForcingError::WorkCapExceeded {
            pairs: pair_count,
            times: grid.len(),
            work,
            cap: opts.work_cap,
        });
    }
    let pairs = opts.scope.pairs(partition.count(), p)?;

    // Product atoms used by the scope, computed once.
    let mut atom_cache: BTreeMap<u64, BoxSet<S>> = BTreeMap::new();
    for idx in pairs.iter().flat_map(|&(a, b)| [a, b]) {
        if !atom_cache.contains_key(&idx) {
            atom_cache.insert(idx, partition.power_atom(p, idx)?);
        }
    }

    // Work items in deterministic order: (a, b) then grid position.
    struct Item {
        a: u64,
        b: u64,
        t_idx: usize,
    }
    let items: Vec<Item> = pairs
        .iter()
        .flat_map(|&(a, b)| (0..grid.len()).map(move |t_idx| Item { a, b, t_idx }))
        .collect();

    let fill_opts = FillOptions {
        mode: FillMode::Exact,
        budget: opts.budget,
        max_level: None,
        max_boxes: opts.max_boxes,
    };

    // Probe every item on a staircase of the current depth; deepen and
    // retry while any probe runs out of levels.  The stage formulas are
    // deterministic, so deepening never changes existing levels.
    let depth_cap = (n as usize + 1) * opts.budget.max(1) + 4;
    let mut depth = 8usize.min(depth_cap);
    let (aux, results) = loop {
        let aux = gen_aux(aux_spec, &base_h, depth)?;
        let pow = aux.schedule.power_schedule(p as usize)?;
        let results: Vec<Result<FillingResult<S>, FillError>> = items
            .par_iter()
            .map(|it| {
                let a_cyl = pow.cylinder(0, atom_cache[&it.a].clone())?;
                let b_cyl = pow.cylinder(0, atom_cache[&it.b].clone())?;
                let q = diag_time(&grid[it.t_idx], p as usize);
                fill(&pow, &q, &a_cyl, &b_cyl, &fill_opts)
            })
            .collect();
        let too_short = results
            .iter()
            .any(|r| matches!(r, Err(FillError::ScheduleTooShort { .. })));
        if too_short && depth < depth_cap {
            depth = (depth * 2).min(depth_cap);
            continue;
        }
        break (aux, results);
    };

    // First failure in deterministic order aborts the step.
    for (it, r) in items.iter().zip(&results) {
        if let Err(source) = r {
            return Err(ForcingError::Fill {
                a: it.a,
                b: it.b,
                t: grid[it.t_idx].frac_string(),
                source: source.clone(),
            });
        }
    }
    let results: Vec<FillingResult<S>> = results.into_iter().map(|r| r.unwrap()).collect();

    // Depth bookkeeping: worst filling number and deepest part level seen.
    let d_raw = results.iter().map(|r| r.n).max().unwrap_or(0);
    let max_parts_level = results.iter().map(|r| r.parts_level).max().unwrap_or(0);
    let d_n = d_raw
        .max(1)
        .max(max_parts_level.div_ceil(n as usize))
        * opts.d_margin;
    let graft_depth = n as usize * d_n;

    // Graft `graft_depth` staircase levels, doubling the final cube.
    let aux = if aux.schedule.top() < graft_depth {
        gen_aux(aux_spec, &base_h, graft_depth)?
    } else {
        aux
    };
    let two = S::from_int(2);
    for k in 1..=graft_depth {
        let c = aux.schedule.c_next(k - 1)?.to_vec();
        let h_next = if k == graft_depth {
            two.clone() * aux.schedule.h(k)?.clone()
        } else {
            aux.schedule.h(k)?.clone()
        };
        state
            .schedule
            .push_level(c, h_next)
            .map_err(|source| ForcingError::AuxValidation { stage: m_prev + k, source })?;
    }
    for k in 1..=graft_depth {
        let level = m_prev + k;
        let next = make_partition(&state.schedule, level, &state.partitions[level - 1])?;
        state.partitions.push(next);
    }
    let m_n = m_prev + graft_depth;
    state.markers.push(m_n);

    // Emit certificates, each re-checked on the grafted schedule itself
    // (its tail above m_prev shares every level with the staircase, final
    // cube doubled — strictly roomier, so nothing emitted can depend on the
    // undoubled cube).
    let tail = state.schedule.tail_schedule(m_prev)?;
    let tpow = tail.power_schedule(p as usize)?;
    let mut certs = Vec::with_capacity(results.len());
    for (it, r) in items.iter().zip(results) {
        let delta = atom_cache[&it.a].clone();
        let delta_prime = atom_cache[&it.b].clone();
        let t = grid[it.t_idx].clone();
        let mut parts = r.parts.clone();
        while parts.len() < d_n + 1 {
            parts.push(tpow.cylinder(r.parts_level, BoxSet::empty(p as usize)?)?);
        }
        let (checks, fraction) = compute_checks(&tpow, &delta, &delta_prime, &t, &parts)?;
        if fraction != r.mass_fraction {
            return Err(ForcingError::Internal(format!(
                "re-checked mass fraction {} differs from fill result {}",
                fraction.frac_string(),
                r.mass_fraction.frac_string()
            )));
        }
        if !checks.all() {
            return Err(ForcingError::Internal(format!(
                "emitted certificate for pair ({}, {}) at t = {} fails its own checks",
                it.a,
                it.b,
                t.frac_string()
            )));
        }
        certs.push(Certificate {
            step: n,
            p,
            base_marker: m_prev,
            d_n,
            a_idx: it.a,
            b_idx: it.b,
            delta,
            delta_prime,
            t,
            n_fill: r.n,
            parts,
            mass_fraction: r.mass_fraction,
            checks,
            grid: grid.clone(),
        });
    }

    state.log.push(StepLog {
        n,
        p,
        m_prev,
        m_n,
        d_n,
        d_raw,
        max_parts_level,
        grid,
        atoms: partition.count(),
        power_atoms: total_atoms,
        scope: opts.scope.describe(),
        fills: items.len(),
        certificates: certs.len(),
        aux_levels: aux.schedule.top(),
        aux_ratios: aux.ratios.clone(),
        base_h,
        aux_top_h: aux.schedule.h(graft_depth)?.clone(),
    });
    Ok(certs)
}

/// Recompute the three transport conditions and the exact mass fraction of
/// a part list against a power schedule.
fn compute_checks<S: Scalar>(
    tpow: &CFSchedule<S>,
    delta: &BoxSet<S>,
    delta_prime: &BoxSet<S>,
    t: &S,
    parts: &[Cylinder<S>],
) -> Result<(CertChecks, S), ForcingError> {
    let p = tpow.dim();
    let a0 = tpow.cylinder(0, delta.clone())?;
    let b0 = tpow.cylinder(0, delta_prime.clone())?;
    let total = tpow.cylinder_measure(&a0)?;
    if total.is_zero() {
        return Err(ForcingError::Internal("source atom has zero mass".into()));
    }
    let mut sum = Measure::zero();
    for part in parts {
        sum += tpow.cylinder_measure(part)?;
    }
    let mass_over_half = sum > total.half();
    let fraction = sum.frac_of(&total);

    let eps = S::one();
    let mut images: Vec<Cylinder<S>> = Vec::new();
    let mut images_inside = true;
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        let g = diag_time(&(t.clone() * S::from_int(i as i64)), p);
        match tpow.apply_tg(part, &g, &eps) {
            Err(CfError::ScheduleTooShort { .. }) => {
                images_inside = false;
            }
            Err(e) => return Err(e.into()),
            Ok(tr) => {
                if !tr.remainder.is_empty() {
                    images_inside = false;
                }
                let b_at = tpow.lift(&b0, tr.image.level())?;
                if !tr.image.base().is_subset(b_at.base())? {
                    images_inside = false;
                }
                images.push(tr.image);
            }
        }
    }
    let mut images_disjoint = true;
    if images.len() > 1 {
        let m = images.iter().map(|c| c.level()).max().expect("nonempty");
        let lifted: Vec<Cylinder<S>> = images
            .iter()
            .map(|c| tpow.lift(c, m))
            .collect::<Result<_, _>>()?;
        'pairs: for i in 0..lifted.len() {
            for j in i + 1..lifted.len() {
                if !lifted[i].base().is_disjoint(lifted[j].base())? {
                    images_disjoint = false;
                    break 'pairs;
                }
            }
        }
    }
    Ok((CertChecks { mass_over_half, images_inside, images_disjoint }, fraction))
}

// ---------------------------------------------------------------------------
// Certificate re-verification
// ---------------------------------------------------------------------------

/// Problems found in one certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertFailure {
    /// Index into the checked list.
    pub index: usize,
    /// Human-readable findings, one per violated condition.
    pub problems: Vec<String>,
}

/// Outcome of [`check_certificates`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// Certificates examined.
    pub total: usize,
    /// Certificates that re-verified completely.
    pub passed: usize,
    /// Findings for each failing certificate.
    pub failures: Vec<CertFailure>,
}

impl Verdict {
    /// True when every certificate re-verified (vacuously true when empty).
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-verify certificates from scratch against the state's own schedule:
/// recompute atoms from the recorded indices, masses, the transport of every
/// part, the disjointness of the images, and the exact mass fraction.
/// Nothing recorded is trusted; every recomputed value must match.
pub fn check_certificates<S: Scalar>(
    state: &ForcingState<S>,
    certs: &[Certificate<S>],
) -> Result<Verdict, ForcingError> {
    let mut tails: BTreeMap<(usize, u32), CFSchedule<S>> = BTreeMap::new();
    let mut failures = Vec::new();
    for (index, cert) in certs.iter().enumerate() {
        let mut problems = Vec::new();
        verify_one(state, cert, &mut tails, &mut problems)?;
        if !problems.is_empty() {
            failures.push(CertFailure { index, problems });
        }
    }
    Ok(Verdict { total: certs.len(), passed: certs.len() - failures.len(), failures })
}

fn verify_one<S: Scalar>(
    state: &ForcingState<S>,
    cert: &Certificate<S>,
    tails: &mut BTreeMap<(usize, u32), CFSchedule<S>>,
    problems: &mut Vec<String>,
) -> Result<(), ForcingError> {
    let n = cert.step as usize;
    if n == 0 || n > state.markers.len() {
        problems.push(format!("step {n} was never run ({} steps on record)", state.markers.len()));
        return Ok(());
    }
    let log = &state.log[n - 1];
    if cert.p != log.p {
        problems.push(format!("power {} differs from the step's recorded {}", cert.p, log.p));
    }
    let m_prev = state.marker_before(cert.step);
    if cert.base_marker != m_prev {
        problems.push(format!("base marker {} should be {m_prev}", cert.base_marker));
    }
    if cert.d_n != log.d_n {
        problems.push(format!("D = {} differs from the step's recorded {}", cert.d_n, log.d_n));
    }
    if cert.grid != log.grid {
        problems.push("probe grid differs from the step's recorded grid".into());
    }
    if !cert.grid.contains(&cert.t) {
        problems.push(format!("time {} is not on the probe grid", cert.t.frac_string()));
    }
    if cert.t.is_negative() || cert.t.is_zero() {
        problems.push("probe time must be positive".into());
    }

    // Recompute the atoms from the recorded indices.
    if m_prev >= state.partitions.len() {
        problems.push(format!("no partition at level {m_prev}"));
        return Ok(());
    }
    let partition = &state.partitions[m_prev];
    let total_atoms = match partition.power_count(cert.p) {
        Ok(v) => v,
        Err(e) => {
            problems.push(format!("power atom count: {e}"));
            return Ok(());
        }
    };
    if cert.a_idx >= total_atoms || cert.b_idx >= total_atoms {
        problems.push(format!(
            "atom indices ({}, {}) out of range for {total_atoms} product atoms",
            cert.a_idx, cert.b_idx
        ));
        return Ok(());
    }
    let delta = partition.power_atom(cert.p, cert.a_idx)?;
    let delta_prime = partition.power_atom(cert.p, cert.b_idx)?;
    if delta != cert.delta {
        problems.push("recorded Δ differs from the atom at its index".into());
    }
    if delta_prime != cert.delta_prime {
        problems.push("recorded Δ′ differs from the atom at its index".into());
    }

    // Shape: uniform part level, empty padding strictly past N.
    if cert.parts.len() != cert.d_n + 1 {
        problems.push(format!(
            "{} parts recorded; expected D + 1 = {}",
            cert.parts.len(),
            cert.d_n + 1
        ));
    }
    if let Some(first) = cert.parts.first() {
        if cert.parts.iter().any(|c| c.level() != first.level()) {
            problems.push("parts are not at a common level".into());
        }
    }
    if cert.n_fill >= cert.parts.len() {
        problems.push(format!(
            "filling number {} has no part (only {} parts)",
            cert.n_fill,
            cert.parts.len()
        ));
        return Ok(());
    }
    if cert.parts[cert.n_fill].is_empty() {
        problems.push(format!("part at the filling number {} is empty", cert.n_fill));
    }
    for (i, part) in cert.parts.iter().enumerate().skip(cert.n_fill + 1) {
        if !part.is_empty() {
            problems.push(format!("part {i} past the filling number is nonempty"));
        }
    }

    // Transport conditions on the main schedule's tail above the marker.
    let key = (m_prev, cert.p);
    if !tails.contains_key(&key) {
        let tail = state.schedule.tail_schedule(m_prev)?;
        tails.insert(key, tail.power_schedule(cert.p as usize)?);
    }
    let tpow = &tails[&key];
    if let Some(beyond) = cert.parts.iter().find(|c| c.level() > tpow.top()) {
        problems.push(format!(
            "part level {} exceeds the schedule tail (top {})",
            beyond.level(),
            tpow.top()
        ));
        return Ok(());
    }
    match compute_checks(tpow, &cert.delta, &cert.delta_prime, &cert.t, &cert.parts) {
        Err(e) => problems.push(format!("re-check failed to run: {e}")),
        Ok((checks, fraction)) => {
            if fraction != cert.mass_fraction {
                problems.push(format!(
                    "mass fraction re-computes to {}, recorded {}",
                    fraction.frac_string(),
                    cert.mass_fraction.frac_string()
                ));
            }
            if checks != cert.checks {
                problems.push("recorded condition flags differ from recomputation".into());
            }
            if !checks.mass_over_half {
                problems.push("transported mass is not strictly above half".into());
            }
            if !checks.images_inside {
                problems.push("some image escapes the target atom's cylinder".into());
            }
            if !checks.images_disjoint {
                problems.push("images are not pairwise disjoint".into());
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The whole construction
// ---------------------------------------------------------------------------

/// One marker's divergence check: the top cube at the marker against twice
/// the previous cube side times the translation count — the infinite-measure
/// margin the doubling rule guarantees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerCheck<S> {
    /// Marker level `m_n`.
    pub level: usize,
    /// `h_{m_n} / (h_{m_n − 1} · #C_{m_n})`, the jump of the normalized
    /// measure ratio at the marker.
    pub ratio_jump: S,
    /// `ratio_jump ≥ 2`.
    pub ok: bool,
}

/// Summary returned by [`build_flow`].
#[derive(Debug, Clone)]
pub struct BuildReport<S> {
    /// Markers `m_1, …`.
    pub markers: Vec<usize>,
    /// Divergence margin at each marker.
    pub marker_checks: Vec<MarkerCheck<S>>,
    /// Normalized measure ratios over the whole schedule, with the
    /// divergence diagnostic at factor 2.
    pub growth: MeasureGrowthReport<S>,
}

/// Everything [`build_flow`] produces.
#[derive(Debug, Clone)]
pub struct BuildOutput<S> {
    /// Final state (schedule, partitions, markers, log).
    pub state: ForcingState<S>,
    /// All certificates from all steps, in emission order.
    pub certificates: Vec<Certificate<S>>,
    /// Divergence and marker summary.
    pub report: BuildReport<S>,
}

/// Run steps `1..=steps` from the seed cube `[0, 1)`.
///
/// `p_seq`: explicit powers, or `None` for the default diagonal enumeration.
/// `aux_specs`: one spec reused for every step, or exactly one per step.
pub fn build_flow<S: Scalar>(
    p_seq: Option<Vec<u32>>,
    steps: usize,
    aux_specs: &[AuxFlowSpec<S>],
    opts: &RunOptions,
) -> Result<BuildOutput<S>, ForcingError> {
    if steps == 0 {
        return Err(ForcingError::BadOptions("need at least one step".into()));
    }
    let p_seq = p_seq.unwrap_or_else(|| default_p_seq(steps));
    if p_seq.len() < steps {
        return Err(ForcingError::BadPSeq(format!(
            "{steps} steps need {steps} powers, got {}",
            p_seq.len()
        )));
    }
    if aux_specs.is_empty() || (aux_specs.len() != 1 && aux_specs.len() != steps) {
        return Err(ForcingError::BadAuxSpec(format!(
            "need one spec or one per step ({steps}), got {}",
            aux_specs.len()
        )));
    }
    let mut state = ForcingState::new(p_seq)?;
    let mut certificates = Vec::new();
    for n in 1..=steps {
        let spec = if aux_specs.len() == 1 { &aux_specs[0] } else { &aux_specs[n - 1] };
        certificates.extend(run_step(&mut state, n as u32, spec, opts)?);
    }
    let report = build_report(&state)?;
    Ok(BuildOutput { state, certificates, report })
}

/// Compute the marker and divergence summary for a state.
pub fn build_report<S: Scalar>(state: &ForcingState<S>) -> Result<BuildReport<S>, ForcingError> {
    let s = state.schedule();
    let two = S::from_int(2);
    let mut marker_checks = Vec::with_capacity(state.markers.len());
    for &m in &state.markers {
        let h = s.h(m)?.clone();
        let h_prev = s.h(m - 1)?.clone();
        let c_count = S::from_int(s.c_next(m - 1)?.len() as i64);
        let ratio_jump = h / (h_prev * c_count);
        let ok = ratio_jump >= two;
        marker_checks.push(MarkerCheck { level: m, ratio_jump, ok });
    }
    let growth = s.measure_growth(&two);
    Ok(BuildReport { markers: state.markers.clone(), marker_checks, growth })
}
