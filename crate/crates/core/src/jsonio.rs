//! JSON wire formats for every on-disk artifact.
//!
//! All rationals travel as reduced `"p/q"` strings (plain integers `"p"`
//! are accepted on input); no floats appear in any file.  Field order is
//! fixed by struct declaration and no maps are used, so serialization is
//! byte-deterministic.  Conversion back to domain values always re-runs the
//! full validation stack — nothing read from disk is trusted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxset::{Aabb, BoxError, BoxSet};
use crate::cfcore::{CFLevel, CFSchedule, CfError, Containment, Cylinder, ValidateError};
use crate::filling::{FillingResult, GridMax};
use crate::forcing::{
    AuxFlowSpec, BuildReport, CertChecks, Certificate, ForcingState, StepLog, Verdict,
};
use crate::orbit::SweepTable;
use crate::scalar::Scalar;

/// Errors raised while converting wire data to domain values.
#[derive(Debug, Error)]
pub enum JsonError {
    /// A rational string failed to parse.
    #[error("bad rational {text:?}: {why}")]
    BadRational { text: String, why: String },
    /// The schedule failed validation.
    #[error("schedule invalid: {0}")]
    Schedule(#[from] ValidateError),
    /// Box data failed validation.
    #[error("box data invalid: {0}")]
    BadBox(#[from] BoxError),
    /// Cylinder-layer failure (level ranges, base containment).
    #[error(transparent)]
    Cf(#[from] CfError),
    /// Structural problem not covered by a specific validator.
    #[error("structure invalid: {0}")]
    Shape(String),
}

fn rat_in<S: Scalar>(text: &str) -> Result<S, JsonError> {
    S::parse_frac(text).map_err(|e| JsonError::BadRational {
        text: text.to_owned(),
        why: e.to_string(),
    })
}

fn rats_out<S: Scalar>(xs: &[S]) -> Vec<String> {
    xs.iter().map(|x| x.frac_string()).collect()
}

fn rats_in<S: Scalar>(xs: &[String]) -> Result<Vec<S>, JsonError> {
    xs.iter().map(|x| rat_in(x)).collect()
}

// ---------------------------------------------------------------------------
// Boxes and box sets
// ---------------------------------------------------------------------------

/// One half-open box: corner vectors of rational strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxJson {
    /// Lower corner.
    pub lo: Vec<String>,
    /// Upper corner (exclusive).
    pub hi: Vec<String>,
}

/// A canonical box set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSetJson {
    /// Number of axes.
    pub dim: usize,
    /// Disjoint boxes covering the set.
    pub boxes: Vec<BoxJson>,
}

impl BoxSetJson {
    /// Encode a box set.
    pub fn from_set<S: Scalar>(set: &BoxSet<S>) -> Self {
        BoxSetJson {
            dim: set.dim(),
            boxes: set
                .boxes()
                .iter()
                .map(|b| BoxJson { lo: rats_out(b.lo()), hi: rats_out(b.hi()) })
                .collect(),
        }
    }

    /// Decode and re-canonicalize.
    pub fn to_set<S: Scalar>(&self) -> Result<BoxSet<S>, JsonError> {
        let mut boxes = Vec::with_capacity(self.boxes.len());
        for b in &self.boxes {
            boxes.push(Aabb::new(rats_in(&b.lo)?, rats_in(&b.hi)?)?);
        }
        Ok(BoxSet::from_boxes(self.dim, boxes)?)
    }
}

// ---------------------------------------------------------------------------
// Schedules and cylinders
// ---------------------------------------------------------------------------

/// One schedule level: the cube side and the translations into the next
/// level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    /// Cube side `h`.
    pub h: String,
    /// Translation vectors into the next level (empty on the last level).
    #[serde(rename = "C_next")]
    pub c_next: Vec<Vec<String>>,
}

/// A full translation schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleJson {
    /// Ambient dimension.
    pub dim: usize,
    /// Levels from the seed up.
    pub levels: Vec<LevelJson>,
    /// Whether the schedule carries the strong containment margin.
    pub strong: bool,
}

impl ScheduleJson {
    /// Encode a schedule.
    pub fn from_schedule<S: Scalar>(s: &CFSchedule<S>) -> Self {
        ScheduleJson {
            dim: s.dim(),
            levels: s
                .levels()
                .iter()
                .map(|lv| LevelJson {
                    h: lv.h.frac_string(),
                    c_next: lv.c_next.iter().map(|c| rats_out(c)).collect(),
                })
                .collect(),
            strong: s.is_strong(),
        }
    }

    /// Decode and fully re-validate in the declared mode.
    pub fn to_schedule<S: Scalar>(&self) -> Result<CFSchedule<S>, JsonError> {
        let mut levels = Vec::with_capacity(self.levels.len());
        for lv in &self.levels {
            let mut c_next = Vec::with_capacity(lv.c_next.len());
            for c in &lv.c_next {
                c_next.push(rats_in(c)?);
            }
            levels.push(CFLevel { h: rat_in(&lv.h)?, c_next });
        }
        let mode = if self.strong { Containment::Strong } else { Containment::Plain };
        Ok(CFSchedule::validate(self.dim, levels, mode)?)
    }
}

/// A cylinder: level plus base set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderJson {
    /// Schedule level of the description.
    pub level: usize,
    /// Base set inside that level's cube.
    pub base: BoxSetJson,
}

impl CylinderJson {
    /// Encode a cylinder.
    pub fn from_cylinder<S: Scalar>(c: &Cylinder<S>) -> Self {
        CylinderJson { level: c.level(), base: BoxSetJson::from_set(c.base()) }
    }

    /// Decode against a schedule (checks the base sits inside the cube).
    pub fn to_cylinder<S: Scalar>(&self, s: &CFSchedule<S>) -> Result<Cylinder<S>, JsonError> {
        Ok(s.cylinder(self.level, self.base.to_set()?)?)
    }
}

// ---------------------------------------------------------------------------
// Auxiliary staircase specs
// ---------------------------------------------------------------------------

/// Staircase parameters, single step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSpecJson {
    /// Optional pinned seed cube side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_h: Option<String>,
    /// Pieces per stage (cycled), each ≥ 2.
    pub cuts: Vec<u32>,
    /// Base gaps (cycled), each > 1.
    pub sigma: Vec<String>,
    /// Staircase increments (cycled), each ≥ 0.
    pub stair_unit: Vec<String>,
    /// Extra slack beyond the strong margin (cycled), each ≥ 0.
    pub slack: Vec<String>,
    /// Optional cap on the finite-measure ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_cap: Option<String>,
}

impl AuxSpecJson {
    /// Encode a spec.
    pub fn from_spec<S: Scalar>(spec: &AuxFlowSpec<S>) -> Self {
        AuxSpecJson {
            base_h: spec.base_h.as_ref().map(|x| x.frac_string()),
            cuts: spec.cuts.clone(),
            sigma: rats_out(&spec.sigma),
            stair_unit: rats_out(&spec.stair_unit),
            slack: rats_out(&spec.slack),
            ratio_cap: spec.ratio_cap.as_ref().map(|x| x.frac_string()),
        }
    }

    /// Decode (parameter validation happens when the spec is used).
    pub fn to_spec<S: Scalar>(&self) -> Result<AuxFlowSpec<S>, JsonError> {
        Ok(AuxFlowSpec {
            base_h: self.base_h.as_deref().map(rat_in).transpose()?,
            cuts: self.cuts.clone(),
            sigma: rats_in(&self.sigma)?,
            stair_unit: rats_in(&self.stair_unit)?,
            slack: rats_in(&self.slack)?,
            ratio_cap: self.ratio_cap.as_deref().map(rat_in).transpose()?,
        })
    }
}

/// An aux spec file: either a single spec (reused every step) or an
/// explicit per-step list `{"steps": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AuxSpecFileJson {
    /// One spec per step.
    Steps {
        /// Specs for steps 1, 2, … in order.
        steps: Vec<AuxSpecJson>,
    },
    /// A single spec reused at every step.
    Single(AuxSpecJson),
}

impl AuxSpecFileJson {
    /// Decode into the per-step spec list handed to the builder.
    pub fn to_specs<S: Scalar>(&self) -> Result<Vec<AuxFlowSpec<S>>, JsonError> {
        match self {
            AuxSpecFileJson::Single(spec) => Ok(vec![spec.to_spec()?]),
            AuxSpecFileJson::Steps { steps } => {
                if steps.is_empty() {
                    return Err(JsonError::Shape("steps list is empty".into()));
                }
                steps.iter().map(|s| s.to_spec()).collect()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Grid tables
// ---------------------------------------------------------------------------

/// One probed triple in a grid table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridEntryJson {
    /// Source atom index.
    pub a: usize,
    /// Target atom index.
    pub b: usize,
    /// Probe time.
    pub t: String,
    /// Filling number.
    #[serde(rename = "N")]
    pub n: usize,
}

/// A full grid-maximum table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMaxJson {
    /// Step parameter `n` (grid spans `[1/n, n]`).
    pub n: u32,
    /// Power `p`.
    pub p: u32,
    /// The time grid.
    pub grid: Vec<String>,
    /// One row per `(a, b, t)`.
    pub table: Vec<GridEntryJson>,
    /// Maximum filling number over the table.
    #[serde(rename = "D")]
    pub d: usize,
}

impl GridMaxJson {
    /// Encode a grid table.
    pub fn from_grid<S: Scalar>(g: &GridMax<S>) -> Self {
        GridMaxJson {
            n: g.n,
            p: g.p,
            grid: rats_out(&g.grid),
            table: g
                .table
                .iter()
                .map(|e| GridEntryJson {
                    a: e.a,
                    b: e.b,
                    t: e.t.frac_string(),
                    n: e.n_fill,
                })
                .collect(),
            d: g.d_max,
        }
    }
}

// ---------------------------------------------------------------------------
// Filling results
// ---------------------------------------------------------------------------

/// Output of one filling run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillJson {
    /// The defining shift.
    pub q: Vec<String>,
    /// Filling number.
    #[serde(rename = "N")]
    pub n: usize,
    /// `⌊‖q‖⌋ + 1`.
    #[serde(rename = "Q")]
    pub big_q: i64,
    /// A-priori level bound `a.level + Q·N`.
    pub work_level: usize,
    /// Level the parts are stored at.
    pub parts_level: usize,
    /// The parts `A_0, …, A_N`.
    pub parts: Vec<CylinderJson>,
    /// Exact masses, aligned with `parts`.
    pub masses: Vec<String>,
    /// Total transported mass.
    pub mass: String,
    /// `μ(A)`.
    pub total: String,
    /// `mass / total`.
    pub mass_fraction: String,
    /// Mass skipped as untestable (zero in exact mode).
    pub censored: String,
}

impl FillJson {
    /// Encode a filling result.
    pub fn from_result<S: Scalar>(r: &FillingResult<S>) -> Self {
        FillJson {
            q: rats_out(&r.q),
            n: r.n,
            big_q: r.big_q,
            work_level: r.work_level,
            parts_level: r.parts_level,
            parts: r.parts.iter().map(CylinderJson::from_cylinder).collect(),
            masses: r.masses.iter().map(|m| m.value().frac_string()).collect(),
            mass: r.mass.value().frac_string(),
            total: r.total.value().frac_string(),
            mass_fraction: r.mass_fraction.frac_string(),
            censored: r.censored.value().frac_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// The three recorded transport conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertChecksJson {
    /// Transported mass strictly above half.
    pub mass_over_half: bool,
    /// Every image defined and inside the target cylinder.
    pub images_inside: bool,
    /// Images pairwise disjoint.
    pub images_disjoint: bool,
}

/// One certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    /// Step number.
    pub step: u32,
    /// Power.
    pub p: u32,
    /// Marker the step started from.
    pub base_marker: usize,
    /// Grafting divisor `D` of the step.
    #[serde(rename = "D")]
    pub d: usize,
    /// Flat index of the source atom.
    pub a: u64,
    /// Flat index of the target atom.
    pub b: u64,
    /// The source atom.
    pub delta: BoxSetJson,
    /// The target atom.
    pub delta_prime: BoxSetJson,
    /// Probe time.
    pub t: String,
    /// Filling number.
    #[serde(rename = "N")]
    pub n: usize,
    /// Parts at a common level, indexed relative to `base_marker`.
    pub parts: Vec<CylinderJson>,
    /// Exact transported fraction.
    pub mass_fraction: String,
    /// Recorded conditions.
    pub checks: CertChecksJson,
    /// The step's full time grid.
    pub grid: Vec<String>,
}

/// The certificate file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertsFileJson {
    /// All certificates, in emission order.
    pub certificates: Vec<CertificateJson>,
}

impl CertificateJson {
    /// Encode a certificate.
    pub fn from_certificate<S: Scalar>(c: &Certificate<S>) -> Self {
        CertificateJson {
            step: c.step,
            p: c.p,
            base_marker: c.base_marker,
            d: c.d_n,
            a: c.a_idx,
            b: c.b_idx,
            delta: BoxSetJson::from_set(&c.delta),
            delta_prime: BoxSetJson::from_set(&c.delta_prime),
            t: c.t.frac_string(),
            n: c.n_fill,
            parts: c.parts.iter().map(CylinderJson::from_cylinder).collect(),
            mass_fraction: c.mass_fraction.frac_string(),
            checks: CertChecksJson {
                mass_over_half: c.checks.mass_over_half,
                images_inside: c.checks.images_inside,
                images_disjoint: c.checks.images_disjoint,
            },
            grid: rats_out(&c.grid),
        }
    }

    /// Decode against a state: part cylinders are validated on the tail of
    /// the state's schedule above the recorded marker.
    pub fn to_certificate<S: Scalar>(
        &self,
        state: &ForcingState<S>,
    ) -> Result<Certificate<S>, JsonError> {
        let tail = state.schedule().tail_schedule(self.base_marker)?;
        let tpow = tail.power_schedule(self.p as usize)?;
        let mut parts = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            parts.push(p.to_cylinder(&tpow)?);
        }
        Ok(Certificate {
            step: self.step,
            p: self.p,
            base_marker: self.base_marker,
            d_n: self.d,
            a_idx: self.a,
            b_idx: self.b,
            delta: self.delta.to_set()?,
            delta_prime: self.delta_prime.to_set()?,
            t: rat_in(&self.t)?,
            n_fill: self.n,
            parts,
            mass_fraction: rat_in(&self.mass_fraction)?,
            checks: CertChecks {
                mass_over_half: self.checks.mass_over_half,
                images_inside: self.checks.images_inside,
                images_disjoint: self.checks.images_disjoint,
            },
            grid: rats_in(&self.grid)?,
        })
    }
}

/// Encode a certificate list as a file.
pub fn certs_to_json<S: Scalar>(certs: &[Certificate<S>]) -> CertsFileJson {
    CertsFileJson {
        certificates: certs.iter().map(CertificateJson::from_certificate).collect(),
    }
}

/// Decode a certificate file against a state.
pub fn certs_from_json<S: Scalar>(
    state: &ForcingState<S>,
    file: &CertsFileJson,
) -> Result<Vec<Certificate<S>>, JsonError> {
    file.certificates.iter().map(|c| c.to_certificate(state)).collect()
}

// ---------------------------------------------------------------------------
// Flow state and step logs
// ---------------------------------------------------------------------------

/// Per-step log entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLogJson {
    /// Step number.
    pub n: u32,
    /// Power.
    pub p: u32,
    /// Marker before the step.
    pub m_prev: usize,
    /// Marker after the step.
    pub m_n: usize,
    /// Grafting divisor.
    #[serde(rename = "D")]
    pub d: usize,
    /// Worst observed filling number before flooring.
    pub d_raw: usize,
    /// Deepest part level seen.
    pub max_parts_level: usize,
    /// Probe grid.
    pub grid: Vec<String>,
    /// Base partition atom count.
    pub atoms: u64,
    /// Product atom count.
    pub power_atoms: u64,
    /// Probed pair scope.
    pub scope: String,
    /// Fills run.
    pub fills: usize,
    /// Certificates emitted.
    pub certificates: usize,
    /// Staircase depth generated.
    pub aux_levels: usize,
    /// Finite-measure diagnostic ratios.
    pub aux_ratios: Vec<String>,
    /// Seed cube side of the staircase.
    pub base_h: String,
    /// Staircase top side before doubling.
    pub aux_top_h: String,
}

impl StepLogJson {
    fn from_log<S: Scalar>(l: &StepLog<S>) -> Self {
        StepLogJson {
            n: l.n,
            p: l.p,
            m_prev: l.m_prev,
            m_n: l.m_n,
            d: l.d_n,
            d_raw: l.d_raw,
            max_parts_level: l.max_parts_level,
            grid: rats_out(&l.grid),
            atoms: l.atoms,
            power_atoms: l.power_atoms,
            scope: l.scope.clone(),
            fills: l.fills,
            certificates: l.certificates,
            aux_levels: l.aux_levels,
            aux_ratios: rats_out(&l.aux_ratios),
            base_h: l.base_h.frac_string(),
            aux_top_h: l.aux_top_h.frac_string(),
        }
    }

    fn to_log<S: Scalar>(&self) -> Result<StepLog<S>, JsonError> {
        Ok(StepLog {
            n: self.n,
            p: self.p,
            m_prev: self.m_prev,
            m_n: self.m_n,
            d_n: self.d,
            d_raw: self.d_raw,
            max_parts_level: self.max_parts_level,
            grid: rats_in(&self.grid)?,
            atoms: self.atoms,
            power_atoms: self.power_atoms,
            scope: self.scope.clone(),
            fills: self.fills,
            certificates: self.certificates,
            aux_levels: self.aux_levels,
            aux_ratios: rats_in(&self.aux_ratios)?,
            base_h: rat_in(&self.base_h)?,
            aux_top_h: rat_in(&self.aux_top_h)?,
        })
    }
}

/// The flow file: the schedule plus construction bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowJson {
    /// The grafted schedule.
    pub schedule: ScheduleJson,
    /// Markers of the completed steps.
    pub markers: Vec<usize>,
    /// Power sequence.
    pub p_seq: Vec<u32>,
    /// Per-step logs.
    pub log: Vec<StepLogJson>,
}

impl FlowJson {
    /// Encode a state.
    pub fn from_state<S: Scalar>(state: &ForcingState<S>) -> Self {
        FlowJson {
            schedule: ScheduleJson::from_schedule(state.schedule()),
            markers: state.markers().to_vec(),
            p_seq: state.p_seq().to_vec(),
            log: state.log().iter().map(StepLogJson::from_log).collect(),
        }
    }

    /// Decode and re-validate: schedule, markers, and partitions are all
    /// re-derived and re-checked.
    pub fn to_state<S: Scalar>(&self) -> Result<ForcingState<S>, JsonError> {
        let schedule = self.schedule.to_schedule()?;
        let log = self
            .log
            .iter()
            .map(|l| l.to_log())
            .collect::<Result<Vec<_>, _>>()?;
        ForcingState::from_parts(schedule, self.markers.clone(), self.p_seq.clone(), log)
            .map_err(|e| JsonError::Shape(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Verdicts, reports, sweeps
// ---------------------------------------------------------------------------

/// An explicit atom list for grid scans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomsFileJson {
    /// Atoms; must partition the level-0 cube exactly.
    pub atoms: Vec<BoxSetJson>,
}

/// An explicit target list for sweeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetsFileJson {
    /// Target cylinders.
    pub targets: Vec<CylinderJson>,
}

/// Image/remainder pair of a partial translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportJson {
    /// The translated in-range part.
    pub image: CylinderJson,
    /// The part the translation could not move at the reached level.
    pub remainder: CylinderJson,
    /// Exact measure of the image.
    pub image_measure: String,
    /// Exact measure of the remainder.
    pub remainder_measure: String,
}

impl TransportJson {
    /// Encode a transport outcome with its exact masses.
    pub fn from_transport<S: Scalar>(
        s: &CFSchedule<S>,
        t: &crate::cfcore::Transport<S>,
    ) -> Result<Self, JsonError> {
        Ok(TransportJson {
            image: CylinderJson::from_cylinder(&t.image),
            remainder: CylinderJson::from_cylinder(&t.remainder),
            image_measure: s.cylinder_measure(&t.image)?.value().frac_string(),
            remainder_measure: s.cylinder_measure(&t.remainder)?.value().frac_string(),
        })
    }
}

/// One failing certificate in a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertFailureJson {
    /// Index into the checked list.
    pub index: usize,
    /// Findings.
    pub problems: Vec<String>,
}

/// Re-verification outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    /// Certificates examined.
    pub total: usize,
    /// Certificates that passed.
    pub passed: usize,
    /// Whether everything passed.
    pub ok: bool,
    /// Failing certificates with findings.
    pub failures: Vec<CertFailureJson>,
}

impl VerdictJson {
    /// Encode a verdict.
    pub fn from_verdict(v: &Verdict) -> Self {
        VerdictJson {
            total: v.total,
            passed: v.passed,
            ok: v.ok(),
            failures: v
                .failures
                .iter()
                .map(|f| CertFailureJson { index: f.index, problems: f.problems.clone() })
                .collect(),
        }
    }
}

/// One marker's divergence margin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerCheckJson {
    /// Marker level.
    pub level: usize,
    /// Jump of the normalized measure ratio at the marker.
    pub ratio_jump: String,
    /// Jump ≥ 2.
    pub ok: bool,
}

/// Build summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    /// Markers.
    pub markers: Vec<usize>,
    /// Per-marker divergence margins.
    pub marker_checks: Vec<MarkerCheckJson>,
    /// Normalized measure ratios over all levels.
    pub growth_ratios: Vec<String>,
    /// Whether the ratios are diverging at factor 2 at the top.
    pub diverging: bool,
}

impl ReportJson {
    /// Encode a build report.
    pub fn from_report<S: Scalar>(r: &BuildReport<S>) -> Self {
        ReportJson {
            markers: r.markers.clone(),
            marker_checks: r
                .marker_checks
                .iter()
                .map(|m| MarkerCheckJson {
                    level: m.level,
                    ratio_jump: m.ratio_jump.frac_string(),
                    ok: m.ok,
                })
                .collect(),
            growth_ratios: rats_out(&r.growth.ratios),
            diverging: r.growth.diverging,
        }
    }
}

/// The build-report file: construction summary plus the re-verification
/// verdict of the emitted certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFileJson {
    /// Markers, divergence margins, and growth ratios.
    pub report: ReportJson,
    /// Outcome of re-checking every certificate.
    pub verdict: VerdictJson,
}

/// One target's sweep row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRowJson {
    /// Target index.
    pub target: usize,
    /// Samples that hit within the horizon.
    pub hits: u64,
    /// Samples that never hit.
    pub misses: u64,
    /// Samples whose orbit left the schedule unresolved.
    pub censored: u64,
    /// Exact hit fraction `hits / samples`.
    pub hit_fraction: String,
    /// Mean first-hit step among hitting samples, exact, when any hit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_first_hit: Option<String>,
}

/// Sweep diagnostics table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepJson {
    /// Samples swept.
    pub samples: u64,
    /// Iterations applied after step 0.
    pub horizon: usize,
    /// The diagonal time.
    pub t: String,
    /// One row per target.
    pub rows: Vec<SweepRowJson>,
}

impl SweepJson {
    /// Encode a sweep table (fractions computed exactly).
    pub fn from_table<S: Scalar>(t: &S, table: &SweepTable) -> Self {
        let rows = table
            .rows
            .iter()
            .map(|r| {
                let hit_fraction = if table.samples == 0 {
                    S::zero()
                } else {
                    S::from_int(r.hits as i64) / S::from_int(table.samples as i64)
                };
                let mean_first_hit = if r.hits == 0 {
                    None
                } else {
                    Some(
                        (S::from_int(r.first_hit_sum as i64) / S::from_int(r.hits as i64))
                            .frac_string(),
                    )
                };
                SweepRowJson {
                    target: r.target,
                    hits: r.hits,
                    misses: r.misses,
                    censored: r.censored,
                    hit_fraction: hit_fraction.frac_string(),
                    mean_first_hit,
                }
            })
            .collect();
        SweepJson {
            samples: table.samples,
            horizon: table.horizon,
            t: t.frac_string(),
            rows,
        }
    }
}
