//! `forge` — command-line front end for the exact-arithmetic rank-one flow
//! engine.
//!
//! Subcommands cover the full pipeline: validating schedule files, running
//! construction steps (`build`), re-verifying emitted certificates (`check`),
//! and poking at individual pieces (`fill`, `gridmax`, `power`, `sweep`,
//! `measure`, `lift`, `apply`).
//!
//! Exit codes: 0 success, 1 usage/environment, 2 parse or validation failure,
//! 3 resource budget exhausted, 4 mathematical precondition violated.
//! All file formats use reduced `"p/q"` rational strings — no floats — and
//! identical inputs always produce byte-identical outputs, independent of the
//! parallelism width (`FORGE_THREADS`).

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::exit;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use forge_core::boxset::{Aabb, BoxSet};
use forge_core::cfcore::{CFSchedule, CfError, Cylinder};
use forge_core::filling::{fill, grid_max, FillError, FillMode, FillOptions, GridError};
use forge_core::forcing::{
    build_report, check_certificates, default_p_seq, run_step, AuxFlowSpec, Certificate,
    ForcingError, ForcingState, PairScope, RunOptions, Verdict,
};
use forge_core::jsonio::{
    certs_from_json, certs_to_json, AtomsFileJson, AuxSpecFileJson, CertsFileJson, CylinderJson,
    FillJson, FlowJson, GridMaxJson, JsonError, ReportFileJson, ReportJson, ScheduleJson,
    SweepJson, TargetsFileJson, TransportJson, VerdictJson,
};
use forge_core::orbit::{sweep_stats, FiberPoint, OrbitError};
use forge_core::rng::SplitMix64;
use forge_core::scalar::Scalar;
use forge_core::Rat;

const EXIT_USAGE: i32 = 1;
const EXIT_VALIDATION: i32 = 2;
const EXIT_BUDGET: i32 = 3;
const EXIT_PRECONDITION: i32 = 4;

/// Denominator used when drawing sweep sample coordinates: coordinates are
/// `h_0 · k / 2^20`, exact rationals on a fine fixed lattice.
const SAMPLE_DENOM: u64 = 1 << 20;

/// Cap on generated grid atoms (`cells^p`), to refuse absurd scans early.
const ATOM_CAP: u64 = 100_000;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Exact-arithmetic engine for rank-one flows: build schedules, \
             emit transport certificates, and re-verify them",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a schedule (or flow) file and report the first violation.
    Validate {
        /// Schedule or flow JSON file.
        path: PathBuf,
    },
    /// Run construction steps; write the flow, its certificates, and a report.
    Build(BuildArgs),
    /// Re-verify a certificate file against a flow from scratch.
    Check {
        /// Flow file.
        #[arg(long)]
        flow: PathBuf,
        /// Certificate file.
        #[arg(long)]
        certs: PathBuf,
        /// Print the verdict as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the transport recursion for one shift and cylinder pair.
    Fill(FillArgs),
    /// Scan atom pairs × grid times and report the worst filling number.
    Gridmax(GridmaxArgs),
    /// Emit the p-fold product of a schedule.
    Power {
        /// Schedule or flow file.
        #[arg(long)]
        flow: PathBuf,
        /// Product exponent.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        p: u32,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hitting-time statistics along the diagonal translation.
    Sweep(SweepArgs),
    /// Exact measure of a cylinder.
    Measure {
        /// Schedule or flow file.
        #[arg(long)]
        flow: PathBuf,
        /// Cylinder file (`{"level": …, "base": …}`).
        #[arg(long)]
        cyl: PathBuf,
        /// Measure in the p-fold product schedule.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        p: u32,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Re-express a cylinder at a higher level.
    Lift {
        /// Schedule or flow file.
        #[arg(long)]
        flow: PathBuf,
        /// Cylinder file.
        #[arg(long)]
        cyl: PathBuf,
        /// Target level.
        #[arg(long)]
        to: usize,
        /// Work in the p-fold product schedule.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        p: u32,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the partial translation T_g to a cylinder.
    Apply {
        /// Schedule or flow file.
        #[arg(long)]
        flow: PathBuf,
        /// Cylinder file.
        #[arg(long)]
        cyl: PathBuf,
        /// Shift vector, comma-separated rationals (e.g. `1` or `1,1/2`).
        #[arg(long)]
        g: String,
        /// Remainder threshold: climb levels until the unmoved mass is below
        /// this.
        #[arg(long, default_value = "1")]
        eps: String,
        /// Work in the p-fold product schedule.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        p: u32,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BuildArgs {
    /// Number of construction steps.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    steps: u32,
    /// Powers per step: `auto` or a comma list like `2,3,2`.
    #[arg(long, default_value = "auto")]
    p_seq: String,
    /// Probe-grid density: step-n grids use spacing ≤ 1/density.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    grid_density: u32,
    /// Transport iteration budget per fill (0 exhausts immediately).
    #[arg(long, default_value_t = 64)]
    budget: usize,
    /// Extra factor on each step's grafting depth.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    d_margin: u64,
    /// Atom pairs to probe: `all`, `diagonal`, `banded:W`, or
    /// `sample:CAP:SEED`.
    #[arg(long, default_value = "all")]
    pair_scope: String,
    /// Hard cap on fills per step (pairs × grid times).
    #[arg(long, default_value_t = 200_000)]
    work_cap: usize,
    /// Hard cap on boxes per set inside a fill.
    #[arg(long, default_value_t = 200_000)]
    max_boxes: usize,
    /// Staircase parameter file (one spec, or `{"steps": […]}`).
    #[arg(long)]
    aux: Option<PathBuf>,
    /// Flow output path.
    #[arg(long, default_value = "flow.json")]
    out: PathBuf,
    /// Certificate output path.
    #[arg(long, default_value = "certs.json")]
    certs: PathBuf,
    /// Report output path.
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
}

#[derive(Args)]
struct FillArgs {
    /// Schedule or flow file.
    #[arg(long)]
    flow: PathBuf,
    /// Shift vector, comma-separated rationals.
    #[arg(long)]
    q: String,
    /// Source cylinder file.
    #[arg(long)]
    a: PathBuf,
    /// Target cylinder file.
    #[arg(long)]
    b: PathBuf,
    /// Transport iteration budget.
    #[arg(long, default_value_t = 64)]
    budget: usize,
    /// Switch to tracked mode with this untestable-mass budget per step.
    #[arg(long)]
    eps: Option<String>,
    /// Hard cap on boxes per set.
    #[arg(long, default_value_t = 200_000)]
    max_boxes: usize,
    /// Print the full result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GridmaxArgs {
    /// Schedule or flow file.
    #[arg(long)]
    flow: PathBuf,
    /// Step index: the grid spans [1/n, n].
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Product exponent.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    p: u32,
    /// Grid density.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    density: u32,
    /// Split the seed cube into this many equal cells per axis (atoms are
    /// their p-fold products).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    cells: u64,
    /// Explicit atom file (`{"atoms": […]}`); overrides --cells.
    #[arg(long)]
    atoms: Option<PathBuf>,
    /// Transport iteration budget per fill.
    #[arg(long, default_value_t = 64)]
    budget: usize,
    /// Hard cap on boxes per set.
    #[arg(long, default_value_t = 200_000)]
    max_boxes: usize,
    /// Print the full table as JSON.
    #[arg(long)]
    json: bool,
    /// Write the JSON table here as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Schedule or flow file.
    #[arg(long)]
    flow: PathBuf,
    /// Diagonal time: iterate x ↦ x + (t,…,t).
    #[arg(long)]
    t: String,
    /// Work in the p-fold product schedule.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    p: u32,
    /// Number of sample points.
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Iterations per sample after step 0.
    #[arg(long, default_value_t = 64)]
    horizon: usize,
    /// Seed for the deterministic sample draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target cylinder file (`{"targets": […]}`); default is the full
    /// level-0 cylinder.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Print the full table as JSON.
    #[arg(long)]
    json: bool,
}

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CmdResult = Result<(), Failure>;

fn classify_cf(e: &CfError) -> i32 {
    match e {
        CfError::ScheduleTooShort { .. } => EXIT_BUDGET,
        _ => EXIT_VALIDATION,
    }
}

fn classify_fill(e: &FillError) -> i32 {
    match e {
        FillError::BudgetExhausted { .. }
        | FillError::BoxesExceeded { .. }
        | FillError::ScheduleTooShort { .. } => EXIT_BUDGET,
        FillError::MassMismatch { .. }
        | FillError::ZeroMass
        | FillError::NegativeShift { .. }
        | FillError::ScheduleNotStrong => EXIT_PRECONDITION,
        FillError::CertificateViolation { .. } => EXIT_VALIDATION,
        FillError::Cf(e) => classify_cf(e),
    }
}

fn classify_forcing(e: &ForcingError) -> i32 {
    if e.is_resource_limit() {
        EXIT_BUDGET
    } else if e.is_precondition_failure() {
        EXIT_PRECONDITION
    } else {
        EXIT_VALIDATION
    }
}

fn classify_grid(e: &GridError) -> i32 {
    match e {
        GridError::AtomsNotPartition { .. } => EXIT_PRECONDITION,
        GridError::Fill { source, .. } => classify_fill(source),
        GridError::Cf(e) => classify_cf(e),
    }
}

fn classify_orbit(e: &OrbitError) -> i32 {
    match e {
        OrbitError::ScheduleTooShort { .. } => EXIT_BUDGET,
        OrbitError::OutOfCube { .. } => EXIT_PRECONDITION,
        OrbitError::Cf(e) => classify_cf(e),
    }
}

fn from_json_err(e: JsonError) -> Failure {
    fail(EXIT_VALIDATION, e.to_string())
}

trait Classify {
    fn code(&self) -> i32;
}
impl Classify for CfError {
    fn code(&self) -> i32 {
        classify_cf(self)
    }
}
impl Classify for FillError {
    fn code(&self) -> i32 {
        classify_fill(self)
    }
}
impl Classify for ForcingError {
    fn code(&self) -> i32 {
        classify_forcing(self)
    }
}
impl Classify for GridError {
    fn code(&self) -> i32 {
        classify_grid(self)
    }
}
impl Classify for OrbitError {
    fn code(&self) -> i32 {
        classify_orbit(self)
    }
}

fn domain<E: Classify + Display>(e: E) -> Failure {
    fail(e.code(), e.to_string())
}

// ---------------------------------------------------------------------------
// I/O helpers
// ---------------------------------------------------------------------------

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| {
        fail(
            EXIT_VALIDATION,
            format!(
                "parse error in {} at line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ),
        )
    })
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    parse_json(path, &text)
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))
}

fn emit<T: Serialize>(v: &T, out: Option<&Path>) -> CmdResult {
    let text = to_pretty(v);
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Load a schedule from either a bare schedule file or a flow file (any JSON
/// object with a `schedule` field).
fn load_schedule(path: &Path) -> Result<CFSchedule<Rat>, Failure> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    let sched_json: ScheduleJson = if value.get("schedule").is_some() {
        let flow: FlowJson = serde_json::from_value(value).map_err(|e| {
            fail(EXIT_VALIDATION, format!("parse error in {}: {e}", path.display()))
        })?;
        flow.schedule
    } else {
        serde_json::from_value(value).map_err(|e| {
            fail(EXIT_VALIDATION, format!("parse error in {}: {e}", path.display()))
        })?
    };
    sched_json.to_schedule().map_err(from_json_err)
}

fn power_of(s: &CFSchedule<Rat>, p: u32) -> Result<CFSchedule<Rat>, Failure> {
    s.power_schedule(p as usize).map_err(domain)
}

fn load_cylinder(path: &Path, s: &CFSchedule<Rat>) -> Result<Cylinder<Rat>, Failure> {
    let cj: CylinderJson = load_json(path)?;
    cj.to_cylinder(s).map_err(from_json_err)
}

fn parse_rat(text: &str) -> Result<Rat, Failure> {
    Rat::parse_frac(text.trim())
        .map_err(|e| fail(EXIT_VALIDATION, format!("bad rational {text:?}: {e}")))
}

fn parse_rat_vec(text: &str) -> Result<Vec<Rat>, Failure> {
    text.split(',').map(parse_rat).collect()
}

fn check_dim(name: &str, v: &[Rat], dim: usize) -> CmdResult {
    if v.len() != dim {
        return Err(fail(
            EXIT_VALIDATION,
            format!("{name} has {} components, schedule dimension is {dim}", v.len()),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

fn configured_threads() -> Result<Option<usize>, Failure> {
    match std::env::var("FORGE_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(fail(EXIT_USAGE, format!("FORGE_THREADS: {e}"))),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| {
                fail(EXIT_USAGE, format!("FORGE_THREADS must be a positive integer, got {v:?}"))
            }),
    }
}

/// Run the closure either on the global pool or on a dedicated pool of the
/// requested width.  Results do not depend on the width; only wall time does.
fn run_in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match configured_threads()? {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| fail(EXIT_USAGE, format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_validate(path: &Path) -> CmdResult {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    if value.get("schedule").is_some() {
        let flow: FlowJson = serde_json::from_value(value).map_err(|e| {
            fail(EXIT_VALIDATION, format!("parse error in {}: {e}", path.display()))
        })?;
        let state = flow.to_state::<Rat>().map_err(from_json_err)?;
        println!(
            "valid flow: dim {}, {} levels, {} markers, {} steps logged",
            state.schedule().dim(),
            state.schedule().len(),
            state.markers().len(),
            state.log().len()
        );
    } else {
        let sj: ScheduleJson = serde_json::from_value(value).map_err(|e| {
            fail(EXIT_VALIDATION, format!("parse error in {}: {e}", path.display()))
        })?;
        let s = sj.to_schedule::<Rat>().map_err(from_json_err)?;
        println!(
            "valid schedule: dim {}, {} levels, {} containment",
            s.dim(),
            s.len(),
            if s.is_strong() { "strong" } else { "plain" }
        );
    }
    Ok(())
}

fn parse_p_seq(text: &str, steps: u32) -> Result<Vec<u32>, Failure> {
    if text == "auto" {
        return Ok(default_p_seq(steps as usize));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|e| fail(EXIT_VALIDATION, format!("bad power {s:?} in --p-seq: {e}")))
        })
        .collect()
}

fn print_verdict_failures(verdict: &Verdict) {
    for f in &verdict.failures {
        println!("certificate {}:", f.index);
        for p in &f.problems {
            println!("  - {p}");
        }
    }
}

fn cmd_build(args: &BuildArgs) -> CmdResult {
    let outputs = [&args.out, &args.certs, &args.report];
    for i in 0..outputs.len() {
        for j in i + 1..outputs.len() {
            if outputs[i] == outputs[j] {
                return Err(fail(
                    EXIT_USAGE,
                    format!("output paths must be distinct: {}", outputs[i].display()),
                ));
            }
        }
    }
    let p_seq = parse_p_seq(&args.p_seq, args.steps)?;
    if (p_seq.len() as u32) < args.steps {
        return Err(fail(
            EXIT_VALIDATION,
            format!("{} steps need {} powers, --p-seq has {}", args.steps, args.steps, p_seq.len()),
        ));
    }
    let scope = PairScope::parse(&args.pair_scope)
        .map_err(|e| fail(EXIT_VALIDATION, format!("bad --pair-scope: {e}")))?;
    let specs: Vec<AuxFlowSpec<Rat>> = match &args.aux {
        None => vec![AuxFlowSpec::standard()],
        Some(path) => {
            let file: AuxSpecFileJson = load_json(path)?;
            file.to_specs().map_err(from_json_err)?
        }
    };
    if specs.len() != 1 && specs.len() != args.steps as usize {
        return Err(fail(
            EXIT_VALIDATION,
            format!("aux file has {} specs; need 1 or {}", specs.len(), args.steps),
        ));
    }
    let opts = RunOptions {
        grid_density: args.grid_density,
        budget: args.budget,
        scope,
        d_margin: args.d_margin as usize,
        work_cap: args.work_cap,
        max_boxes: args.max_boxes,
    };

    let result: Result<(ForcingState<Rat>, Vec<Certificate<Rat>>, Verdict), (u32, ForcingError)> =
        run_in_pool(move || {
            let mut state = ForcingState::<Rat>::new(p_seq).map_err(|e| (0, e))?;
            let mut certificates = Vec::new();
            for n in 1..=args.steps {
                let spec = if specs.len() == 1 { &specs[0] } else { &specs[n as usize - 1] };
                let mut step_certs = run_step(&mut state, n, spec, &opts).map_err(|e| (n, e))?;
                certificates.append(&mut step_certs);
            }
            let verdict = check_certificates(&state, &certificates).map_err(|e| (0, e))?;
            Ok((state, certificates, verdict))
        })?;
    let (state, certificates, verdict) = result.map_err(|(n, e)| {
        let prefix = if n == 0 { String::new() } else { format!("step {n}: ") };
        fail(classify_forcing(&e), format!("{prefix}{e}"))
    })?;

    for log in state.log() {
        println!(
            "step {}: p={}, marker {} -> {}, D={}, {} fills (scope {}), {} certificates",
            log.n, log.p, log.m_prev, log.m_n, log.d_n, log.fills, log.scope, log.certificates
        );
    }
    let report = build_report(&state).map_err(domain)?;
    for mc in &report.marker_checks {
        println!(
            "marker level {}: ratio jump {} ({})",
            mc.level,
            mc.ratio_jump.frac_string(),
            if mc.ok { "ok" } else { "below 2" }
        );
    }

    write_file(&args.out, &to_pretty(&FlowJson::from_state(&state)))?;
    write_file(&args.certs, &to_pretty(&certs_to_json(&certificates)))?;
    let report_file = ReportFileJson {
        report: ReportJson::from_report(&report),
        verdict: VerdictJson::from_verdict(&verdict),
    };
    write_file(&args.report, &to_pretty(&report_file))?;
    println!(
        "wrote {}, {}, {}",
        args.out.display(),
        args.certs.display(),
        args.report.display()
    );

    print_verdict_failures(&verdict);
    println!("verdict: {}/{} certificates verified", verdict.passed, verdict.total);
    if verdict.ok() {
        Ok(())
    } else {
        Err(fail(EXIT_VALIDATION, "emitted certificates failed re-verification"))
    }
}

fn cmd_check(flow: &Path, certs: &Path, json: bool) -> CmdResult {
    let flow_json: FlowJson = load_json(flow)?;
    let state = flow_json.to_state::<Rat>().map_err(from_json_err)?;
    let certs_json: CertsFileJson = load_json(certs)?;
    let certificates = certs_from_json(&state, &certs_json).map_err(from_json_err)?;
    let verdict =
        run_in_pool(|| check_certificates(&state, &certificates))?.map_err(domain)?;
    if json {
        print!("{}", to_pretty(&VerdictJson::from_verdict(&verdict)));
    } else {
        print_verdict_failures(&verdict);
        println!("verdict: {}/{} certificates verified", verdict.passed, verdict.total);
    }
    if verdict.ok() {
        Ok(())
    } else {
        Err(fail(EXIT_VALIDATION, "certificate re-verification failed"))
    }
}

fn cmd_fill(args: &FillArgs) -> CmdResult {
    let s = load_schedule(&args.flow)?;
    let q = parse_rat_vec(&args.q)?;
    check_dim("q", &q, s.dim())?;
    let a = load_cylinder(&args.a, &s)?;
    let b = load_cylinder(&args.b, &s)?;
    let mode = match &args.eps {
        None => FillMode::Exact,
        Some(text) => FillMode::Tracked { eps: parse_rat(text)? },
    };
    let opts = FillOptions {
        mode,
        budget: args.budget,
        max_boxes: args.max_boxes,
        ..FillOptions::default()
    };
    let result = run_in_pool(|| fill(&s, &q, &a, &b, &opts))?.map_err(domain)?;
    if args.json {
        print!("{}", to_pretty(&FillJson::from_result(&result)));
        return Ok(());
    }
    println!(
        "N = {}   Q = {}   work_level = {}   parts_level = {}",
        result.n, result.big_q, result.work_level, result.parts_level
    );
    for (i, (part, mass)) in result.parts.iter().zip(&result.masses).enumerate() {
        println!(
            "part {i}: level {}, {} boxes, mass {}",
            part.level(),
            part.base().boxes().len(),
            mass.value().frac_string()
        );
    }
    println!(
        "mass {} of {} (fraction {})",
        result.mass.value().frac_string(),
        result.total.value().frac_string(),
        result.mass_fraction.frac_string()
    );
    if !result.censored.is_zero() {
        println!("censored mass {}", result.censored.value().frac_string());
    }
    Ok(())
}

/// Product atoms from splitting `[0, h_0)` into `cells` equal pieces per
/// axis, in lexicographic order with axis 0 most significant.
fn cell_atoms(
    s: &CFSchedule<Rat>,
    cells: u64,
    p: u32,
) -> Result<Vec<BoxSet<Rat>>, Failure> {
    let total = cells
        .checked_pow(p)
        .filter(|&t| t <= ATOM_CAP)
        .ok_or_else(|| {
            fail(
                EXIT_VALIDATION,
                format!("cells^p = {cells}^{p} exceeds the atom cap {ATOM_CAP}"),
            )
        })?;
    let h = s.h(0).map_err(domain)?.clone();
    let cell = h / Rat::from_int(cells as i64);
    let mut atoms = Vec::with_capacity(total as usize);
    for flat in 0..total {
        let mut lo = Vec::with_capacity(p as usize);
        let mut hi = Vec::with_capacity(p as usize);
        let mut rest = flat;
        let mut digits = vec![0u64; p as usize];
        for d in digits.iter_mut().rev() {
            *d = rest % cells;
            rest /= cells;
        }
        for &d in &digits {
            lo.push(cell.clone() * Rat::from_int(d as i64));
            hi.push(cell.clone() * Rat::from_int(d as i64 + 1));
        }
        let aabb = Aabb::new(lo, hi).map_err(|e| fail(EXIT_VALIDATION, e.to_string()))?;
        atoms.push(BoxSet::from_box(aabb));
    }
    Ok(atoms)
}

fn cmd_gridmax(args: &GridmaxArgs) -> CmdResult {
    let s = load_schedule(&args.flow)?;
    let s_pow = power_of(&s, args.p)?;
    let atoms: Vec<BoxSet<Rat>> = match &args.atoms {
        Some(path) => {
            let file: AtomsFileJson = load_json(path)?;
            file.atoms
                .iter()
                .map(|a| a.to_set())
                .collect::<Result<_, _>>()
                .map_err(from_json_err)?
        }
        None => cell_atoms(&s, args.cells, args.p)?,
    };
    let opts = FillOptions {
        budget: args.budget,
        max_boxes: args.max_boxes,
        ..FillOptions::default()
    };
    let table = run_in_pool(|| grid_max(&s_pow, &atoms, args.n, args.p, args.density, &opts))?
        .map_err(domain)?;
    let table_json = GridMaxJson::from_grid(&table);
    if let Some(path) = &args.out {
        write_file(path, &to_pretty(&table_json))?;
    }
    if args.json {
        print!("{}", to_pretty(&table_json));
    } else {
        println!(
            "D = {} over {} entries ({} atoms, {} grid times)",
            table.d_max,
            table.table.len(),
            atoms.len(),
            table.grid.len()
        );
        let grid: Vec<String> = table.grid.iter().map(|t| t.frac_string()).collect();
        println!("grid: {}", grid.join(", "));
    }
    Ok(())
}

fn cmd_power(flow: &Path, p: u32, out: Option<&Path>) -> CmdResult {
    let s = load_schedule(flow)?;
    let s_pow = power_of(&s, p)?;
    emit(&ScheduleJson::from_schedule(&s_pow), out)
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let s = load_schedule(&args.flow)?;
    let s_pow = power_of(&s, args.p)?;
    let t = parse_rat(&args.t)?;
    let targets: Vec<Cylinder<Rat>> = match &args.targets {
        Some(path) => {
            let file: TargetsFileJson = load_json(path)?;
            file.targets
                .iter()
                .map(|c| c.to_cylinder(&s_pow))
                .collect::<Result<_, _>>()
                .map_err(from_json_err)?
        }
        None => vec![s_pow.full_cylinder(0).map_err(domain)?],
    };
    let h = s_pow.h(0).map_err(domain)?.clone();
    let dim = s_pow.dim();
    let mut rng = SplitMix64::new(args.seed);
    let mut sample = Vec::with_capacity(args.samples as usize);
    for _ in 0..args.samples {
        let coord: Vec<Rat> = (0..dim)
            .map(|_| {
                h.clone() * Rat::from_int(rng.below(SAMPLE_DENOM) as i64)
                    / Rat::from_int(SAMPLE_DENOM as i64)
            })
            .collect();
        let tail_seed = rng.next_u64();
        sample.push(FiberPoint::new(&s_pow, 0, coord, tail_seed).map_err(domain)?);
    }
    let table =
        run_in_pool(|| sweep_stats(&s_pow, &t, &sample, args.horizon, &targets))?.map_err(domain)?;
    let sweep_json = SweepJson::from_table(&t, &table);
    if args.json {
        print!("{}", to_pretty(&sweep_json));
        return Ok(());
    }
    println!("t = {}, {} samples, horizon {}", t.frac_string(), table.samples, table.horizon);
    for row in &sweep_json.rows {
        let mean = row
            .mean_first_hit
            .as_deref()
            .map(|m| format!(", mean first hit {m}"))
            .unwrap_or_default();
        println!(
            "target {}: {} hits / {} misses / {} censored (fraction {}){mean}",
            row.target, row.hits, row.misses, row.censored, row.hit_fraction
        );
    }
    Ok(())
}

fn cmd_measure(flow: &Path, cyl: &Path, p: u32, json: bool) -> CmdResult {
    let s = load_schedule(flow)?;
    let s_pow = power_of(&s, p)?;
    let c = load_cylinder(cyl, &s_pow)?;
    let m = s_pow.cylinder_measure(&c).map_err(domain)?;
    if json {
        print!("{}", to_pretty(&serde_json::json!({ "measure": m.value().frac_string() })));
    } else {
        println!("{}", m.value().frac_string());
    }
    Ok(())
}

fn cmd_lift(flow: &Path, cyl: &Path, to: usize, p: u32, out: Option<&Path>) -> CmdResult {
    let s = load_schedule(flow)?;
    let s_pow = power_of(&s, p)?;
    let c = load_cylinder(cyl, &s_pow)?;
    let lifted = s_pow.lift(&c, to).map_err(domain)?;
    emit(&CylinderJson::from_cylinder(&lifted), out)
}

fn cmd_apply(
    flow: &Path,
    cyl: &Path,
    g: &str,
    eps: &str,
    p: u32,
    out: Option<&Path>,
) -> CmdResult {
    let s = load_schedule(flow)?;
    let s_pow = power_of(&s, p)?;
    let c = load_cylinder(cyl, &s_pow)?;
    let g = parse_rat_vec(g)?;
    check_dim("g", &g, s_pow.dim())?;
    let eps = parse_rat(eps)?;
    let transport = s_pow.apply_tg(&c, &g, &eps).map_err(domain)?;
    let tj = TransportJson::from_transport(&s_pow, &transport).map_err(from_json_err)?;
    emit(&tj, out)
}

// ---------------------------------------------------------------------------
// Entry
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Validate { path } => cmd_validate(path),
        Cmd::Build(args) => cmd_build(args),
        Cmd::Check { flow, certs, json } => cmd_check(flow, certs, *json),
        Cmd::Fill(args) => cmd_fill(args),
        Cmd::Gridmax(args) => cmd_gridmax(args),
        Cmd::Power { flow, p, out } => cmd_power(flow, *p, out.as_deref()),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Measure { flow, cyl, p, json } => cmd_measure(flow, cyl, *p, *json),
        Cmd::Lift { flow, cyl, to, p, out } => cmd_lift(flow, cyl, *to, *p, out.as_deref()),
        Cmd::Apply { flow, cyl, g, eps, p, out } => {
            cmd_apply(flow, cyl, g, eps, *p, out.as_deref())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    exit(0);
                }
                _ => {
                    eprint!("{e}");
                    exit(EXIT_USAGE);
                }
            }
        }
    };
    match run(cli) {
        Ok(()) => exit(0),
        Err(f) => {
            eprintln!("error: {}", f.message);
            exit(f.code);
        }
    }
}
