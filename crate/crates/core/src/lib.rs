//! Exact-arithmetic engine for rank-one actions of ℝ^d built by cutting and
//! stacking.
//!
//! The engine works with a tower of half-open cubes `F_0 ⊂ F_1 ⊂ …` together
//! with finite sets of translation vectors `C_1, C_2, …` describing how copies
//! of each cube tile the next one.  Everything downstream is computed from that
//! data with rational arithmetic only — no floating point anywhere — so that
//! set identities, measures, and certificates compare *exactly*:
//!
//! * [`boxset`] — canonical finite unions of axis-aligned half-open boxes with
//!   exact union / intersection / difference / translation / volume, the
//!   geometric substrate for everything else;
//! * [`cfcore`] — validated tower schedules, cylinder sets, exact measures, the
//!   partially-defined translation action and its remainder accounting;
//! * [`filling`] — the transport recursion that moves more than half of one
//!   cylinder into another along iterates of a fixed translation, plus the
//!   grid maximiser used to size construction steps;
//! * [`forcing`] — the step-by-step builder that welds auxiliary staircase
//!   towers onto a growing schedule, doubles the top cube at each marker, and
//!   emits machine-checkable transport certificates;
//! * [`orbit`] — point-level simulation of the same action for spot checks and
//!   hitting-time statistics;
//! * [`jsonio`] — stable JSON encodings for all of the above.
//!
//! All core types are generic over an exact scalar via [`scalar::Scalar`].
//! Concrete aliases are exported at the crate root: [`Rat`] (arbitrary
//! precision, the default everywhere correctness matters) and [`FastRat`]
//! (machine-width, faster, panics on overflow in debug builds).

pub mod boxset;
pub mod cfcore;
pub mod filling;
pub mod forcing;
pub mod jsonio;
pub mod orbit;
pub mod rng;
pub mod scalar;

/// Default exact scalar: arbitrary-precision reduced fractions.
pub type Rat = num_rational::BigRational;

/// Machine-width exact scalar for speed-sensitive experiments.
///
/// Exact while numerators and denominators fit in `i128`; arithmetic past that
/// point panics in debug builds and must not be relied on in release builds.
/// Use [`Rat`] for anything that feeds a certificate.
pub type FastRat = num_rational::Ratio<i128>;
