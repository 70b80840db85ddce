//! The exact scalar abstraction all geometry and measure code is generic over.
//!
//! A [`Scalar`] is an ordered field element with *exact* equality — in practice
//! a reduced fraction.  The trait collects the num-traits bounds the engine
//! needs (`Num + Signed + Ord`) together with the handful of operations
//! num-traits does not standardise: integer floor, rational gcd, and the
//! canonical `"p/q"` string form used by every wire format.
//!
//! Two implementations are provided: [`num_rational::BigRational`] (arbitrary
//! precision) and [`num_rational::Ratio<i128>`] (fixed width, faster, panics on
//! overflow in debug builds).  Floating point deliberately does not implement
//! this trait: the engine's canonical forms and certificates rely on exact
//! comparison, which floats cannot offer.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Error produced when parsing a `"p/q"` fraction string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFracError {
    /// The string is not of the form `p` or `p/q` with integer parts.
    #[error("malformed fraction {0:?}: expected \"p\" or \"p/q\" with integer p, q")]
    Malformed(String),
    /// The denominator is zero.
    #[error("zero denominator in fraction {0:?}")]
    ZeroDenominator(String),
}

/// An exact ordered-field scalar (a reduced fraction in practice).
///
/// Everything the engine computes — corners, translation vectors, measures,
/// times — is a value of a type implementing this trait.
pub trait Scalar:
    Clone + Ord + Eq + Hash + Debug + Display + Send + Sync + 'static + Num + Signed
{
    /// The integer `i` as a scalar.
    fn from_int(i: i64) -> Self;

    /// Largest integer `k` with `k ≤ self`, as an `i64`.
    ///
    /// # Panics
    /// If the floor does not fit in an `i64`.  Engine call sites only floor
    /// small quantities (shift norms, grid indices).
    fn floor_i64(&self) -> i64;

    /// Whether the value is an integer.
    fn is_integer_value(&self) -> bool;

    /// Greatest common divisor of two non-negative scalars, the largest `g`
    /// such that both arguments are integer multiples of `g`.
    ///
    /// `gcd(x, 0) = x`.  Both arguments zero yields zero.
    fn gcd_frac(a: &Self, b: &Self) -> Self;

    /// Parse the canonical fraction form: `"p"` or `"p/q"`, optionally signed.
    fn parse_frac(s: &str) -> Result<Self, ParseFracError>;

    /// Canonical reduced rendering, always with an explicit denominator:
    /// `"3/1"`, `"-5/2"`, `"0/1"`.
    fn frac_string(&self) -> String;
}

/// Parse helper shared by both implementations: split `"p/q"` into the two
/// integer substrings, rejecting empty parts and extra slashes.
fn split_frac(s: &str) -> Result<(&str, Option<&str>), ParseFracError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseFracError::Malformed(s.to_owned()));
    }
    let mut it = t.splitn(3, '/');
    let numer = it.next().filter(|p| !p.is_empty());
    let denom = it.next();
    if it.next().is_some() {
        return Err(ParseFracError::Malformed(s.to_owned()));
    }
    match (numer, denom) {
        (Some(n), Some(d)) if !d.is_empty() => Ok((n, Some(d))),
        (Some(n), None) => Ok((n, None)),
        _ => Err(ParseFracError::Malformed(s.to_owned())),
    }
}

impl Scalar for Ratio<BigInt> {
    fn from_int(i: i64) -> Self {
        Ratio::from_integer(BigInt::from(i))
    }

    fn floor_i64(&self) -> i64 {
        self.floor()
            .to_integer()
            .to_i64()
            .expect("floor out of i64 range")
    }

    fn is_integer_value(&self) -> bool {
        self.is_integer()
    }

    fn gcd_frac(a: &Self, b: &Self) -> Self {
        debug_assert!(!a.is_negative() && !b.is_negative());
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        // gcd(an/ad, bn/bd) = gcd(an·bd, bn·ad) / (ad·bd)
        let n = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
        Ratio::new(n, a.denom() * b.denom())
    }

    fn parse_frac(s: &str) -> Result<Self, ParseFracError> {
        let (n, d) = split_frac(s)?;
        let numer: BigInt = n
            .parse()
            .map_err(|_| ParseFracError::Malformed(s.to_owned()))?;
        let denom: BigInt = match d {
            Some(d) => d
                .parse()
                .map_err(|_| ParseFracError::Malformed(s.to_owned()))?,
            None => BigInt::from(1),
        };
        if denom.is_zero() {
            return Err(ParseFracError::ZeroDenominator(s.to_owned()));
        }
        Ok(Ratio::new(numer, denom))
    }

    fn frac_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for Ratio<i128> {
    fn from_int(i: i64) -> Self {
        Ratio::from_integer(i as i128)
    }

    fn floor_i64(&self) -> i64 {
        i64::try_from(self.floor().to_integer()).expect("floor out of i64 range")
    }

    fn is_integer_value(&self) -> bool {
        self.is_integer()
    }

    fn gcd_frac(a: &Self, b: &Self) -> Self {
        debug_assert!(!a.is_negative() && !b.is_negative());
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let n = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
        Ratio::new(n, a.denom() * b.denom())
    }

    fn parse_frac(s: &str) -> Result<Self, ParseFracError> {
        let (n, d) = split_frac(s)?;
        let numer: i128 = n
            .parse()
            .map_err(|_| ParseFracError::Malformed(s.to_owned()))?;
        let denom: i128 = match d {
            Some(d) => d
                .parse()
                .map_err(|_| ParseFracError::Malformed(s.to_owned()))?,
            None => 1,
        };
        if denom == 0 {
            return Err(ParseFracError::ZeroDenominator(s.to_owned()));
        }
        Ok(Ratio::new(numer, denom))
    }

    fn frac_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Shorthand for the exact fraction `p/q`.
///
/// # Panics
/// If `q == 0`.
pub fn frac<S: Scalar>(p: i64, q: i64) -> S {
    assert!(q != 0, "zero denominator");
    S::from_int(p) / S::from_int(q)
}

/// Shorthand for the exact integer `n` as a scalar.
pub fn int<S: Scalar>(n: i64) -> S {
    S::from_int(n)
}

/// Sup norm ‖v‖ = max_i |v_i| of a vector.
///
/// The norm of the empty vector is 0.
pub fn sup_norm<S: Scalar>(v: &[S]) -> S {
    v.iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(S::zero)
}

/// Smallest integer strictly greater than the sup norm of `v`: the step count
/// by which a translation of norm ‖v‖ can be split into unit-norm pieces with
/// one to spare.
pub fn norm_ceil_plus_one<S: Scalar>(v: &[S]) -> i64 {
    sup_norm(v).floor_i64() + 1
}

/// Greatest common divisor of a whole slice of non-negative scalars.
///
/// Returns zero for an empty slice or all-zero input.
pub fn gcd_all<S: Scalar>(values: &[S]) -> S {
    let mut g = S::zero();
    for v in values {
        g = S::gcd_frac(&g, v);
    }
    g
}

/// `a` is a non-negative integer multiple of `d` (`d > 0`).
pub fn is_multiple_of<S: Scalar>(a: &S, d: &S) -> bool {
    debug_assert!(d > &S::zero());
    (a.clone() / d.clone()).is_integer_value()
}
