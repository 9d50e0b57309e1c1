//! Exact cycle time: arbitrary-precision fractions and half-open spans.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational number of cycles, always held in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fraction(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid fraction {0:?}")]
pub struct ParseFractionError(pub String);

impl Fraction {
    /// Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "fraction with zero denominator");
        Fraction(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "fraction with zero denominator");
        Fraction(BigRational::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Fraction(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Fraction(BigRational::zero())
    }

    pub fn one() -> Self {
        Fraction(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Fraction(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Fraction(self.0.recip())
    }

    /// Largest integer not greater than `self` (rounds toward −∞).
    pub fn floor(&self) -> Self {
        Fraction(BigRational::from_integer(
            self.0.numer().div_floor(self.0.denom()),
        ))
    }

    /// The floor as a big integer.
    pub fn floor_int(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    /// Start of the cycle containing `self`.
    pub fn sam(&self) -> Self {
        self.floor()
    }

    pub fn next_sam(&self) -> Self {
        self.sam() + Fraction::one()
    }

    /// Position within the cycle, in `[0, 1)`.
    pub fn cycle_pos(&self) -> Self {
        self - &self.sam()
    }

    pub fn min(self, other: Self) -> Self {
        Ord::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        Ord::max(self, other)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// The nearest multiple of `1/resolution` to `x`. Returns `None` for
    /// non-finite input.
    pub fn from_f64_rounded(x: f64, resolution: u32) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let scaled = (x * f64::from(resolution)).round();
        let num = BigInt::from_f64(scaled)?;
        Some(Fraction(BigRational::new(num, BigInt::from(resolution))))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `n/d`, `n%d`, integers and plain decimals such as `-1.25`.
impl FromStr for Fraction {
    type Err = ParseFractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseFractionError(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once(['/', '%']) {
            let num = parse_decimal(n).ok_or_else(err)?;
            let den = parse_decimal(d).ok_or_else(err)?;
            if den.is_zero() {
                return Err(err());
            }
            return Ok(num / den);
        }
        parse_decimal(s).ok_or_else(err)
    }
}

fn parse_decimal(s: &str) -> Option<Fraction> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.contains('.') && (frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let value = Fraction(BigRational::new(num, den));
    Some(if neg { -value } else { value })
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Fraction {
    fn from(n: i64) -> Self {
        Fraction::integer(n)
    }
}

impl From<BigInt> for Fraction {
    fn from(n: BigInt) -> Self {
        Fraction(BigRational::from_integer(n))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Fraction> for Fraction {
            type Output = Fraction;
            fn $method(self, rhs: Fraction) -> Fraction {
                Fraction($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Fraction> for Fraction {
            type Output = Fraction;
            fn $method(self, rhs: &'a Fraction) -> Fraction {
                Fraction($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Fraction> for &'a Fraction {
            type Output = Fraction;
            fn $method(self, rhs: Fraction) -> Fraction {
                Fraction($trait::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Fraction> for &'a Fraction {
            type Output = Fraction;
            fn $method(self, rhs: &'b Fraction) -> Fraction {
                Fraction($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Fraction {
    type Output = Fraction;
    fn neg(self) -> Fraction {
        Fraction(-self.0)
    }
}

impl Neg for &Fraction {
    type Output = Fraction;
    fn neg(self) -> Fraction {
        Fraction(-&self.0)
    }
}

pub fn sam(t: &Fraction) -> Fraction {
    t.sam()
}

pub fn next_sam(t: &Fraction) -> Fraction {
    t.next_sam()
}

pub fn cycle_pos(t: &Fraction) -> Fraction {
    t.cycle_pos()
}

/// A span of cycle time. Half-open `[begin, end)`, except that a
/// zero-width span denotes the single instant `begin`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub begin: Fraction,
    pub end: Fraction,
}

impl Span {
    /// Panics if `begin > end`.
    pub fn new(begin: impl Into<Fraction>, end: impl Into<Fraction>) -> Self {
        let (begin, end) = (begin.into(), end.into());
        assert!(begin <= end, "span begins after it ends: [{begin}, {end}]");
        Span { begin, end }
    }

    pub fn instant(t: Fraction) -> Self {
        Span {
            begin: t.clone(),
            end: t,
        }
    }

    pub fn len(&self) -> Fraction {
        &self.end - &self.begin
    }

    pub fn is_instant(&self) -> bool {
        self.begin == self.end
    }

    pub fn midpoint(&self) -> Fraction {
        (&self.begin + &self.end) / Fraction::integer(2)
    }

    /// The whole cycle containing `begin`.
    pub fn whole_cycle(t: &Fraction) -> Self {
        Span {
            begin: t.sam(),
            end: t.next_sam(),
        }
    }

    /// Apply `f` to both endpoints. `f` must be monotone non-decreasing.
    pub fn with_time(&self, f: impl Fn(&Fraction) -> Fraction) -> Self {
        Span {
            begin: f(&self.begin),
            end: f(&self.end),
        }
    }

    /// `self` fully contains `other`.
    pub fn contains(&self, other: &Span) -> bool {
        self.begin <= other.begin && other.end <= self.end
    }

    pub fn sect(&self, other: &Span) -> Span {
        sect(self, other)
    }

    pub fn maybe_sect(&self, other: &Span) -> Option<Span> {
        maybe_sect(self, other)
    }

    pub fn cycles(&self) -> Vec<Span> {
        span_cycles(self)
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.begin, self.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl PartialOrd for Span {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Span {
    fn cmp(&self, other: &Self) -> Ordering {
        self.begin
            .cmp(&other.begin)
            .then_with(|| self.end.cmp(&other.end))
    }
}

/// Intersection of two overlapping spans. Callers check overlap with
/// [`maybe_sect`] first.
pub fn sect(a: &Span, b: &Span) -> Span {
    Span {
        begin: a.begin.clone().max(b.begin.clone()),
        end: a.end.clone().min(b.end.clone()),
    }
}

/// Intersection, if the spans overlap. A zero-width result is only present
/// when it does not sit at the end of a span with positive length.
pub fn maybe_sect(a: &Span, b: &Span) -> Option<Span> {
    let s = sect(a, b);
    match s.begin.cmp(&s.end) {
        Ordering::Greater => None,
        Ordering::Less => Some(s),
        Ordering::Equal => {
            let at_open_end = |x: &Span| !x.is_instant() && s.begin == x.end;
            if at_open_end(a) || at_open_end(b) {
                None
            } else {
                Some(s)
            }
        }
    }
}

/// Split a span at integer cycle boundaries.
pub fn span_cycles(s: &Span) -> Vec<Span> {
    if s.is_instant() {
        return vec![s.clone()];
    }
    let mut out = Vec::new();
    let mut begin = s.begin.clone();
    while begin < s.end {
        let end = begin.next_sam().min(s.end.clone());
        out.push(Span {
            begin,
            end: end.clone(),
        });
        begin = end;
    }
    out
}
