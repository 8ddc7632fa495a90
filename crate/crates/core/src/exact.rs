//! Exact rational arithmetic, plus a first-order infinitesimal extension used to
//! encode strict inequalities and "slightly larger than" values.
//!
//! Every inequality checked by the certificate engine goes through these types;
//! there is no floating-point path.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ExactError;

/// An exact fraction, always stored in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Reduce `num/den` to its canonical representative.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ExactError> {
        let den = den.into();
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Shorthand for literal fractions with a known nonzero denominator.
    ///
    /// Panics if `den == 0`.
    pub fn frac(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("literal fraction with zero denominator")
    }

    pub fn int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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
        Rational(self.0.abs())
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, ExactError> {
        if rhs.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, ExactError> {
        Rational::one().checked_div(self)
    }

    /// Division by a value the caller knows to be nonzero.
    ///
    /// Panics on a zero divisor; use [`Rational::checked_div`] for untrusted input.
    pub fn div(&self, rhs: &Rational) -> Rational {
        self.checked_div(rhs).expect("division by zero")
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn midpoint(&self, other: &Rational) -> Rational {
        Rational((&self.0 + &other.0) / BigInt::from(2))
    }

    /// Exact decimal or fraction parse, e.g. `"3/8"`, `"-2"`, `"0.125"`.
    pub fn parse(text: &str) -> Result<Rational, ExactError> {
        let t = text.trim();
        let bad = || ExactError::Parse(text.to_string());
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Rational::new(n, d);
        }
        if let Some((ip, fp)) = t.split_once('.') {
            let (neg, ip) = match ip.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, ip.strip_prefix('+').unwrap_or(ip)),
            };
            if fp.is_empty() && ip.is_empty() {
                return Err(bad());
            }
            if !ip.chars().all(|c| c.is_ascii_digit()) || !fp.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
            let mut num: BigInt = digits.parse().map_err(|_| bad())?;
            if neg {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10), fp.len());
            return Rational::new(num, den);
        }
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Rational::from_bigint(n))
    }
}

/// Canonical form of `num/den`. Errors on a zero denominator.
pub fn reduce(num: i64, den: i64) -> Result<Rational, ExactError> {
    Rational::new(num, den)
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
    };
}

rational_binop!(Add, add, +);
rational_binop!(Sub, sub, -);
rational_binop!(Mul, mul, *);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rational::parse(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rational::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `base + eps_coeff·ε` for a single shared formal infinitesimal `ε > 0`.
///
/// Ordering is lexicographic on `(base, eps_coeff)`, so `(a, +1)` is the
/// "slightly larger than a" value and `x > a` can be written `x >= (a, +1)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SlackRational {
    pub base: Rational,
    pub eps_coeff: BigInt,
}

impl SlackRational {
    pub fn new(base: Rational, eps_coeff: impl Into<BigInt>) -> Self {
        SlackRational { base, eps_coeff: eps_coeff.into() }
    }

    pub fn exact(base: Rational) -> Self {
        SlackRational { base, eps_coeff: BigInt::zero() }
    }

    /// `(base, +1)`, i.e. `base⁺`.
    pub fn plus(base: Rational) -> Self {
        SlackRational { base, eps_coeff: BigInt::one() }
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.eps_coeff.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        *self > SlackRational::zero()
    }

    /// Multiply both components by `c`. The infinitesimal coefficient must stay integral.
    pub fn scale(&self, c: &Rational) -> Result<Self, ExactError> {
        let eps = Rational::from_bigint(self.eps_coeff.clone()) * c;
        if !eps.is_integer() {
            return Err(ExactError::NonIntegralSlack(eps.to_string()));
        }
        Ok(SlackRational { base: &self.base * c, eps_coeff: eps.floor() })
    }

    pub fn parse(text: &str) -> Result<Self, ExactError> {
        let t = text.trim();
        let bad = || ExactError::Parse(text.to_string());
        let Some(body) = t.strip_suffix('ε') else {
            return Ok(SlackRational::exact(Rational::parse(t)?));
        };
        // The sign separating base and coefficient is the last '+' or '-' that is
        // not the leading sign of the base.
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last()
            .ok_or_else(bad)?;
        let base = Rational::parse(&body[..split])?;
        let coeff_text = &body[split..];
        let coeff: BigInt = coeff_text
            .strip_prefix('+')
            .unwrap_or(coeff_text)
            .parse()
            .map_err(|_| bad())?;
        Ok(SlackRational { base, eps_coeff: coeff })
    }
}

impl PartialOrd for SlackRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SlackRational {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_slack(self, other)
    }
}

/// Lexicographic comparison on `(base, eps_coeff)`.
pub fn cmp_slack(x: &SlackRational, y: &SlackRational) -> Ordering {
    x.base.cmp(&y.base).then_with(|| x.eps_coeff.cmp(&y.eps_coeff))
}

impl From<Rational> for SlackRational {
    fn from(r: Rational) -> Self {
        SlackRational::exact(r)
    }
}

impl Add for &SlackRational {
    type Output = SlackRational;
    fn add(self, rhs: &SlackRational) -> SlackRational {
        SlackRational { base: &self.base + &rhs.base, eps_coeff: &self.eps_coeff + &rhs.eps_coeff }
    }
}

impl Add for SlackRational {
    type Output = SlackRational;
    fn add(self, rhs: SlackRational) -> SlackRational {
        &self + &rhs
    }
}

impl Sub for &SlackRational {
    type Output = SlackRational;
    fn sub(self, rhs: &SlackRational) -> SlackRational {
        SlackRational { base: &self.base - &rhs.base, eps_coeff: &self.eps_coeff - &rhs.eps_coeff }
    }
}

impl Sub for SlackRational {
    type Output = SlackRational;
    fn sub(self, rhs: SlackRational) -> SlackRational {
        &self - &rhs
    }
}

impl Neg for SlackRational {
    type Output = SlackRational;
    fn neg(self) -> SlackRational {
        SlackRational { base: -self.base, eps_coeff: -self.eps_coeff }
    }
}

impl fmt::Display for SlackRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eps_coeff.is_zero() {
            write!(f, "{}", self.base)
        } else if self.eps_coeff.is_positive() {
            write!(f, "{}+{}ε", self.base, self.eps_coeff)
        } else {
            write!(f, "{}{}ε", self.base, self.eps_coeff)
        }
    }
}

impl fmt::Debug for SlackRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for SlackRational {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SlackRational::parse(s)
    }
}

impl Serialize for SlackRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SlackRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SlackRational::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Deterministic interior point of the open interval `(lo, hi)` in slack order.
///
/// Distinct bases give the midpoint of the bases; equal bases give the floor of
/// the mean infinitesimal coefficient, which must land strictly inside.
pub fn interval_pick(lo: &SlackRational, hi: &SlackRational) -> Result<SlackRational, ExactError> {
    if lo >= hi {
        return Err(ExactError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
    }
    if lo.base < hi.base {
        return Ok(SlackRational::exact(lo.base.midpoint(&hi.base)));
    }
    let mid = (&lo.eps_coeff + &hi.eps_coeff).div_floor(&BigInt::from(2));
    if mid <= lo.eps_coeff || mid >= hi.eps_coeff {
        return Err(ExactError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
    }
    Ok(SlackRational { base: lo.base.clone(), eps_coeff: mid })
}

/// A Lebesgue exponent in `(0, ∞]`, or more generally any rational extended by `+∞`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtendedRational {
    Finite(Rational),
    Infinity,
}

impl ExtendedRational {
    pub fn finite(r: Rational) -> Self {
        ExtendedRational::Finite(r)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRational::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::Infinity => None,
        }
    }

    /// `1/∞ = 0`, `1/0 = ∞`.
    pub fn recip(&self) -> ExtendedRational {
        match self {
            ExtendedRational::Infinity => ExtendedRational::Finite(Rational::zero()),
            ExtendedRational::Finite(r) if r.is_zero() => ExtendedRational::Infinity,
            ExtendedRational::Finite(r) => ExtendedRational::Finite(r.recip().expect("nonzero")),
        }
    }

    /// Reciprocal as a plain rational (`0` for `∞`). Errors for a zero exponent.
    pub fn recip_rational(&self) -> Result<Rational, ExactError> {
        match self {
            ExtendedRational::Infinity => Ok(Rational::zero()),
            ExtendedRational::Finite(r) => r.recip(),
        }
    }

    /// The exponent whose reciprocal is `r` (`∞` when `r = 0`).
    pub fn from_recip(r: &Rational) -> ExtendedRational {
        if r.is_zero() {
            ExtendedRational::Infinity
        } else {
            ExtendedRational::Finite(r.recip().expect("nonzero"))
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedRational::Infinity => f64::INFINITY,
            ExtendedRational::Finite(r) => r.to_f64(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ExactError> {
        match text.trim() {
            "inf" | "∞" | "+inf" => Ok(ExtendedRational::Infinity),
            t => Ok(ExtendedRational::Finite(Rational::parse(t)?)),
        }
    }
}

impl From<Rational> for ExtendedRational {
    fn from(r: Rational) -> Self {
        ExtendedRational::Finite(r)
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedRational::*;
        match (self, other) {
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Finite(_), Infinity) => Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Infinity => write!(f, "inf"),
            ExtendedRational::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ExtendedRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtendedRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ExtendedRational::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One side of a [`Window`]: a bound and whether it is attained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub value: SlackRational,
    pub closed: bool,
}

impl Bound {
    pub fn open(value: impl Into<SlackRational>) -> Self {
        Bound { value: value.into(), closed: false }
    }

    pub fn closed(value: impl Into<SlackRational>) -> Self {
        Bound { value: value.into(), closed: true }
    }
}

/// An interval with independently open or closed ends; either end may be absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Window {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl Window {
    pub fn new() -> Self {
        Window::default()
    }

    pub fn between(lower: Bound, upper: Bound) -> Self {
        Window { lower: Some(lower), upper: Some(upper) }
    }

    /// Intersect with `x > v` (open) or `x >= v` (closed).
    pub fn raise(&mut self, b: Bound) {
        let replace = match &self.lower {
            None => true,
            Some(cur) => b.value > cur.value || (b.value == cur.value && !b.closed),
        };
        if replace {
            self.lower = Some(b);
        }
    }

    /// Intersect with `x < v` (open) or `x <= v` (closed).
    pub fn lower_to(&mut self, b: Bound) {
        let replace = match &self.upper {
            None => true,
            Some(cur) => b.value < cur.value || (b.value == cur.value && !b.closed),
        };
        if replace {
            self.upper = Some(b);
        }
    }

    pub fn intersect(&self, other: &Window) -> Window {
        let mut w = self.clone();
        if let Some(b) = &other.lower {
            w.raise(b.clone());
        }
        if let Some(b) = &other.upper {
            w.lower_to(b.clone());
        }
        w
    }

    pub fn contains(&self, x: &SlackRational) -> bool {
        let above = match &self.lower {
            None => true,
            Some(b) => *x > b.value || (b.closed && *x == b.value),
        };
        let below = match &self.upper {
            None => true,
            Some(b) => *x < b.value || (b.closed && *x == b.value),
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.pick().is_err()
    }

    /// Deterministic member of the window: the interior point from
    /// [`interval_pick`] when one exists, otherwise an attained endpoint.
    pub fn pick(&self) -> Result<SlackRational, ExactError> {
        let one = SlackRational::exact(Rational::one());
        match (&self.lower, &self.upper) {
            (None, None) => Ok(SlackRational::zero()),
            (Some(lo), None) => Ok(&lo.value + &one),
            (None, Some(hi)) => Ok(&hi.value - &one),
            (Some(lo), Some(hi)) => {
                if let Ok(x) = interval_pick(&lo.value, &hi.value) {
                    return Ok(x);
                }
                if lo.value == hi.value && lo.closed && hi.closed {
                    return Ok(lo.value.clone());
                }
                if lo.value < hi.value {
                    if lo.closed {
                        return Ok(lo.value.clone());
                    }
                    if hi.closed {
                        return Ok(hi.value.clone());
                    }
                }
                Err(ExactError::EmptyInterval { lo: lo.value.to_string(), hi: hi.value.to_string() })
            }
        }
    }
}
