//! Exact integer and rational arithmetic, plus floating-point diagnostics for
//! the characteristic polynomial `x^k - x^(k-1) - 1` of an eventual recurrence.
//!
//! Everything that touches pile sizes, sequence terms or the game parameter is
//! exact. The only floating-point code lives in [`dominant_root`] and the
//! `to_f64` conversions used for reporting.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::TagError;

/// Unbounded nonnegative integer used for pile sizes and sequence terms.
pub type Natural = BigUint;

/// Default tolerance used by [`dominant_root`].
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// An exact fraction, always kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    /// Builds `num/den` in lowest terms. The sign is moved into the numerator.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, TagError> {
        let num = num.into();
        let den = den.into();
        if den.is_zero() {
            return Err(TagError::ZeroDenominator);
        }
        Ok(Self::reduce(num, den))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational {
            num: n.into(),
            den: BigInt::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    fn reduce(mut num: BigInt, mut den: BigInt) -> Self {
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if !g.is_one() && !g.is_zero() {
            num /= &g;
            den /= &g;
        }
        Rational { num, den }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    /// Always strictly positive.
    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&self.den)
    }

    pub fn ceil(&self) -> BigInt {
        self.num.div_ceil(&self.den)
    }

    pub fn recip(&self) -> Result<Self, TagError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Numerator and denominator as naturals, for nonnegative values.
    pub(crate) fn unsigned_parts(&self) -> Option<(Natural, Natural)> {
        Some((self.num.to_biguint()?, self.den.to_biguint()?))
    }

    /// Nearest `f64`, accurate even when both parts exceed the `f64` range.
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.num, &self.den)
    }

    /// Parses `"p/q"`, an integer, or a finite decimal such as `"3.5"`.
    pub fn parse(text: &str) -> Result<Self, TagError> {
        text.parse()
    }

    /// The canonical machine form `p/q`; integers keep an explicit `/1`.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.num, self.den)
    }
}

/// `a/b` as the nearest double, scaling both sides down first so huge
/// operands do not overflow to infinity.
pub fn ratio_to_f64(a: &BigInt, b: &BigInt) -> f64 {
    let (a_bits, b_bits) = (a.bits(), b.bits());
    let shift = a_bits.max(b_bits).saturating_sub(1000);
    if shift == 0 {
        let x = a.to_f64().unwrap_or(f64::NAN);
        let y = b.to_f64().unwrap_or(f64::NAN);
        return x / y;
    }
    let x = (a >> shift).to_f64().unwrap_or(f64::NAN);
    let y = (b >> shift).to_f64().unwrap_or(f64::NAN);
    x / y
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl From<Natural> for Rational {
    fn from(n: Natural) -> Self {
        Self::from_integer(BigInt::from_biguint(Sign::Plus, n))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                let f: fn(&Rational, &Rational) -> Rational = $body;
                f(self, rhs)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Rational::reduce(
    &a.num * &b.den + &b.num * &a.den,
    &a.den * &b.den
));
forward_binop!(Sub, sub, |a, b| Rational::reduce(
    &a.num * &b.den - &b.num * &a.den,
    &a.den * &b.den
));
forward_binop!(Mul, mul, |a, b| Rational::reduce(
    &a.num * &b.num,
    &a.den * &b.den
));
// Division by zero panics, like integer division.
forward_binop!(Div, div, |a, b| {
    assert!(!b.num.is_zero(), "rational division by zero");
    Rational::reduce(&a.num * &b.den, &a.den * &b.num)
});

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = TagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TagError::ParseRational(s.to_string());
        let text = s.trim();
        if text.is_empty() {
            return Err(bad());
        }
        if let Some((p, q)) = text.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            return Rational::new(p, q);
        }
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
        if (whole.is_empty() && frac.is_empty()) || !digits_ok(whole) || !digits_ok(frac) {
            return Err(bad());
        }
        let mantissa: BigInt = format!("{whole}{frac}")
            .trim_start_matches('0')
            .parse()
            .unwrap_or_else(|_| BigInt::zero());
        let scale = num_traits::pow(BigInt::from(10u8), frac.len());
        let value = Rational::reduce(mantissa, scale);
        Ok(if negative { -value } else { value })
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapters that write naturals as decimal strings.
pub mod decimal {
    use super::Natural;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Natural, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&n.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Natural, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::Natural;
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(
            values: &[Natural],
            serializer: S,
        ) -> Result<S::Ok, S::Error> {
            let mut seq = serializer.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&v.to_str_radix(10))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            deserializer: D,
        ) -> Result<Vec<Natural>, D::Error> {
            Vec::<String>::deserialize(deserializer)?
                .iter()
                .map(|t| t.parse().map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// Exact ordering of `q * n` against `m`, by cross-multiplication.
pub fn cmp_scaled(q: &Rational, n: &Natural, m: &Natural) -> Ordering {
    let lhs = &q.num * BigInt::from_biguint(Sign::Plus, n.clone());
    let rhs = &q.den * BigInt::from_biguint(Sign::Plus, m.clone());
    lhs.cmp(&rhs)
}

/// `floor(q * m)` for a nonnegative `q`. This is the cap on the next move
/// after a removal of `m` stones.
pub fn floor_scale(q: &Rational, m: &Natural) -> Natural {
    let (num, den) = q
        .unsigned_parts()
        .expect("floor_scale needs a nonnegative ratio");
    (num * m) / den
}

/// Numerical summary of the positive dominant root of `x^k - x^(k-1) - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootDiagnostics {
    pub degree: usize,
    pub dominant_root: f64,
    /// `dominant_root^degree`, the limit of the ratio sequence.
    pub q_limit: f64,
    pub tolerance: f64,
    /// `|chi(dominant_root)|` at the returned approximation.
    pub residual: f64,
}

/// Characteristic polynomial of `P_n = P_(n-1) + P_(n-k)`.
pub fn characteristic(k: usize, x: f64) -> f64 {
    let lower = x.powi(k as i32 - 1);
    lower * x - lower - 1.0
}

/// Bisection on `[1, 2]` for the root above 1. For `k = 1` the polynomial is
/// `x - 2` and the root is exactly 2.
pub fn dominant_root(k: usize) -> RootDiagnostics {
    dominant_root_with_tolerance(k, ROOT_TOLERANCE)
}

pub fn dominant_root_with_tolerance(k: usize, tolerance: f64) -> RootDiagnostics {
    assert!(k >= 1, "recurrence degree must be positive");
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    let root = if characteristic(k, hi) == 0.0 {
        hi
    } else {
        // Run until the bracket stops shrinking; that is well past the tolerance.
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break if characteristic(k, lo).abs() < characteristic(k, hi).abs() {
                    lo
                } else {
                    hi
                };
            }
            let value = characteristic(k, mid);
            if value == 0.0 {
                break mid;
            }
            if value < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    };
    RootDiagnostics {
        degree: k,
        dominant_root: root,
        q_limit: root.powi(k as i32),
        tolerance,
        residual: characteristic(k, root).abs(),
    }
}
