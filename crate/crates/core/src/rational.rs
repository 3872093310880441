use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LedgerScalar(BigRational);

impl LedgerScalar {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let d = denom.into();
        if d.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(LedgerScalar(BigRational::new(numer.into(), d)))
    }

    pub fn int(v: impl Into<BigInt>) -> Self {
        LedgerScalar(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn from_ratio(r: BigRational) -> Self {
        LedgerScalar(r)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
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

    pub fn abs(&self) -> Self {
        LedgerScalar(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("reciprocal of zero".into()));
        }
        Ok(LedgerScalar(self.0.recip()))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = BigRational::one();
        for _ in 0..k {
            acc *= &self.0;
        }
        LedgerScalar(acc)
    }

    pub fn to_f64(&self) -> f64 {
        crate::numeric::RealCtx::default().from_rational(&self.0).to_f64()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for LedgerScalar {
            type Output = LedgerScalar;
            fn $m(self, rhs: LedgerScalar) -> LedgerScalar {
                LedgerScalar((self.0).$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a LedgerScalar> for &'a LedgerScalar {
            type Output = LedgerScalar;
            fn $m(self, rhs: &'a LedgerScalar) -> LedgerScalar {
                LedgerScalar((&self.0).$m(&rhs.0))
            }
        }
        impl<'a> $tr<&'a LedgerScalar> for LedgerScalar {
            type Output = LedgerScalar;
            fn $m(self, rhs: &'a LedgerScalar) -> LedgerScalar {
                LedgerScalar((self.0).$m(&rhs.0))
            }
        }
        impl<'a> $tr<LedgerScalar> for &'a LedgerScalar {
            type Output = LedgerScalar;
            fn $m(self, rhs: LedgerScalar) -> LedgerScalar {
                LedgerScalar((&self.0).$m(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for LedgerScalar {
    type Output = LedgerScalar;
    fn neg(self) -> LedgerScalar {
        LedgerScalar(-self.0)
    }
}

impl fmt::Display for LedgerScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for LedgerScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `n`, `n/d`, or a finite decimal such as `2.1`.
impl FromStr for LedgerScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a rational: `{s}`"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return LedgerScalar::new(n, d);
        }
        parse_decimal(s).map(LedgerScalar).ok_or_else(bad)
    }
}

/// Exact value of a decimal literal like `-1.25`.
pub(crate) fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), fp.len());
    let r = BigRational::new(n, d);
    Some(if neg { -r } else { r })
}

impl Serialize for LedgerScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LedgerScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
