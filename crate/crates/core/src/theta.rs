//! Real inputs θ and their compact text grammar.
//!
//! ```text
//! cbrt:2                    real cube root of 2
//! poly:[-2,0,0,1]@0         k-th real root (ascending) of -2 + x^3
//! cf-fib:40                 [0; a1, ..., a40], a = Fibonacci word over {1,2}
//! dec:1.2599210498948732    exact decimal literal
//! rand:12345                uniform bits in (0,1) from a seeded ChaCha stream
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gallery::fibonacci_word;
use crate::numeric::{BigReal, RealCtx};
use crate::poly::IntPoly;
use crate::rational::parse_decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    AlgebraicRoot,
    ContinuedFractionWord,
    DecimalLiteral,
    RandomSeeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ThetaSpec {
    /// Shorthand for the real root of `x^3 - n`.
    Cbrt(BigInt),
    /// Root `root` (0-based, ascending among real roots) of the polynomial.
    Poly { coeffs: Vec<BigInt>, root: usize },
    /// Fibonacci-word continued fraction truncated after `len` partial quotients.
    CfFib(usize),
    /// Decimal digits as written.
    Decimal(String),
    Random(u64),
}

impl ThetaSpec {
    pub fn kind(&self) -> ThetaKind {
        match self {
            ThetaSpec::Cbrt(_) | ThetaSpec::Poly { .. } => ThetaKind::AlgebraicRoot,
            ThetaSpec::CfFib(_) => ThetaKind::ContinuedFractionWord,
            ThetaSpec::Decimal(_) => ThetaKind::DecimalLiteral,
            ThetaSpec::Random(_) => ThetaKind::RandomSeeded,
        }
    }

    /// Defining polynomial and root index for algebraic specs.
    pub fn algebraic(&self) -> Option<(IntPoly, usize)> {
        match self {
            ThetaSpec::Cbrt(n) => Some((IntPoly::new(vec![-n.clone(), 0.into(), 0.into(), 1.into()]), 0)),
            ThetaSpec::Poly { coeffs, root } => Some((IntPoly::new(coeffs.clone()), *root)),
            _ => None,
        }
    }

    /// Exact value when θ is a rational number by construction.
    pub fn exact_rational(&self) -> Option<BigRational> {
        match self {
            ThetaSpec::CfFib(n) => Some(fib_convergent(*n)),
            ThetaSpec::Decimal(s) => parse_decimal(s),
            _ => None,
        }
    }

    fn validate(self, text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidTheta {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        match &self {
            ThetaSpec::Cbrt(_) => {}
            ThetaSpec::Poly { coeffs, root } => {
                let p = IntPoly::new(coeffs.clone());
                if p.is_zero() {
                    return Err(bad("zero polynomial"));
                }
                let n = p.real_roots().len();
                if *root >= n {
                    return Err(bad(&format!("root index {root} but only {n} real roots")));
                }
            }
            ThetaSpec::CfFib(n) => {
                if *n == 0 {
                    return Err(bad("word length must be >= 1"));
                }
            }
            ThetaSpec::Decimal(s) => {
                if parse_decimal(s).is_none() {
                    return Err(bad("not a decimal literal"));
                }
            }
            ThetaSpec::Random(_) => {}
        }
        Ok(self)
    }

    /// Number of significant decimal digits carried by a decimal literal.
    pub fn decimal_digits(&self) -> Option<usize> {
        match self {
            ThetaSpec::Decimal(s) => Some(s.chars().filter(|c| c.is_ascii_digit()).count()),
            _ => None,
        }
    }

    /// Certified enclosure of θ at the context precision.
    pub fn eval(&self, ctx: &RealCtx) -> Result<BigReal> {
        match self {
            ThetaSpec::Cbrt(_) | ThetaSpec::Poly { .. } => {
                let (p, k) = self.algebraic().unwrap();
                let roots = p.real_roots();
                let root = roots.get(k).ok_or_else(|| Error::InvalidTheta {
                    text: self.to_string(),
                    reason: "selected root is not real".into(),
                })?;
                Ok(root.refine(&p, ctx))
            }
            ThetaSpec::CfFib(_) | ThetaSpec::Decimal(_) => {
                Ok(ctx.from_rational(&self.exact_rational().unwrap()))
            }
            ThetaSpec::Random(seed) => Ok(random_bits(*seed, ctx.precision_bits())),
        }
    }
}

/// `0.b1 b2 b3 ...` from a ChaCha8 stream; the first `p` bits are a prefix of
/// every longer expansion, so enclosures at different precisions nest.
fn random_bits(seed: u64, precision_bits: u32) -> BigReal {
    let words = precision_bits as usize / 64 + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = BigInt::zero();
    for _ in 0..words {
        m = (m << 64usize) + BigInt::from(rng.next_u64());
    }
    let exp = -(64 * words as i64);
    let lo = BigReal::from_parts(m, 0u32.into(), exp);
    let half_ulp = BigReal::from_parts(BigInt::one(), 1u32.into(), exp - 1);
    RealCtx::new(precision_bits.max(64))
        .map(|c| c.add(&lo, &half_ulp))
        .unwrap_or(lo)
}

/// Exact value of `[0; a1, ..., an]` for the Fibonacci word of length `n`.
pub fn fib_convergent(n: usize) -> BigRational {
    let word = fibonacci_word(n);
    let mut acc: Option<BigRational> = None;
    for a in word.iter().rev() {
        let a = BigRational::from_integer(BigInt::from(*a));
        acc = Some(match acc {
            None => a,
            Some(t) => a + t.recip(),
        });
    }
    acc.map(|t| t.recip()).unwrap_or_else(BigRational::zero)
}

impl fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaSpec::Cbrt(n) => write!(f, "cbrt:{n}"),
            ThetaSpec::Poly { coeffs, root } => {
                let cs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:[{}]@{root}", cs.join(","))
            }
            ThetaSpec::CfFib(n) => write!(f, "cf-fib:{n}"),
            ThetaSpec::Decimal(s) => write!(f, "dec:{s}"),
            ThetaSpec::Random(seed) => write!(f, "rand:{seed}"),
        }
    }
}

impl FromStr for ThetaSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidTheta {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let (tag, body) = text.split_once(':').ok_or_else(|| bad("expected `kind:payload`"))?;
        let canonical_int = |s: &str| -> Result<BigInt> {
            let v: BigInt = s.parse().map_err(|_| bad("bad integer"))?;
            if v.to_string() != s {
                return Err(bad("integer not in canonical form"));
            }
            Ok(v)
        };
        let spec = match tag {
            "cbrt" => ThetaSpec::Cbrt(canonical_int(body)?),
            "poly" => {
                let (list, root) = body.split_once('@').ok_or_else(|| bad("expected `[c0,...]@k`"))?;
                let inner = list
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| bad("coefficients must be bracketed"))?;
                let coeffs = inner
                    .split(',')
                    .map(canonical_int)
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.last().is_some_and(|c| c.is_zero()) {
                    return Err(bad("leading coefficient is zero"));
                }
                let root = canonical_int(root)?;
                let root = usize::try_from(&root).map_err(|_| bad("bad root index"))?;
                ThetaSpec::Poly { coeffs, root }
            }
            "cf-fib" => {
                let n = canonical_int(body)?;
                ThetaSpec::CfFib(usize::try_from(&n).map_err(|_| bad("bad length"))?)
            }
            "dec" => ThetaSpec::Decimal(body.to_string()),
            "rand" => {
                let n = canonical_int(body)?;
                ThetaSpec::Random(u64::try_from(&n).map_err(|_| bad("seed must fit in u64"))?)
            }
            _ => return Err(bad("unknown kind")),
        };
        spec.validate(text)
    }
}

impl Serialize for ThetaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ThetaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let t: ThetaSpec = "cbrt:2".parse().unwrap();
        assert_eq!(t.kind(), ThetaKind::AlgebraicRoot);
        let p: ThetaSpec = "poly:[-2,0,0,1]@0".parse().unwrap();
        let c = RealCtx::default();
        assert!(t.eval(&c).unwrap().overlaps(&p.eval(&c).unwrap()));
        assert_eq!("cf-fib:40".parse::<ThetaSpec>().unwrap(), ThetaSpec::CfFib(40));
        assert_eq!(
            "dec:1.2599210498948732".parse::<ThetaSpec>().unwrap(),
            ThetaSpec::Decimal("1.2599210498948732".into())
        );
        assert_eq!("rand:12345".parse::<ThetaSpec>().unwrap(), ThetaSpec::Random(12345));
    }

    #[test]
    fn rejects_malformed() {
        for s in ["cbrt:", "cbrt:02", "poly:[1,0]@0", "poly:[1,0,1]@0", "poly:[-2,0,1]@2", "dec:1.2.3", "x:1", "cf-fib:0", "rand:-1", "nocolon"] {
            assert!(s.parse::<ThetaSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn sqrt2_roots_selected_in_order() {
        let c = RealCtx::default();
        let lo: ThetaSpec = "poly:[-2,0,1]@0".parse().unwrap();
        let hi: ThetaSpec = "poly:[-2,0,1]@1".parse().unwrap();
        assert!((lo.eval(&c).unwrap().to_f64() + 2f64.sqrt()).abs() < 1e-15);
        assert!((hi.eval(&c).unwrap().to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn random_enclosures_nest_across_precision() {
        let t = ThetaSpec::Random(1);
        let a = t.eval(&RealCtx::new(64).unwrap()).unwrap();
        let b = t.eval(&RealCtx::new(512).unwrap()).unwrap();
        assert!(a.overlaps(&b));
        assert!(b.err_f64() < a.err_f64());
        let v = a.to_f64();
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(t.eval(&RealCtx::default()).unwrap(), t.eval(&RealCtx::default()).unwrap());
    }

    #[test]
    fn fib_convergent_prefix() {
        // [0; 1, 2, 1, 1, 2] = 1/(1 + 1/(2 + 1/(1 + 1/(1 + 1/2))))
        let v = fib_convergent(5);
        assert_eq!(v, BigRational::new(13.into(), 18.into()));
        let c = RealCtx::default();
        let x = ThetaSpec::CfFib(40).eval(&c).unwrap().to_f64();
        assert!((x - fib_convergent(39).numer().to_string().parse::<f64>().unwrap()
            / fib_convergent(39).denom().to_string().parse::<f64>().unwrap()).abs() < 1e-15);
    }

    fn spec_strategy() -> impl Strategy<Value = ThetaSpec> {
        prop_oneof![
            (-1000i64..1000).prop_map(|n| ThetaSpec::Cbrt(n.into())),
            (1usize..200).prop_map(ThetaSpec::CfFib),
            any::<u64>().prop_map(ThetaSpec::Random),
            ("-?[0-9]{1,5}\\.[0-9]{0,20}").prop_map(ThetaSpec::Decimal),
            (2i64..50).prop_map(|n| ThetaSpec::Poly { coeffs: vec![(-n).into(), 0.into(), 1.into()], root: 1 }),
        ]
    }

    proptest! {
        #[test]
        fn text_round_trip(spec in spec_strategy()) {
            let text = spec.to_string();
            let back: ThetaSpec = text.parse().unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
