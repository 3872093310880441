//! Midpoint-radius arithmetic over dyadic numbers.
//!
//! A [`BigReal`] stores `mid * 2^exp` together with an absolute error bound
//! `rad * 2^exp`. Every operation rounds the midpoint to the context
//! precision and widens the radius outward, so the exact real that the value
//! stands for always lies in `[mid - rad, mid + rad] * 2^exp`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_PRECISION_CAP: u32 = 8192;
pub const MIN_PRECISION: u32 = 64;

/// Working precision for [`BigReal`] operations. Rounding is to nearest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RealCtx {
    precision_bits: u32,
}

impl Default for RealCtx {
    fn default() -> Self {
        RealCtx {
            precision_bits: DEFAULT_PRECISION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    ZeroIndeterminate,
    Positive,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigReal {
    mid: BigInt,
    rad: BigUint,
    exp: i64,
}

fn shl(x: &BigInt, k: i64) -> BigInt {
    debug_assert!(k >= 0);
    x << (k as usize)
}

fn shl_u(x: &BigUint, k: i64) -> BigUint {
    debug_assert!(k >= 0);
    x << (k as usize)
}

fn floor_shr(x: &BigInt, k: u64) -> BigInt {
    let (q, _) = x.div_mod_floor(&(BigInt::one() << k as usize));
    q
}

fn ceil_shr_u(x: &BigUint, k: u64) -> BigUint {
    let d = BigUint::one() << k as usize;
    let (q, r) = x.div_rem(&d);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

fn ceil_div_u(n: &BigUint, d: &BigUint) -> BigUint {
    let (q, r) = n.div_rem(d);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

fn isqrt_ceil(n: &BigUint) -> BigUint {
    let s = n.sqrt();
    if &(&s * &s) < n {
        s + 1u32
    } else {
        s
    }
}

/// `2^e` as f64 without overflowing intermediate `powi` calls.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Top bits of `x` as an f64 mantissa plus a binary exponent.
fn split_f64(x: &BigInt) -> (f64, i64) {
    let bits = x.bits() as i64;
    let shift = (bits - 60).max(0);
    let top = floor_shr(x, shift as u64);
    (top.to_f64().unwrap_or(0.0), shift)
}

impl RealCtx {
    pub fn new(precision_bits: u32) -> Result<Self> {
        if precision_bits < MIN_PRECISION {
            return Err(Error::InvalidArgument(format!(
                "precision_bits must be >= {MIN_PRECISION}, got {precision_bits}"
            )));
        }
        Ok(RealCtx { precision_bits })
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn doubled(&self) -> RealCtx {
        RealCtx {
            precision_bits: self.precision_bits.saturating_mul(2),
        }
    }

    pub fn add(&self, a: &BigReal, b: &BigReal) -> BigReal {
        let e = a.exp.min(b.exp);
        let mid = shl(&a.mid, a.exp - e) + shl(&b.mid, b.exp - e);
        let rad = shl_u(&a.rad, a.exp - e) + shl_u(&b.rad, b.exp - e);
        BigReal { mid, rad, exp: e }.rounded(self.precision_bits)
    }

    pub fn sub(&self, a: &BigReal, b: &BigReal) -> BigReal {
        self.add(a, &b.neg())
    }

    pub fn mul(&self, a: &BigReal, b: &BigReal) -> BigReal {
        let am = a.mid.magnitude();
        let bm = b.mid.magnitude();
        let rad = am * &b.rad + bm * &a.rad + &a.rad * &b.rad;
        BigReal {
            mid: &a.mid * &b.mid,
            rad,
            exp: a.exp + b.exp,
        }
        .rounded(self.precision_bits)
    }

    pub fn mul_int(&self, a: &BigReal, k: &BigInt) -> BigReal {
        BigReal {
            mid: &a.mid * k,
            rad: &a.rad * k.magnitude(),
            exp: a.exp,
        }
        .rounded(self.precision_bits)
    }

    pub fn div(&self, a: &BigReal, b: &BigReal) -> Result<BigReal> {
        let bm = b.mid.magnitude();
        if bm <= &b.rad {
            return Err(Error::IndeterminateDivisor);
        }
        let am = a.mid.magnitude();
        let p = self.precision_bits as i64;
        let s = (p + 2 + bm.bits() as i64 - am.bits() as i64).max(0) + b.rad.bits() as i64;
        let q = shl(&a.mid, s) / &b.mid;
        let num = shl_u(&(bm * &a.rad + am * &b.rad), s);
        let den = bm * (bm - &b.rad);
        let rad = ceil_div_u(&num, &den) + 1u32;
        Ok(BigReal {
            mid: q,
            rad,
            exp: a.exp - s - b.exp,
        }
        .rounded(self.precision_bits))
    }

    /// Enclosure of the square root. Negative parts of the input interval
    /// are clipped at zero; a certified-negative input is an error.
    pub fn sqrt(&self, a: &BigReal) -> Result<BigReal> {
        let (mut lo, mut hi, mut e) = (&a.mid - a.rad_int(), &a.mid + a.rad_int(), a.exp);
        if hi.is_negative() {
            return Err(Error::InvalidArgument("square root of a negative value".into()));
        }
        if lo.is_negative() {
            lo = BigInt::zero();
        }
        if e.is_odd() {
            lo <<= 1;
            hi <<= 1;
            e -= 1;
        }
        let want = 2 * (self.precision_bits as i64 + 2);
        let mut t = (want - hi.bits() as i64).max(0);
        if t.is_odd() {
            t += 1;
        }
        let lo = shl(&lo, t).to_biguint().unwrap_or_default();
        let hi = shl(&hi, t).to_biguint().unwrap_or_default();
        let s_lo = lo.sqrt();
        let s_hi = isqrt_ceil(&hi);
        let mid: BigUint = (&s_lo + &s_hi) >> 1usize;
        let rad = (&s_hi - &mid).max(&mid - &s_lo);
        Ok(BigReal {
            mid: BigInt::from(mid),
            rad,
            exp: (e - t) / 2,
        }
        .rounded(self.precision_bits))
    }

    pub fn from_rational(&self, q: &BigRational) -> BigReal {
        BigReal::from_ratio(q.numer(), q.denom(), self.precision_bits)
    }

    /// Escalating retry: run `f` at this precision, doubling on precision
    /// failures until `cap` is exceeded.
    pub fn escalate<T, F>(&self, cap: u32, mut f: F) -> Result<T>
    where
        F: FnMut(&RealCtx) -> Result<T>,
    {
        let mut ctx = *self;
        loop {
            match f(&ctx) {
                Err(e) if e.is_precision_failure() && ctx.precision_bits * 2 <= cap => {
                    ctx = ctx.doubled();
                }
                other => return other,
            }
        }
    }
}

impl BigReal {
    pub fn zero() -> Self {
        BigReal::from_int(0)
    }

    pub fn one() -> Self {
        BigReal::from_int(1)
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        BigReal {
            mid: v.into(),
            rad: BigUint::zero(),
            exp: 0,
        }
    }

    /// `mid * 2^exp ± rad * 2^exp`, exactly as given.
    pub fn from_parts(mid: BigInt, rad: BigUint, exp: i64) -> Self {
        BigReal { mid, rad, exp }
    }

    fn from_ratio(n: &BigInt, d: &BigInt, prec: u32) -> BigReal {
        let (n, d) = if d.is_negative() { (-n, -d) } else { (n.clone(), d.clone()) };
        if n.is_zero() {
            return BigReal::zero();
        }
        let s = (prec as i64 + 2 + d.bits() as i64 - n.bits() as i64).max(0);
        let (q, r) = shl(&n, s).div_rem(&d);
        let rad = if r.is_zero() { BigUint::zero() } else { BigUint::one() };
        BigReal { mid: q, rad, exp: -s }.rounded(prec)
    }

    fn rad_int(&self) -> BigInt {
        BigInt::from(self.rad.clone())
    }

    fn rounded(mut self, prec: u32) -> BigReal {
        let k = (self.mid.bits() as i64 - prec as i64)
            .max(self.rad.bits() as i64 - 32)
            .max(0);
        if k > 0 {
            let exact_shift = self.rad.is_zero()
                && self.mid.trailing_zeros().is_none_or(|z| z >= k as u64);
            if exact_shift {
                self.mid = floor_shr(&self.mid, k as u64);
            } else {
                let half = BigInt::one() << (k as usize - 1);
                self.mid = floor_shr(&(&self.mid + half), k as u64);
                self.rad = ceil_shr_u(&self.rad, k as u64) + 1u32;
            }
            self.exp += k;
        }
        self
    }

    pub fn mid(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad(&self) -> &BigUint {
        &self.rad
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn neg(&self) -> BigReal {
        BigReal {
            mid: -&self.mid,
            rad: self.rad.clone(),
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> BigReal {
        BigReal {
            mid: self.mid.abs(),
            rad: self.rad.clone(),
            exp: self.exp,
        }
    }

    pub fn sign(&self) -> Sign {
        sign_of(self)
    }

    /// Midpoint as an exact rational.
    pub fn mid_rational(&self) -> BigRational {
        dyadic(&self.mid, self.exp)
    }

    pub fn lower(&self) -> BigRational {
        dyadic(&(&self.mid - self.rad_int()), self.exp)
    }

    pub fn upper(&self) -> BigRational {
        dyadic(&(&self.mid + self.rad_int()), self.exp)
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lower() <= q && q <= &self.upper()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.magnitude() <= &self.rad
    }

    /// Whether the two enclosures share at least one point.
    pub fn overlaps(&self, other: &BigReal) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Certified ordering, `None` when the enclosures overlap. Two exact
    /// equal values compare `Equal`.
    pub fn cmp_certified(&self, other: &BigReal) -> Option<Ordering> {
        if self.is_exact() && other.is_exact() {
            return Some(self.mid_rational().cmp(&other.mid_rational()));
        }
        if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if other.upper() < self.lower() {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (m, s) = split_f64(&self.mid);
        ldexp(m, self.exp + s)
    }

    pub fn err_f64(&self) -> f64 {
        let (m, s) = split_f64(&BigInt::from(self.rad.clone()));
        ldexp(m, self.exp + s)
    }

    /// Natural log of |mid|; `-inf` when the midpoint is zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mid.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, s) = split_f64(&self.mid.abs());
        m.ln() + (self.exp + s) as f64 * std::f64::consts::LN_2
    }

    /// Number of certified absolute binary digits: `floor(-log2(err))`,
    /// or `None` for an exact value.
    pub fn err_bits(&self) -> Option<i64> {
        if self.rad.is_zero() {
            return None;
        }
        Some(-(self.rad.bits() as i64 + self.exp))
    }

    /// Decimal scientific rendering with as many significant digits as the
    /// error bound supports (at least 3, at most what the precision holds).
    pub fn to_sci_string(&self, precision_bits: u32) -> String {
        let max_digits = (precision_bits as f64 * std::f64::consts::LOG10_2) as usize + 1;
        let digits = if self.rad.is_zero() {
            max_digits
        } else if self.mid.is_zero() {
            1
        } else {
            let rel = self.mid.bits() as i64 - self.rad.bits() as i64;
            ((rel as f64 * std::f64::consts::LOG10_2) as usize + 1).clamp(3, max_digits)
        };
        sci_string(&self.mid, self.exp, digits)
    }
}

/// Certified sign: positive iff the interval lies strictly above zero.
pub fn sign_of(a: &BigReal) -> Sign {
    let m = a.mid.magnitude();
    if m <= &a.rad {
        Sign::ZeroIndeterminate
    } else if a.mid.is_positive() {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

fn dyadic(m: &BigInt, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(shl(m, e))
    } else {
        BigRational::new(m.clone(), BigInt::one() << (-e) as usize)
    }
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), k as usize)
}

fn sci_string(mid: &BigInt, exp: i64, digits: usize) -> String {
    if mid.is_zero() {
        return "0".to_string();
    }
    let neg = mid.sign() == BigSign::Minus;
    let m = mid.abs();
    let (mf, ms) = split_f64(&m);
    let mut e10 = ((mf.log10()) + (exp + ms) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let lo = pow10(digits as u32 - 1);
    let hi = pow10(digits as u32);
    let q = loop {
        let shift10 = digits as i64 - 1 - e10;
        let mut num = m.clone();
        let mut den = BigInt::one();
        if exp >= 0 {
            num = shl(&num, exp);
        } else {
            den = BigInt::one() << (-exp) as usize;
        }
        if shift10 >= 0 {
            num *= pow10(shift10 as u32);
        } else {
            den *= pow10((-shift10) as u32);
        }
        let q: BigInt = (num * 2 + &den) / (den * 2);
        if q >= hi {
            e10 += 1;
        } else if q < lo {
            e10 -= 1;
        } else {
            break q;
        }
    };
    let s = q.to_string();
    let (head, tail) = s.split_at(1);
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e10}")
    } else {
        format!("{sign}{head}.{tail}e{e10}")
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", sci_string(&self.mid, self.exp, 20), self.err_f64())
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", sci_string(&self.mid, self.exp, 20))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn ctx() -> RealCtx {
        RealCtx::default()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exact_integer_add() {
        let s = ctx().add(&BigReal::one(), &BigReal::one());
        assert!(s.contains(&q(2, 1)));
        assert_eq!(s.sign(), Sign::Positive);
        assert!(s.err_f64() <= 1e-70);
    }

    #[test]
    fn cube_root_squared() {
        // Independent oracle: bisection on x^3 = 2 in exact rationals.
        let c = ctx();
        let mut lo = q(1, 1);
        let mut hi = q(2, 1);
        for _ in 0..300 {
            let m = (&lo + &hi) / BigRational::from_integer(2.into());
            if &m * &m * &m < q(2, 1) {
                lo = m;
            } else {
                hi = m;
            }
        }
        let theta = c.from_rational(&lo);
        // lo is 2^-300 below cbrt(2); widen by that.
        let theta = c.add(&theta, &BigReal::from_parts(0.into(), 1u32.into(), -299));
        let sq = c.mul(&theta, &theta);
        // cbrt(4) bracket from the same bisection: lo^2 <= cbrt4 <= hi^2
        assert!(sq.lower() <= &lo * &lo);
        assert!(sq.upper() >= &hi * &hi);
        assert!(sq.err_f64() < 1e-70);
        assert!((sq.to_f64() - 4f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn div_by_zero_containing() {
        let z = BigReal::from_parts(0.into(), 1u32.into(), -1);
        let r = ctx().div(&BigReal::one(), &z);
        assert_eq!(r, Err(Error::IndeterminateDivisor));
        let z = BigReal::from_parts(1.into(), 1u32.into(), -3);
        assert!(ctx().div(&BigReal::one(), &z).is_err());
    }

    #[test]
    fn sign_cases() {
        let five = BigReal::from_parts(50.into(), 1u32.into(), 0);
        assert_eq!(sign_of(&five), Sign::Positive);
        // 0.0001 ± 0.01
        let c = ctx();
        let small = c.from_rational(&q(1, 10000));
        let small = c.add(&small, &c.mul(&BigReal::zero(), &BigReal::zero()));
        let wide = BigReal::from_parts(small.mid().clone(), BigUint::one() << 260usize, small.exp());
        assert_eq!(sign_of(&wide), Sign::ZeroIndeterminate);
        assert_eq!(sign_of(&five.neg()), Sign::Negative);
    }

    #[test]
    fn sqrt_of_two() {
        let r = ctx().sqrt(&BigReal::from_int(2)).unwrap();
        let sq = ctx().mul(&r, &r);
        assert!(sq.contains(&q(2, 1)));
        assert!(r.err_f64() < 1e-70);
        assert!(ctx().sqrt(&BigReal::from_int(-1)).is_err());
        let z = ctx().sqrt(&BigReal::zero()).unwrap();
        assert!(z.contains(&q(0, 1)));
    }

    #[test]
    fn sci_rendering() {
        let c = ctx();
        let x = c.from_rational(&q(1, 3));
        assert!(x.to_sci_string(256).starts_with("3.3333333333"));
        assert!(x.to_sci_string(256).ends_with("e-1"));
        assert_eq!(BigReal::from_int(1000).to_sci_string(64), "1.0000000000000000000e3");
        assert_eq!(BigReal::from_int(-5).to_sci_string(64), "-5.0000000000000000000e0");
    }

    #[test]
    fn escalation_stops_at_cap() {
        let mut seen = vec![];
        let r: Result<()> = ctx().escalate(2048, |c| {
            seen.push(c.precision_bits());
            Err(Error::Undecidable("x".into()))
        });
        assert!(r.is_err());
        assert_eq!(seen, vec![256, 512, 1024, 2048]);
    }

    #[test]
    fn precision_too_low_rejected() {
        assert!(RealCtx::new(32).is_err());
        assert!(RealCtx::new(64).is_ok());
    }

    fn eval_expr(c: &RealCtx, xs: &[BigRational]) -> BigReal {
        // ((x0 + x1) * x2 - x3) / (|x4| + 1)
        let v: Vec<BigReal> = xs.iter().map(|x| c.from_rational(x)).collect();
        let s = c.add(&v[0], &v[1]);
        let m = c.mul(&s, &v[2]);
        let d = c.sub(&m, &v[3]);
        let den = c.add(&v[4].abs(), &BigReal::one());
        c.div(&d, &den).unwrap()
    }

    fn exact_expr(xs: &[BigRational]) -> BigRational {
        let one = BigRational::from_integer(1.into());
        ((&xs[0] + &xs[1]) * &xs[2] - &xs[3]) / (xs[4].abs() + one)
    }

    proptest! {
        #[test]
        fn interval_soundness(raw in proptest::collection::vec((-100000i64..100000, 1i64..5000), 5)) {
            let xs: Vec<BigRational> = raw.iter().map(|&(n, d)| q(n, d)).collect();
            let c = RealCtx::new(64).unwrap();
            let r = eval_expr(&c, &xs);
            prop_assert!(r.contains(&exact_expr(&xs)));
            let r2 = eval_expr(&c.doubled(), &xs);
            prop_assert!(r2.contains(&exact_expr(&xs)));
            prop_assert!(r2.err_f64() <= r.err_f64());
        }

        #[test]
        fn sqrt_soundness(n in 0u64..1_000_000_000) {
            let r = ctx().sqrt(&BigReal::from_int(n)).unwrap();
            let exact = (n as f64).sqrt();
            prop_assert!((r.to_f64() - exact).abs() <= 1e-9 * exact.max(1.0));
            prop_assert!(r.lower() * r.lower() <= BigRational::from_u64(n).unwrap());
            prop_assert!(r.upper() * r.upper() >= BigRational::from_u64(n).unwrap());
        }
    }
}
