//! Integer polynomials: Sturm-sequence root isolation and bisection
//! refinement to a [`BigReal`] enclosure.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::numeric::{BigReal, RealCtx};

/// Polynomial with integer coefficients, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

/// An isolated real root: either exactly rational, or the unique root in
/// the open interval `(lo, hi)` where the square-free part changes sign.
#[derive(Debug, Clone, PartialEq)]
pub enum IsolatedRoot {
    Exact(BigRational),
    Interval { lo: BigRational, hi: BigRational },
}

type QPoly = Vec<BigRational>;

fn trim<T: Zero>(mut v: Vec<T>) -> Vec<T> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn q_eval(p: &QPoly, x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn q_rem(a: &QPoly, b: &QPoly) -> QPoly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        for i in 0..=db {
            let t = &f * &b[i];
            r[dr - db + i] -= t;
        }
        r = trim(r);
    }
    r
}

fn q_div(a: &QPoly, b: &QPoly) -> QPoly {
    let mut r = a.clone();
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![];
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        for i in 0..=db {
            let t = &f * &b[i];
            r[dr - db + i] -= t;
        }
        q[dr - db] = f;
        r = trim(r);
    }
    trim(q)
}

fn q_gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = q_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn q_derivative(p: &QPoly) -> QPoly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn sign_changes(seq: &[QPoly], x: &BigRational) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| {
            let v = q_eval(p, x);
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        IntPoly {
            coeffs: trim(coeffs),
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn from_q(p: &QPoly) -> Self {
        let l = p
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let mut ints: Vec<BigInt> = ints.into_iter().map(|c| if g.is_zero() { c } else { c / &g }).collect();
        if ints.last().is_some_and(|c| c.is_negative()) {
            ints.iter_mut().for_each(|c| *c = -c.clone());
        }
        IntPoly::new(ints)
    }

    fn to_q(&self) -> QPoly {
        self.coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        q_eval(&self.to_q(), x)
    }

    pub fn eval_real(&self, x: &BigReal, ctx: &RealCtx) -> BigReal {
        self.coeffs.iter().rev().fold(BigReal::zero(), |acc, c| {
            ctx.add(&ctx.mul(&acc, x), &BigReal::from_int(c.clone()))
        })
    }

    /// Sign of `f(m / 2^k)`, computed on integers.
    fn sign_at_dyadic(&self, m: &BigInt, k: usize) -> i8 {
        let d = self.coeffs.len() - 1;
        let mut acc = BigInt::zero();
        let mut mp = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += (c * &mp) << (k * (d - i));
            mp *= m;
        }
        if acc.is_positive() {
            1
        } else if acc.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Primitive square-free part with positive leading coefficient.
    pub fn squarefree(&self) -> IntPoly {
        let p = self.to_q();
        let g = q_gcd(&p, &q_derivative(&p));
        if g.len() <= 1 {
            return IntPoly::from_q(&p);
        }
        IntPoly::from_q(&q_div(&p, &g))
    }

    /// Exact gcd over the rationals, as a primitive integer polynomial.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        IntPoly::from_q(&q_gcd(&self.to_q(), &other.to_q()))
    }

    /// All real roots in increasing order.
    pub fn real_roots(&self) -> Vec<IsolatedRoot> {
        let f = self.squarefree();
        if f.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let fq = f.to_q();
        let mut sturm = vec![fq.clone(), q_derivative(&fq)];
        loop {
            let n = sturm.len();
            let r = q_rem(&sturm[n - 2], &sturm[n - 1]);
            if r.is_empty() {
                break;
            }
            sturm.push(r.into_iter().map(|c| -c).collect());
        }
        // Cauchy bound rounded up to a power of two.
        let lead = f.coeffs.last().unwrap().abs();
        let maxc = f.coeffs.iter().map(|c| c.abs()).max().unwrap();
        let bound = (maxc / lead) + 2;
        let mut b = BigInt::one();
        while b < bound {
            b <<= 1;
        }
        let lo = BigRational::from_integer(-b.clone());
        let hi = BigRational::from_integer(b);
        let mut out = vec![];
        isolate(&sturm, lo, hi, &mut out);
        out
    }
}

/// Recursive bisection over `(lo, hi]` using Sturm counts.
fn isolate(sturm: &[QPoly], lo: BigRational, hi: BigRational, out: &mut Vec<IsolatedRoot>) {
    let n = sign_changes(sturm, &lo) - sign_changes(sturm, &hi);
    if n == 0 {
        return;
    }
    let fq = &sturm[0];
    if n == 1 && q_eval(fq, &hi).is_zero() {
        out.push(IsolatedRoot::Exact(hi));
        return;
    }
    if n == 1 && !q_eval(fq, &lo).is_zero() {
        out.push(IsolatedRoot::Interval { lo, hi });
        return;
    }
    let mid = (&lo + &hi) / BigRational::from_integer(2.into());
    isolate(sturm, lo, mid.clone(), out);
    isolate(sturm, mid, hi, out);
}

/// Dyadic representation `m / 2^k` of a rational known to be dyadic, or a
/// dyadic lower/upper neighbour otherwise.
fn to_dyadic(x: &BigRational, k: usize, ceil: bool) -> BigInt {
    let scaled = x * BigRational::from_integer(BigInt::one() << k);
    if ceil {
        scaled.ceil().to_integer()
    } else {
        scaled.floor().to_integer()
    }
}

impl IsolatedRoot {
    /// Enclosure at the context precision, by bisection on the square-free
    /// part of `f`.
    pub fn refine(&self, f: &IntPoly, ctx: &RealCtx) -> BigReal {
        match self {
            IsolatedRoot::Exact(q) => ctx.from_rational(q),
            IsolatedRoot::Interval { lo, hi } => {
                let f = f.squarefree();
                let p = ctx.precision_bits() as usize;
                let mag = lo.abs().max(hi.abs()).ceil().to_integer().bits() as usize;
                let k = p + mag + 4;
                // The interval endpoints are dyadic by construction.
                let mut a = to_dyadic(lo, k, false);
                let mut b = to_dyadic(hi, k, true);
                let sa = f.sign_at_dyadic(&a, k);
                loop {
                    if &b - &a <= BigInt::from(2) {
                        break;
                    }
                    let m: BigInt = (&a + &b) >> 1usize;
                    let sm = f.sign_at_dyadic(&m, k);
                    if sm == 0 {
                        return BigReal::from_parts(m, 0u32.into(), -(k as i64));
                    }
                    if sm == sa {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let mid = &a + &b;
                let rad = (&b - &a).magnitude().clone();
                let r = BigReal::from_parts(mid, rad, -(k as i64) - 1);
                ctx.add(&r, &BigReal::zero())
            }
        }
    }

    pub fn interval(&self) -> (BigRational, BigRational) {
        match self {
            IsolatedRoot::Exact(q) => (q.clone(), q.clone()),
            IsolatedRoot::Interval { lo, hi } => (lo.clone(), hi.clone()),
        }
    }
}
