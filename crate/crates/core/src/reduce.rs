//! Exact LLL reduction and Fincke–Pohst enumeration for the positive
//! definite integer form `G(x) = w·|x|² + (c·x)²` on Z³.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::forms::IntVec;

pub type Row = [BigInt; 3];

#[derive(Debug, Clone)]
pub struct SkewForm {
    pub w: BigInt,
    pub c: Row,
}

fn dot(a: &Row, b: &Row) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

impl SkewForm {
    pub fn value(&self, x: &Row) -> BigInt {
        let l = dot(&self.c, x);
        &self.w * dot(x, x) + &l * &l
    }

    fn gram(&self, b: &[Row; 3]) -> [[BigInt; 3]; 3] {
        let l: Vec<BigInt> = b.iter().map(|r| dot(&self.c, r)).collect();
        let mut g: [[BigInt; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..=i {
                let v = &self.w * dot(&b[i], &b[j]) + &l[i] * &l[j];
                g[i][j] = v.clone();
                g[j][i] = v;
            }
        }
        g
    }
}

struct Gso {
    mu: [[BigRational; 3]; 3],
    d: [BigRational; 3],
}

fn gso(g: &[[BigInt; 3]; 3]) -> Gso {
    let mut mu: [[BigRational; 3]; 3] = Default::default();
    let mut d: [BigRational; 3] = Default::default();
    for i in 0..3 {
        for j in 0..i {
            let mut v = BigRational::from_integer(g[i][j].clone());
            for k in 0..j {
                v -= &mu[j][k] * &mu[i][k] * &d[k];
            }
            mu[i][j] = v / &d[j];
        }
        let mut v = BigRational::from_integer(g[i][i].clone());
        for k in 0..i {
            v -= &mu[i][k] * &mu[i][k] * &d[k];
        }
        d[i] = v;
    }
    Gso { mu, d }
}

fn axpy(dst: &mut Row, q: &BigInt, src: &Row) {
    for i in 0..3 {
        dst[i] -= q * &src[i];
    }
}

/// In-place LLL (δ = 3/4) of the rows of `basis` with respect to `form`.
pub fn lll(basis: &mut [Row; 3], form: &SkewForm) {
    let delta = BigRational::new(3.into(), 4.into());
    let mut k = 1;
    while k < 3 {
        for j in (0..k).rev() {
            let gs = gso(&form.gram(basis));
            let q = gs.mu[k][j].round().to_integer();
            if !q.is_zero() {
                let src = basis[j].clone();
                axpy(&mut basis[k], &q, &src);
            }
        }
        let gs = gso(&form.gram(basis));
        let m = &gs.mu[k][k - 1];
        if gs.d[k] >= (&delta - m * m) * &gs.d[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

/// Every nonzero `x` with `form.value(x) <= bound`, found by exact
/// enumeration over the (ideally reduced) `basis`. Returns `None` when more
/// than `limit` points qualify.
pub fn enumerate(basis: &[Row; 3], form: &SkewForm, bound: &BigInt, limit: usize) -> Option<Vec<IntVec>> {
    let gs = gso(&form.gram(basis));
    let bound = BigRational::from_integer(bound.clone());
    let mut out = vec![];
    let mut y = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    if !descend(2, &gs, &bound, &mut y, basis, &mut out, limit) {
        return None;
    }
    Some(out)
}

fn int_range(center: &BigRational, budget: &BigRational) -> (BigInt, BigInt) {
    let s = budget.floor().to_integer().sqrt();
    (
        center.floor().to_integer() - &s - 1,
        center.ceil().to_integer() + &s + 1,
    )
}

fn descend(
    i: usize,
    gs: &Gso,
    rem: &BigRational,
    y: &mut [BigInt; 3],
    basis: &[Row; 3],
    out: &mut Vec<IntVec>,
    limit: usize,
) -> bool {
    let mut center = BigRational::zero();
    for j in i + 1..3 {
        center -= &gs.mu[j][i] * BigRational::from_integer(y[j].clone());
    }
    let budget = rem / &gs.d[i];
    let (lo, hi) = int_range(&center, &budget);
    let mut v = lo;
    while v <= hi {
        let off = BigRational::from_integer(v.clone()) - &center;
        let used = &off * &off * &gs.d[i];
        if &used <= rem {
            y[i] = v.clone();
            if i == 0 {
                if y.iter().any(|c| !c.is_zero()) {
                    let mut x: Row = Default::default();
                    for (k, yk) in y.iter().enumerate() {
                        for t in 0..3 {
                            x[t] += yk * &basis[k][t];
                        }
                    }
                    out.push(IntVec::from_row(x));
                    if out.len() > limit {
                        return false;
                    }
                }
            } else {
                let next = rem - &used;
                if !next.is_negative() && !descend(i - 1, gs, &next, y, basis, out, limit) {
                    return false;
                }
            }
        }
        v += 1;
    }
    y[i] = BigInt::zero();
    true
}

pub fn identity() -> [Row; 3] {
    let o = BigInt::one;
    let z = BigInt::zero;
    [[o(), z(), z()], [z(), o(), z()], [z(), z(), o()]]
}
