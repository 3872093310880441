//! Integer vectors, the linear forms L, P, F, and their coefficient
//! determinant.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{BigReal, RealCtx, Sign};
use crate::reduce::{self, Row, SkewForm};
use crate::theta::ThetaSpec;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntVec(pub [BigInt; 3]);

impl IntVec {
    pub fn new(x0: impl Into<BigInt>, x1: impl Into<BigInt>, x2: impl Into<BigInt>) -> Self {
        IntVec([x0.into(), x1.into(), x2.into()])
    }

    pub fn from_row(r: Row) -> Self {
        IntVec(r)
    }

    pub fn zero() -> Self {
        IntVec::new(0, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn euclid_sq(&self) -> BigInt {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn sup(&self) -> BigInt {
        self.0.iter().map(|c| c.abs()).max().unwrap()
    }

    pub fn neg(&self) -> IntVec {
        IntVec([-&self.0[0], -&self.0[1], -&self.0[2]])
    }

    pub fn add(&self, o: &IntVec) -> IntVec {
        IntVec([&self.0[0] + &o.0[0], &self.0[1] + &o.0[1], &self.0[2] + &o.0[2]])
    }

    pub fn scale(&self, k: &BigInt) -> IntVec {
        IntVec([&self.0[0] * k, &self.0[1] * k, &self.0[2] * k])
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    pub fn cross(&self, o: &IntVec) -> IntVec {
        let (a, b) = (&self.0, &o.0);
        IntVec([
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ])
    }

    pub fn dot(&self, o: &IntVec) -> BigInt {
        self.0.iter().zip(o.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Determinant of the 3×3 matrix with rows `self, b, c`.
    pub fn det3(&self, b: &IntVec, c: &IntVec) -> BigInt {
        self.dot(&b.cross(c))
    }

    pub fn to_strings(&self) -> [String; 3] {
        [self.0[0].to_string(), self.0[1].to_string(), self.0[2].to_string()]
    }

    pub fn parse_strings(s: &[String]) -> Result<IntVec> {
        if s.len() != 3 {
            return Err(Error::Format("vector needs three components".into()));
        }
        let p = |t: &String| t.parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer `{t}`")));
        Ok(IntVec([p(&s[0])?, p(&s[1])?, p(&s[2])?]))
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclid,
    Sup,
}

impl NormKind {
    /// Exact integer key ordered like the norm: `|x|²` or `max |xi|`.
    pub fn key(&self, x: &IntVec) -> BigInt {
        match self {
            NormKind::Euclid => x.euclid_sq(),
            NormKind::Sup => x.sup(),
        }
    }

    /// Key of the height bound `T`.
    pub fn bound_key(&self, t: &BigInt) -> BigInt {
        match self {
            NormKind::Euclid => t * t,
            NormKind::Sup => t.clone(),
        }
    }

    pub fn value(&self, x: &IntVec, ctx: &RealCtx) -> BigReal {
        match self {
            NormKind::Euclid => ctx
                .sqrt(&BigReal::from_int(x.euclid_sq()))
                .expect("squared norm is nonnegative"),
            NormKind::Sup => BigReal::from_int(x.sup()),
        }
    }

    pub fn ln(&self, x: &IntVec) -> f64 {
        let k = self.key(x);
        let v = BigReal::from_int(k).ln_abs();
        match self {
            NormKind::Euclid => v / 2.0,
            NormKind::Sup => v,
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclid" => Ok(NormKind::Euclid),
            "sup" => Ok(NormKind::Sup),
            _ => Err(Error::InvalidArgument(format!("unknown norm `{s}`"))),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Euclid => "euclid",
            NormKind::Sup => "sup",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coeffs: [BigReal; 3],
}

impl LinearForm {
    pub fn new(c0: BigReal, c1: BigReal, c2: BigReal) -> Self {
        LinearForm { coeffs: [c0, c1, c2] }
    }

    pub fn unit(i: usize) -> Self {
        let mut c = [BigReal::zero(), BigReal::zero(), BigReal::zero()];
        c[i] = BigReal::one();
        LinearForm { coeffs: c }
    }

    pub fn from_ints(c: [i64; 3]) -> Self {
        LinearForm::new(BigReal::from_int(c[0]), BigReal::from_int(c[1]), BigReal::from_int(c[2]))
    }

    pub fn eval(&self, x: &IntVec, ctx: &RealCtx) -> BigReal {
        eval_form(self, x, ctx)
    }

    pub fn neg(&self) -> LinearForm {
        LinearForm {
            coeffs: [self.coeffs[0].neg(), self.coeffs[1].neg(), self.coeffs[2].neg()],
        }
    }
}

/// Certified enclosure of `c0·x0 + c1·x1 + c2·x2`.
pub fn eval_form(f: &LinearForm, x: &IntVec, ctx: &RealCtx) -> BigReal {
    f.coeffs
        .iter()
        .zip(x.0.iter())
        .filter(|(_, xi)| !xi.is_zero())
        .fold(BigReal::zero(), |acc, (c, xi)| ctx.add(&acc, &ctx.mul_int(c, xi)))
}

fn det3_real(rows: [&[BigReal; 3]; 3], ctx: &RealCtx) -> BigReal {
    let m = |a: &BigReal, b: &BigReal| ctx.mul(a, b);
    let minor = |r1: &[BigReal; 3], r2: &[BigReal; 3], i: usize, j: usize| {
        ctx.sub(&m(&r1[i], &r2[j]), &m(&r1[j], &r2[i]))
    };
    let [a, b, c] = rows;
    let t0 = m(&a[0], &minor(b, c, 1, 2));
    let t1 = m(&a[1], &minor(b, c, 0, 2));
    let t2 = m(&a[2], &minor(b, c, 0, 1));
    ctx.add(&ctx.sub(&t0, &t1), &t2)
}

/// Determinant of a 3×3 matrix of reals, rows in order.
pub fn det3_rows(rows: [&[BigReal; 3]; 3], ctx: &RealCtx) -> BigReal {
    det3_real(rows, ctx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDet {
    pub value: BigReal,
    /// True iff the sign of the determinant is certified.
    pub nonzero: bool,
}

pub fn coefficient_det(l: &LinearForm, p: &LinearForm, f: &LinearForm, ctx: &RealCtx) -> CoefficientDet {
    let value = det3_real([&l.coeffs, &p.coeffs, &f.coeffs], ctx);
    let nonzero = value.sign() != Sign::ZeroIndeterminate;
    CoefficientDet { value, nonzero }
}

/// First unit coordinate form among `e2, e1, e0` completing `L, P` to a
/// basis of the dual space. Returns the form and its coordinate index.
pub fn default_f(l: &LinearForm, p: &LinearForm, ctx: &RealCtx) -> Result<(LinearForm, usize)> {
    for i in [2usize, 1, 0] {
        let f = LinearForm::unit(i);
        if coefficient_det(l, p, &f, ctx).nonzero {
            return Ok((f, i));
        }
    }
    Err(Error::IndependenceUndecidable(
        "no unit form completes L, P (forms dependent or precision too low)".into(),
    ))
}

/// Coefficient recipe: an integer, or an integer polynomial in one of the
/// problem's θ values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coef {
    Int(BigInt),
    Poly { theta: usize, coeffs: Vec<BigInt> },
}

impl Coef {
    fn theta_poly(theta: usize, coeffs: &[i64]) -> Coef {
        Coef::Poly {
            theta,
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    pub fn eval(&self, thetas: &[BigReal], ctx: &RealCtx) -> BigReal {
        match self {
            Coef::Int(v) => BigReal::from_int(v.clone()),
            Coef::Poly { theta, coeffs } => coeffs.iter().rev().fold(BigReal::zero(), |acc, c| {
                ctx.add(&ctx.mul(&acc, &thetas[*theta]), &BigReal::from_int(c.clone()))
            }),
        }
    }

    /// Formal derivative in its θ variable.
    pub fn derivative(&self) -> Coef {
        match self {
            Coef::Int(_) => Coef::Int(BigInt::zero()),
            Coef::Poly { theta, coeffs } => {
                let d: Vec<BigInt> = coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
                Coef::Poly { theta: *theta, coeffs: d }.normalized()
            }
        }
    }

    fn normalized(self) -> Coef {
        match self {
            Coef::Poly { theta, mut coeffs } => {
                while coeffs.last().is_some_and(|c| c.is_zero()) {
                    coeffs.pop();
                }
                match coeffs.len() {
                    0 => Coef::Int(BigInt::zero()),
                    1 => Coef::Int(coeffs.pop().unwrap()),
                    _ => Coef::Poly { theta, coeffs },
                }
            }
            c => c,
        }
    }
}

/// One coefficient of a user-supplied P in general mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PCoef {
    Int(BigInt),
    Theta1,
    Theta2,
    Spec(ThetaSpec),
}

impl fmt::Display for PCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PCoef::Int(v) => write!(f, "{v}"),
            PCoef::Theta1 => f.write_str("t1"),
            PCoef::Theta2 => f.write_str("t2"),
            PCoef::Spec(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for PCoef {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<BigInt>() {
            return Ok(PCoef::Int(v));
        }
        match s {
            "t1" => Ok(PCoef::Theta1),
            "t2" => Ok(PCoef::Theta2),
            _ => Ok(PCoef::Spec(crate::gallery::resolve(s)?)),
        }
    }
}

/// The input problem: θ values and the recipe for L and P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    /// `L = x0 + x1·θ + x2·θ²`, `P = x1 + 2·x2·θ`.
    Derivative { theta: ThetaSpec },
    /// `L = x0 + x1·θ1 + x2·θ2` with explicit P coefficients.
    General {
        theta1: ThetaSpec,
        theta2: ThetaSpec,
        p: [PCoef; 3],
    },
}

/// L, P, F instantiated at one precision, with `A = det(L; P; F)`.
#[derive(Debug, Clone)]
pub struct Forms {
    pub l: LinearForm,
    pub p: LinearForm,
    pub f: LinearForm,
    pub f_index: usize,
    pub a: BigReal,
    pub ctx: RealCtx,
}

impl Problem {
    pub fn derivative(theta: ThetaSpec) -> Self {
        Problem::Derivative { theta }
    }

    /// Stable text used in cache keys and report headers.
    pub fn key(&self) -> String {
        match self {
            Problem::Derivative { theta } => theta.to_string(),
            Problem::General { theta1, theta2, p } => {
                format!("general:{theta1}|{theta2}|P={};{};{}", p[0], p[1], p[2])
            }
        }
    }

    pub fn thetas(&self) -> Vec<ThetaSpec> {
        match self {
            Problem::Derivative { theta } => vec![theta.clone()],
            Problem::General { theta1, theta2, p } => {
                let mut v = vec![theta1.clone(), theta2.clone()];
                for c in p {
                    if let PCoef::Spec(s) = c {
                        v.push(s.clone());
                    }
                }
                v
            }
        }
    }

    /// Symbolic coefficient recipes for L and P.
    pub fn recipes(&self) -> ([Coef; 3], [Coef; 3]) {
        match self {
            Problem::Derivative { .. } => (
                [Coef::Int(1.into()), Coef::theta_poly(0, &[0, 1]), Coef::theta_poly(0, &[0, 0, 1])],
                [Coef::Int(0.into()), Coef::Int(1.into()), Coef::theta_poly(0, &[0, 2])],
            ),
            Problem::General { p, .. } => {
                let mut next = 2;
                let pc: Vec<Coef> = p
                    .iter()
                    .map(|c| match c {
                        PCoef::Int(v) => Coef::Int(v.clone()),
                        PCoef::Theta1 => Coef::theta_poly(0, &[0, 1]),
                        PCoef::Theta2 => Coef::theta_poly(1, &[0, 1]),
                        PCoef::Spec(_) => {
                            next += 1;
                            Coef::theta_poly(next - 1, &[0, 1])
                        }
                    })
                    .collect();
                (
                    [Coef::Int(1.into()), Coef::theta_poly(0, &[0, 1]), Coef::theta_poly(1, &[0, 1])],
                    [pc[0].clone(), pc[1].clone(), pc[2].clone()],
                )
            }
        }
    }

    /// In derivative mode P is the formal θ-derivative of L.
    pub fn check_derivative_pair(&self) -> bool {
        let (l, p) = self.recipes();
        l.iter().zip(p.iter()).all(|(lc, pc)| lc.derivative().normalized() == pc.clone().normalized())
    }

    pub fn theta_values(&self, ctx: &RealCtx) -> Result<Vec<BigReal>> {
        self.thetas().iter().map(|t| t.eval(ctx)).collect()
    }

    /// L, P, F at this precision. Dependent or undecidable L, P is an error.
    pub fn instantiate(&self, ctx: &RealCtx) -> Result<Forms> {
        let vals = self.theta_values(ctx)?;
        let (lr, pr) = self.recipes();
        let mk = |r: &[Coef; 3]| LinearForm::new(r[0].eval(&vals, ctx), r[1].eval(&vals, ctx), r[2].eval(&vals, ctx));
        let l = mk(&lr);
        let p = mk(&pr);
        let (f, f_index) = default_f(&l, &p, ctx)?;
        let a = coefficient_det(&l, &p, &f, ctx).value;
        Ok(Forms {
            l,
            p,
            f,
            f_index,
            a,
            ctx: *ctx,
        })
    }

    /// Heuristic check of the independence of 1, θ1, θ2 over Z. Returns a
    /// warning when a small relation is found; silence proves nothing.
    pub fn independence_warning(&self, ctx: &RealCtx) -> Result<Option<String>> {
        let mut notes = vec![];
        for t in self.thetas() {
            if let Some(d) = t.decimal_digits() {
                let bits = (d as f64 * std::f64::consts::LOG2_10) as u32;
                if bits < ctx.precision_bits() {
                    notes.push(format!(
                        "{t} carries ~{bits} bits, below the {} bits requested; treated as an exact rational",
                        ctx.precision_bits()
                    ));
                }
            }
        }
        let forms = match self.instantiate(ctx) {
            Ok(f) => f,
            Err(e) => return Ok(Some(format!("forms not independent: {e}"))),
        };
        if let Some(m) = find_relation(&forms.l.coeffs, ctx) {
            notes.push(format!("1, θ1, θ2 look dependent over Z: relation {m}"));
        }
        Ok(if notes.is_empty() { None } else { Some(notes.join("; ")) })
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Searches for an integer relation `m` with `|m|_∞ ≤ 2^(p/8)` and
/// `|m0·v0 + m1·v1 + m2·v2| < 2^(-p/2)` by LLL on a weighted lattice.
pub fn find_relation(values: &[BigReal; 3], ctx: &RealCtx) -> Option<IntVec> {
    let p = ctx.precision_bits() as i64;
    let s = p - 16;
    let scale = |v: &BigReal| -> BigInt {
        let sh = v.exp() + s;
        if sh >= 0 {
            v.mid() << sh as usize
        } else {
            let d = BigInt::one() << (-sh) as usize;
            let (q, _) = (v.mid() + (&d >> 1usize)).div_mod_floor(&d);
            q
        }
    };
    let form = SkewForm {
        w: BigInt::one(),
        c: [scale(&values[0]), scale(&values[1]), scale(&values[2])],
    };
    let mut basis = reduce::identity();
    reduce::lll(&mut basis, &form);
    let size_cap = BigInt::one() << (p / 8) as usize;
    let tiny = BigReal::from_parts(BigInt::one(), 0u32.into(), -(p / 2));
    let lf = LinearForm { coeffs: values.clone() };
    for b in basis.iter() {
        let m = IntVec(b.clone());
        if m.sup() > size_cap {
            continue;
        }
        let v = eval_form(&lf, &m, ctx).abs();
        if v.cmp_certified(&tiny) == Some(std::cmp::Ordering::Less) || v.contains_zero() {
            return Some(m);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> RealCtx {
        RealCtx::default()
    }

    fn cbrt2() -> BigReal {
        ThetaSpec::Cbrt(2.into()).eval(&ctx()).unwrap()
    }

    fn thm2_forms(theta: &BigReal) -> (LinearForm, LinearForm) {
        let c = ctx();
        let sq = c.mul(theta, theta);
        (
            LinearForm::new(BigReal::one(), theta.clone(), sq),
            LinearForm::new(BigReal::zero(), BigReal::one(), c.mul_int(theta, &2.into())),
        )
    }

    #[test]
    fn eval_unit_vector_is_exact() {
        let (l, _) = thm2_forms(&cbrt2());
        let v = l.eval(&IntVec::new(1, 0, 0), &ctx());
        assert!(v.is_exact());
        assert_eq!(v, BigReal::one());
    }

    #[test]
    fn eval_small_vectors() {
        let t = cbrt2();
        let (l, p) = thm2_forms(&t);
        let v = l.eval(&IntVec::new(-1, 1, 0), &ctx());
        assert!((v.to_f64() - (2f64.cbrt() - 1.0)).abs() < 1e-15);
        assert!(v.err_f64() < 1e-70);
        let w = p.eval(&IntVec::new(0, 0, 1), &ctx());
        assert!((w.to_f64() - 2.0 * 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn determinant_examples() {
        let c = ctx();
        let t = cbrt2();
        let (l, p) = thm2_forms(&t);
        let d = coefficient_det(&l, &p, &LinearForm::unit(2), &c);
        assert!(d.nonzero);
        assert!(d.value.contains(&num_rational::BigRational::from_integer(1.into())));

        let p2 = LinearForm::new(
            c.mul_int(&BigReal::one(), &2.into()),
            c.mul_int(&t, &2.into()),
            c.mul_int(&c.mul(&t, &t), &2.into()),
        );
        let d = coefficient_det(&l, &p2, &LinearForm::unit(1), &c);
        assert!(!d.nonzero);
        assert!(default_f(&l, &p2, &c).is_err());

        // rows (1, t, t²), (0, 1, 2t), (0, 1, 0): det = -2t
        let d = coefficient_det(&l, &p, &LinearForm::unit(1), &c);
        assert!((d.value.to_f64() + 2.0 * 2f64.cbrt()).abs() < 1e-15);
        assert!(d.nonzero);
    }

    #[test]
    fn default_f_choices() {
        let c = ctx();
        let t = cbrt2();
        let (l, p) = thm2_forms(&t);
        assert_eq!(default_f(&l, &p, &c).unwrap().1, 2);
        let l2 = LinearForm::new(BigReal::one(), BigReal::zero(), t.clone());
        assert_eq!(default_f(&l2, &LinearForm::unit(1), &c).unwrap().1, 2);
        assert_eq!(default_f(&l, &LinearForm::unit(2), &c).unwrap().1, 1);
    }

    #[test]
    fn derivative_pair_is_derivative() {
        let pr = Problem::derivative(ThetaSpec::Cbrt(2.into()));
        assert!(pr.check_derivative_pair());
        let f = pr.instantiate(&ctx()).unwrap();
        assert_eq!(f.f_index, 2);
        let zero = Problem::derivative(ThetaSpec::Decimal("0".into()));
        let f0 = zero.instantiate(&ctx()).unwrap();
        assert_eq!(f0.l, LinearForm::from_ints([1, 0, 0]));
        assert_eq!(f0.p, LinearForm::from_ints([0, 1, 0]));
    }

    #[test]
    fn relation_refuter() {
        let c = ctx();
        let (l, _) = thm2_forms(&cbrt2());
        assert!(find_relation(&l.coeffs, &c).is_none());
        let half = ThetaSpec::Decimal("0.5".into());
        let w = Problem::derivative(half).independence_warning(&c).unwrap();
        assert!(w.unwrap().contains("dependent"));
        let one = Problem::derivative(ThetaSpec::Decimal("1".into()));
        assert!(one.independence_warning(&c).unwrap().is_some());
        let rand = Problem::derivative(ThetaSpec::Random(1));
        assert_eq!(rand.independence_warning(&c).unwrap(), None);
    }

    #[test]
    fn general_mode_key_and_forms() {
        let pr = Problem::General {
            theta1: ThetaSpec::Random(3),
            theta2: ThetaSpec::Random(4),
            p: ["0".parse().unwrap(), "1".parse().unwrap(), "t1".parse().unwrap()],
        };
        assert_eq!(pr.key(), "general:rand:3|rand:4|P=0;1;t1");
        let f = pr.instantiate(&ctx()).unwrap();
        assert!(f.a.sign() != Sign::ZeroIndeterminate);
    }

    #[test]
    fn additivity_and_antisymmetry() {
        use proptest::prelude::*;
        let c = ctx();
        let (l, p) = thm2_forms(&cbrt2());
        let f = LinearForm::unit(2);
        proptest!(|(a in proptest::array::uniform3(-10000i64..10000), b in proptest::array::uniform3(-10000i64..10000))| {
            let x = IntVec::new(a[0], a[1], a[2]);
            let y = IntVec::new(b[0], b[1], b[2]);
            let sum = c.add(&l.eval(&x, &c), &l.eval(&y, &c));
            prop_assert!(l.eval(&x.add(&y), &c).overlaps(&sum));
        });
        let d1 = coefficient_det(&l, &p, &f, &c).value;
        let d2 = coefficient_det(&p, &l, &f, &c).value;
        assert!(d1.overlaps(&d2.neg()));
        let d3 = coefficient_det(&l, &f, &p, &c).value;
        assert!(d1.overlaps(&d3.neg()));
    }
}
