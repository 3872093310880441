//! Approximation of θ by algebraic numbers of degree at most two.
//!
//! Candidates come from a fixed-point scan over `(a1, a2)` with `a0` in a
//! window around `−(a1·θ + a2·θ²)`. A first pass with a narrow window gives
//! running minima per height; a second pass sizes the window from them so
//! that no record can fall outside it. Records are then certified in
//! interval arithmetic in `(H, a0, a1, a2)` order.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{trend_of, EstimateKind, ExponentEstimate};
use crate::forms::{find_relation, LinearForm, Problem};
use crate::numeric::{BigReal, RealCtx, Sign, DEFAULT_PRECISION_CAP};
use crate::poly::{IntPoly, IsolatedRoot};
use crate::theta::ThetaSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticApproximant {
    /// `(a0, a1, a2)` of `a2·x² + a1·x + a0`.
    pub coeffs: [i64; 3],
    pub height: u64,
    pub xi: BigReal,
    pub dist: BigReal,
    /// `−log dist / log H`, undefined at `H = 1`.
    pub gamma: Option<f64>,
}

/// Rejects algebraic θ that are rational or quadratic. Other kinds are
/// accepted as an assumption.
pub fn check_hypothesis(spec: &ThetaSpec, ctx: &RealCtx) -> Result<()> {
    let Some((f, k)) = spec.algebraic() else {
        return Ok(());
    };
    let f = f.squarefree();
    let violated = || Error::HypothesisViolated(format!("{spec} is rational or a quadratic irrational"));
    if f.degree().unwrap_or(0) <= 2 {
        return Err(violated());
    }
    let hi_ctx = RealCtx::new(ctx.precision_bits().max(512))?;
    let theta = spec.eval(&hi_ctx)?;
    let vals = [BigReal::one(), theta.clone(), hi_ctx.mul(&theta, &theta)];
    let Some(m) = find_relation(&vals, &hi_ctx) else {
        return Ok(());
    };
    let g = IntPoly::new(m.0.to_vec());
    let h = f.gcd(&g);
    if h.degree().unwrap_or(0) == 0 {
        return Ok(());
    }
    let root = f.real_roots().into_iter().nth(k).expect("validated root index");
    let hits = match &root {
        IsolatedRoot::Exact(q) => h.eval_rational(q).is_zero(),
        IsolatedRoot::Interval { lo, hi } => {
            let (a, b) = (h.eval_rational(lo), h.eval_rational(hi));
            a.is_zero() || b.is_zero() || a.signum() != b.signum()
        }
    };
    if hits {
        Err(violated())
    } else {
        Ok(())
    }
}

/// `L = (1, θ, θ²)`, `P = (0, 1, 2θ)`.
pub fn derivative_pair(theta: &ThetaSpec, ctx: &RealCtx) -> Result<(LinearForm, LinearForm)> {
    let f = Problem::derivative(theta.clone()).instantiate(ctx)?;
    Ok((f.l, f.p))
}

fn is_square(d: i128) -> bool {
    d >= 0 && {
        let s = (d as u128).sqrt();
        s * s == d as u128
    }
}

/// Canonical, primitive, and irreducible (or linear) with a real root.
fn admissible(a: [i64; 3]) -> bool {
    let [a0, a1, a2] = a;
    if a2 < 0 || (a2 == 0 && a1 <= 0) {
        return false;
    }
    if a0.gcd(&a1).gcd(&a2) != 1 {
        return false;
    }
    if a2 == 0 {
        return true;
    }
    let d = (a1 as i128) * (a1 as i128) - 4 * (a0 as i128) * (a2 as i128);
    d > 0 && !is_square(d)
}

fn height(a: [i64; 3]) -> u64 {
    a.iter().map(|v| v.unsigned_abs()).max().unwrap()
}

/// θ and θ² on a grid of `2^-k`, with the rounding error in units.
struct Fixed {
    k: u32,
    t1: i128,
    t2: i128,
    theta: f64,
}

impl Fixed {
    fn new(theta: &BigReal, h_max: u64, ctx: &RealCtx) -> Result<Fixed> {
        let t = theta.to_f64();
        let need = ((t.abs() + 1.0).powi(2) * 4.0 * h_max as f64).log2().ceil() as i64;
        let k = (118 - need).clamp(16, 100) as u32;
        let sq = ctx.mul(theta, theta);
        let conv = |v: &BigReal| -> Result<i128> {
            let sh = v.exp() + k as i64;
            let q = if sh >= 0 {
                v.mid() << sh as usize
            } else {
                let d = BigInt::from(1) << (-sh) as usize;
                (v.mid() + (&d >> 1usize)).div_floor(&d)
            };
            q.to_i128().ok_or_else(|| Error::InvalidArgument("theta too large for the scan".into()))
        };
        Ok(Fixed {
            k,
            t1: conv(theta)?,
            t2: conv(&sq)?,
            theta: t,
        })
    }

    fn unit(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    /// `−(a1·θ + a2·θ²)` in grid units.
    fn center(&self, a1: i64, a2: i64) -> i128 {
        -(a1 as i128 * self.t1 + a2 as i128 * self.t2)
    }

    /// Approximate distance from θ to the nearest root.
    fn dist(&self, a: [i64; 3]) -> f64 {
        let [a0, a1, a2] = a;
        let q = ((a0 as i128) << self.k) + a1 as i128 * self.t1 + a2 as i128 * self.t2;
        let q = q as f64 * self.unit();
        if a2 == 0 {
            return (q / a1 as f64).abs();
        }
        let dq = ((a1 as i128) << self.k) + 2 * a2 as i128 * self.t1;
        let dq = dq as f64 * self.unit();
        let d = (a1 as f64).powi(2) - 4.0 * a0 as f64 * a2 as f64;
        let s = if dq >= 0.0 { 1.0 } else { -1.0 };
        (2.0 * q / (dq + s * d.sqrt())).abs()
    }
}

/// Scans pairs with `0 ≤ a2 ≤ H`, `|a1| ≤ H` and `a0` within `radius(m)`
/// of the center, where `m = max(|a1|, a2)`. Calls `keep` on admissible
/// candidates.
fn scan<R, K>(fx: &Fixed, h_max: u64, radius: R, keep: K, workers: usize) -> Vec<(u64, [i64; 3], f64)>
where
    R: Fn(u64) -> f64 + Sync,
    K: Fn(u64, f64) -> bool + Sync,
{
    let h = h_max as i64;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    let per_a2: Vec<Vec<(u64, [i64; 3], f64)>> = pool.install(|| {
        (0..=h)
            .into_par_iter()
            .map(|a2| {
                let mut out = vec![];
                for a1 in -h..=h {
                    let m = a1.unsigned_abs().max(a2 as u64);
                    let c = fx.center(a1, a2) as f64 * fx.unit();
                    let r = radius(m);
                    let lo = if r.is_finite() { (c - r).floor().max(-h as f64) as i64 } else { -h };
                    let hi = if r.is_finite() { (c + r).ceil().min(h as f64) as i64 } else { h };
                    for a0 in lo..=hi {
                        let a = [a0, a1, a2];
                        if !admissible(a) {
                            continue;
                        }
                        let ht = height(a);
                        let d = fx.dist(a);
                        if keep(ht, d) {
                            out.push((ht, a, d));
                        }
                    }
                }
                out
            })
            .collect()
    });
    per_a2.into_iter().flatten().collect()
}

/// Certified `(ξ, |θ − ξ|)` for an admissible polynomial.
fn certify(a: [i64; 3], theta: &BigReal, ctx: &RealCtx) -> Result<(BigReal, BigReal)> {
    let [a0, a1, a2] = a.map(BigInt::from);
    let q = ctx.add(&ctx.add(&BigReal::from_int(a0.clone()), &ctx.mul_int(theta, &a1)), &ctx.mul_int(&ctx.mul(theta, theta), &a2));
    let e = if a2.is_zero() {
        ctx.div(&q, &BigReal::from_int(a1.clone()))?.neg()
    } else {
        let dq = ctx.add(&BigReal::from_int(a1.clone()), &ctx.mul_int(theta, &(BigInt::from(2) * &a2)));
        let disc = &a1 * &a1 - BigInt::from(4) * &a0 * &a2;
        let sq = ctx.sqrt(&BigReal::from_int(disc))?;
        let den = match dq.sign() {
            Sign::Negative => ctx.sub(&dq, &sq),
            _ => ctx.add(&dq, &sq),
        };
        ctx.div(&ctx.mul_int(&q, &BigInt::from(-2)), &den)?
    };
    Ok((ctx.add(theta, &e), e.abs()))
}

/// Record-breaking approximants with height at most `h_max`.
pub fn enumerate_approximants(
    spec: &ThetaSpec,
    h_max: u64,
    ctx: &RealCtx,
    workers: usize,
) -> Result<Vec<QuadraticApproximant>> {
    if h_max == 0 {
        return Err(Error::InvalidArgument("H_max must be at least 1".into()));
    }
    check_hypothesis(spec, ctx)?;
    let theta = spec.eval(ctx)?;
    let fx = Fixed::new(&theta, h_max, ctx)?;

    // pass 1: narrow window, running minimum per height
    let first = scan(&fx, h_max, |_| 2.0, |_, _| true, workers);
    let mut best_at = vec![f64::INFINITY; h_max as usize + 1];
    for (h, _, d) in &first {
        let slot = &mut best_at[*h as usize];
        *slot = slot.min(*d);
    }
    // prev[h]: best distance over heights below h
    let mut prev = vec![f64::INFINITY; h_max as usize + 2];
    for h in 1..=h_max as usize {
        prev[h + 1] = prev[h].min(best_at[h]);
    }
    let bound = |h: usize| -> f64 {
        let d = prev[h];
        if d.is_finite() {
            (h as f64 * (1.0 + 2.0 * fx.theta.abs() + 3.0 * d) * d) * 1.01 + 1e-9
        } else {
            f64::INFINITY
        }
    };
    let mut from = vec![0f64; h_max as usize + 2];
    for h in (1..=h_max as usize).rev() {
        from[h] = bound(h).max(from[h + 1]);
    }
    let radius = |m: u64| from[(m.max(1)) as usize];
    let keep = |h: u64, d: f64| d <= prev[h as usize] * (1.0 + 1e-6);
    let mut cands = scan(&fx, h_max, radius, keep, workers);
    cands.sort_by_key(|x| (x.0, x.1));

    ctx.escalate(DEFAULT_PRECISION_CAP, |c| {
        let theta = spec.eval(c)?;
        let mut best: Option<BigReal> = None;
        let mut out = vec![];
        for (h, a, _) in &cands {
            let (xi, dist) = certify(*a, &theta, c)?;
            let better = match &best {
                None => true,
                Some(b) => match dist.cmp_certified(b) {
                    Some(Ordering::Less) => true,
                    Some(_) => false,
                    None => {
                        return Err(Error::UndecidableComparison {
                            height: h.to_string(),
                            cap: c.precision_bits(),
                        })
                    }
                },
            };
            if better {
                let gamma = (*h >= 2).then(|| -dist.ln_abs() / (*h as f64).ln());
                best = Some(dist.clone());
                out.push(QuadraticApproximant {
                    coeffs: *a,
                    height: *h,
                    xi,
                    dist,
                    gamma,
                });
            }
        }
        Ok(out)
    })
}

/// Running maximum of gamma over records with `H ≥ 2`.
pub fn estimate_omega_star(records: &[QuadraticApproximant]) -> Result<ExponentEstimate> {
    let samples: Vec<(usize, f64)> = records
        .iter()
        .filter_map(|r| r.gamma.map(|g| (r.height as usize, g)))
        .collect();
    if samples.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: samples.len() });
    }
    let value = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentEstimate {
        kind: EstimateKind::QuadraticStar,
        value,
        window: (samples[0].0, samples[samples.len() - 1].0),
        trend: trend_of(&samples),
        samples,
        skipped: records.len() - records.iter().filter(|r| r.gamma.is_some()).count(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub omega_star: f64,
    pub omega_lp: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `ω* ≥ ω_LP − slack`.
pub fn check_diff(omega_star: f64, omega_lp: f64, slack: f64) -> DiffReport {
    DiffReport {
        omega_star,
        omega_lp,
        slack,
        holds: omega_star >= omega_lp - slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::IntVec;

    fn ctx() -> RealCtx {
        RealCtx::default()
    }

    fn cbrt2() -> ThetaSpec {
        ThetaSpec::Cbrt(2.into())
    }

    /// All admissible triples of height ≤ h, scored in f64 by direct root
    /// formulas, including reducible quadratics; record dists in (H, lex).
    fn brute(theta: f64, h: i64) -> Vec<(u64, f64)> {
        let mut all = vec![];
        for a2 in 0..=h {
            for a1 in -h..=h {
                for a0 in -h..=h {
                    let a = [a0, a1, a2];
                    if a2 < 0 || (a2 == 0 && a1 <= 0) || a0.gcd(&a1).gcd(&a2) != 1 {
                        continue;
                    }
                    let d = if a2 == 0 {
                        (theta + a0 as f64 / a1 as f64).abs()
                    } else {
                        let disc = (a1 * a1 - 4 * a0 * a2) as f64;
                        if disc < 0.0 {
                            continue;
                        }
                        let r = disc.sqrt();
                        let x1 = (-a1 as f64 + r) / (2.0 * a2 as f64);
                        let x2 = (-a1 as f64 - r) / (2.0 * a2 as f64);
                        (theta - x1).abs().min((theta - x2).abs())
                    };
                    all.push((height(a), a, d));
                }
            }
        }
        all.sort_by_key(|x| (x.0, x.1));
        let mut best = f64::INFINITY;
        let mut out = vec![];
        for (ht, _, d) in all {
            if d < best * (1.0 - 1e-12) {
                best = d;
                out.push((ht, d));
            }
        }
        out
    }

    #[test]
    fn height_one() {
        let r = enumerate_approximants(&cbrt2(), 1, &ctx(), 1).unwrap();
        let last = r.last().unwrap();
        assert_eq!(last.coeffs, [-1, 1, 0]);
        assert!((last.dist.to_f64() - (2f64.cbrt() - 1.0)).abs() < 1e-15);
        assert_eq!(last.gamma, None);
    }

    #[test]
    fn quadratic_theta_rejected() {
        let sqrt2: ThetaSpec = "poly:[-2,0,1]@1".parse().unwrap();
        assert!(matches!(enumerate_approximants(&sqrt2, 10, &ctx(), 1), Err(Error::HypothesisViolated(_))));
        // x³ − x² − 2x + 2 = (x − 1)(x² − 2): roots −√2, 1, √2
        for k in 0..3 {
            let spec = ThetaSpec::Poly { coeffs: [2, -2, -1, 1].map(BigInt::from).to_vec(), root: k };
            assert!(check_hypothesis(&spec, &ctx()).is_err(), "root {k}");
        }
        let cube: ThetaSpec = "cbrt:8".parse().unwrap();
        assert!(check_hypothesis(&cube, &ctx()).is_err());
        assert!(check_hypothesis(&cbrt2(), &ctx()).is_ok());
        // x³ − 2 times (x² − 3): the real cube root keeps the hypothesis
        let spec = ThetaSpec::Poly { coeffs: [6, 0, -2, -3, 0, 1].map(BigInt::from).to_vec(), root: 1 };
        let root = spec.eval(&ctx()).unwrap().to_f64();
        assert!((root - 2f64.cbrt()).abs() < 1e-12);
        assert!(check_hypothesis(&spec, &ctx()).is_ok());
    }

    #[test]
    fn matches_brute_force() {
        for spec in [cbrt2(), ThetaSpec::Random(1), ThetaSpec::Random(3)] {
            let t = spec.eval(&ctx()).unwrap().to_f64();
            let got: Vec<(u64, f64)> = enumerate_approximants(&spec, 50, &ctx(), 2)
                .unwrap()
                .iter()
                .map(|r| (r.height, r.dist.to_f64()))
                .collect();
            let want = brute(t, 50);
            assert_eq!(got.len(), want.len(), "{spec}");
            for (g, w) in got.iter().zip(want.iter()) {
                assert_eq!(g.0, w.0);
                assert!((g.1 - w.1).abs() <= 1e-9 * w.1, "{g:?} {w:?}");
            }
        }
    }

    #[test]
    fn records_and_roots_are_sound() {
        let c = ctx();
        let recs = enumerate_approximants(&cbrt2(), 200, &c, 4).unwrap();
        let theta = cbrt2().eval(&c).unwrap();
        let (l, p) = derivative_pair(&cbrt2(), &c).unwrap();
        for w in recs.windows(2) {
            assert_eq!(w[1].dist.cmp_certified(&w[0].dist), Some(Ordering::Less));
            assert!(w[1].height >= w[0].height);
        }
        for r in &recs {
            let poly = IntPoly::from_i64(&r.coeffs);
            assert!(poly.eval_real(&r.xi, &c).contains_zero());
            if r.height >= 10 {
                let x = IntVec::new(r.coeffs[0], r.coeffs[1], r.coeffs[2]);
                let ratio = l.eval(&x, &c).abs().to_f64() / (r.dist.to_f64() * p.eval(&x, &c).abs().to_f64());
                let cbound = if r.coeffs[2] == 0 {
                    1.0 + 1e-9
                } else {
                    let [a0, a1, a2] = r.coeffs;
                    let sep = ((a1 * a1 - 4 * a0 * a2) as f64).sqrt() / a2 as f64;
                    sep / (sep - 2.0 * r.dist.to_f64())
                };
                assert!(ratio <= cbound && ratio >= 1.0 / cbound, "{:?} {ratio} {cbound}", r.coeffs);
            }
        }
        assert!(recs.last().unwrap().gamma.unwrap() >= 2.0);
        let _ = theta;
    }

    #[test]
    fn workers_do_not_change_records() {
        let a = enumerate_approximants(&ThetaSpec::Random(2), 150, &ctx(), 1).unwrap();
        let b = enumerate_approximants(&ThetaSpec::Random(2), 150, &ctx(), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn omega_star_estimates() {
        let c = ctx();
        let mk = |h: u64| {
            let d = (h as f64).powi(-3);
            QuadraticApproximant {
                coeffs: [0, 1, 0],
                height: h,
                xi: BigReal::zero(),
                dist: c.from_rational(&num_rational::BigRational::new(1.into(), BigInt::from(h * h * h))),
                gamma: Some(-d.ln() / (h as f64).ln()),
            }
        };
        let e = estimate_omega_star(&[mk(2), mk(5), mk(9)]).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12);
        assert!(estimate_omega_star(&[mk(2)]).is_err());
        assert!(check_diff(5.0, 3.0, 0.0).holds);
        assert!(check_diff(3.0, 3.0, 0.0).holds);
        assert!(!check_diff(2.0, 3.0, 0.5).holds);
    }

    #[test]
    fn derivative_pairs() {
        let (l, p) = derivative_pair(&ThetaSpec::Decimal("0".into()), &ctx()).unwrap();
        assert_eq!(l, LinearForm::from_ints([1, 0, 0]));
        assert_eq!(p, LinearForm::from_ints([0, 1, 0]));
        let (l, p) = derivative_pair(&cbrt2(), &ctx()).unwrap();
        let f = crate::forms::default_f(&l, &p, &ctx()).unwrap().0;
        assert!(crate::forms::coefficient_det(&l, &p, &f, &ctx()).nonzero);
        let one = Problem::derivative(ThetaSpec::Decimal("1".into()));
        assert!(derivative_pair(&ThetaSpec::Decimal("1".into()), &ctx()).is_ok());
        assert!(one.independence_warning(&ctx()).unwrap().is_some());
    }
}
