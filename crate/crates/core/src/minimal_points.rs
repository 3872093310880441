//! Minimal points (best approximations) of L up to a height bound.
//!
//! The main path walks from one minimal point to the next: the successor of
//! `x_ν` is the vector of least norm with `|L(x)| < L_ν`. Candidates are
//! found exactly by lattice enumeration on `w·|x|² + (C·x)²`, where `C` is L
//! scaled to integers, after LLL. The oracle is a plain scan in fixed point.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{Forms, IntVec, NormKind, Problem};
use crate::numeric::{BigReal, RealCtx, Sign, DEFAULT_PRECISION_CAP};
use crate::reduce::{self, Row, SkewForm};

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalPointRecord {
    pub nu: usize,
    pub x: IntVec,
    /// Norm of `x`: an exact integer for sup, a sqrt enclosure for Euclid.
    pub norm: BigReal,
    pub l: BigReal,
    pub p: BigReal,
    pub f: BigReal,
}

impl MinimalPointRecord {
    pub fn err_bits(&self) -> Option<i64> {
        [&self.l, &self.p, &self.f].iter().filter_map(|v| v.err_bits()).min()
    }
}

#[derive(Debug, Clone)]
pub struct MinimalSequence {
    pub problem: Problem,
    pub norm: NormKind,
    pub t_reached: u64,
    pub forms: Forms,
    pub records: Vec<MinimalPointRecord>,
    /// Exact coincidences broken lexicographically.
    pub ties: Vec<String>,
    /// Set when a vector with `L = 0` ends the sequence early.
    pub terminated: Option<String>,
}

impl MinimalSequence {
    pub fn precision_bits(&self) -> u32 {
        self.forms.ctx.precision_bits()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn vectors(&self) -> Vec<IntVec> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub workers: usize,
    pub precision_cap: u32,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            workers: 1,
            precision_cap: DEFAULT_PRECISION_CAP,
        }
    }
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

/// Sign-normalized record for `x`, or `None` when `L(x)` is exactly zero.
fn make_record(forms: &Forms, norm: NormKind, nu: usize, x: &IntVec) -> Result<Option<MinimalPointRecord>> {
    let ctx = &forms.ctx;
    let l = forms.l.eval(x, ctx);
    let x = match l.sign() {
        Sign::Positive => x.clone(),
        Sign::Negative => x.neg(),
        Sign::ZeroIndeterminate if l.is_exact() => return Ok(None),
        Sign::ZeroIndeterminate => {
            return Err(Error::UndecidableComparison {
                height: norm.key(x).to_string(),
                cap: ctx.precision_bits(),
            })
        }
    };
    Ok(Some(MinimalPointRecord {
        nu,
        norm: norm.value(&x, ctx),
        l: forms.l.eval(&x, ctx),
        p: forms.p.eval(&x, ctx),
        f: forms.f.eval(&x, ctx),
        x,
    }))
}

fn undecidable(x: &IntVec, norm: NormKind, ctx: &RealCtx) -> Error {
    Error::UndecidableComparison {
        height: norm.key(x).to_string(),
        cap: ctx.precision_bits(),
    }
}

fn norm_one_vectors(norm: NormKind) -> Vec<IntVec> {
    let mut out = vec![];
    for a in -1i64..=1 {
        for b in -1i64..=1 {
            for c in -1i64..=1 {
                let v = IntVec::new(a, b, c);
                if upper_half(&v) && (norm == NormKind::Sup || v.euclid_sq().is_one()) {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// One representative of each pair `±x`: first nonzero component positive.
fn upper_half(x: &IntVec) -> bool {
    x.0.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_positive())
}

/// Picks the best among same-key candidates: least `|L|`, then lex order.
fn best_of(
    cands: Vec<(IntVec, BigReal)>,
    norm: NormKind,
    ctx: &RealCtx,
    ties: &mut Vec<String>,
) -> Result<Option<(IntVec, BigReal)>> {
    let mut best: Option<(IntVec, BigReal)> = None;
    for (x, l) in cands {
        best = Some(match best {
            None => (x, l),
            Some((bx, bl)) => match l.abs().cmp_certified(&bl.abs()) {
                Some(Ordering::Less) => (x, l),
                Some(Ordering::Greater) => (bx, bl),
                Some(Ordering::Equal) => {
                    let (nx, nbx) = (normalized(&x, &l), normalized(&bx, &bl));
                    if nx == nbx {
                        (bx, bl)
                    } else {
                        ties.push(format!("{nbx} ~ {nx} at norm key {}", norm.key(&x)));
                        if nx < nbx {
                            (x, l)
                        } else {
                            (bx, bl)
                        }
                    }
                }
                None => return Err(undecidable(&x, norm, ctx)),
            },
        });
    }
    Ok(best)
}

fn normalized(x: &IntVec, l: &BigReal) -> IntVec {
    if l.sign() == Sign::Negative {
        x.neg()
    } else {
        x.clone()
    }
}

/// `C = round(c·2^s)` and a rational bound on `|C − c·2^s|`.
fn scaled(c: &BigReal, s: i64) -> (BigInt, BigRational) {
    let sh = c.exp() + s;
    let two = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(BigInt::one() << k as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
        }
    };
    let exact = BigRational::from_integer(c.mid().clone()) * two(sh);
    let rounded = exact.round().to_integer();
    let rad = BigRational::from_integer(BigInt::from(c.rad().clone())) * two(sh);
    let err = (BigRational::from_integer(rounded.clone()) - exact).abs() + rad;
    (rounded, err)
}

struct Walker<'a> {
    forms: &'a Forms,
    norm: NormKind,
    t: u64,
    s: i64,
    c: Row,
    c_err: BigRational,
    basis: [Row; 3],
    pool: rayon::ThreadPool,
    ties: Vec<String>,
}

enum Search {
    Found(IntVec),
    Empty,
    Overflow,
}

const ENUM_LIMIT: usize = 200_000;

impl<'a> Walker<'a> {
    fn new(forms: &'a Forms, norm: NormKind, t: u64, workers: usize) -> Self {
        let s = forms.ctx.precision_bits() as i64;
        let parts: Vec<(BigInt, BigRational)> = forms.l.coeffs.iter().map(|c| scaled(c, s)).collect();
        let c_err = parts.iter().map(|p| p.1.clone()).max().unwrap();
        Walker {
            forms,
            norm,
            t,
            s,
            c: [parts[0].0.clone(), parts[1].0.clone(), parts[2].0.clone()],
            c_err,
            basis: reduce::identity(),
            pool: pool(workers),
            ties: vec![],
        }
    }

    fn first(&mut self) -> Result<Option<IntVec>> {
        let ctx = &self.forms.ctx;
        let cands: Vec<(IntVec, BigReal)> = norm_one_vectors(self.norm)
            .into_iter()
            .map(|x| {
                let l = self.forms.l.eval(&x, ctx);
                (x, l)
            })
            .collect();
        Ok(best_of(cands, self.norm, ctx, &mut self.ties)?.map(|(x, _)| x))
    }

    /// Least-norm vector with key in `(floor_key, key(r)]` and `|L| < l_cur`.
    fn search(&mut self, r: u64, floor_key: &BigInt, l_cur: &BigReal) -> Result<Search> {
        let ctx = self.forms.ctx;
        let r_big = BigInt::from(r);
        let key_cap = self.norm.bound_key(&r_big);
        // Euclidean radius bound rho (rho² exact, rho_lin ≥ rho)
        let (rho_sq, rho_lin) = match self.norm {
            NormKind::Euclid => (&r_big * &r_big, r_big.clone()),
            NormKind::Sup => (BigInt::from(3) * &r_big * &r_big, BigInt::from(2) * &r_big),
        };
        let two_s = BigRational::from_integer(BigInt::one() << self.s as usize);
        let slack = &self.c_err * BigRational::from_integer(BigInt::from(2) * &rho_lin);
        let m = (l_cur.upper().abs() * &two_s + slack).ceil().to_integer();
        let w = (&m * &m).div_floor(&rho_sq).max(BigInt::one());
        let form = SkewForm { w, c: self.c.clone() };
        let bound = &form.w * &rho_sq + &m * &m;
        reduce::lll(&mut self.basis, &form);
        let Some(found) = reduce::enumerate(&self.basis, &form, &bound, ENUM_LIMIT) else {
            return Ok(Search::Overflow);
        };
        let norm = self.norm;
        let pre: Vec<IntVec> = found
            .into_iter()
            .filter(|x| {
                let k = norm.key(x);
                upper_half(x) && &k > floor_key && k <= key_cap
            })
            .collect();
        let l_form = &self.forms.l;
        let l_abs = l_cur.abs();
        let evaluated: Vec<Result<Option<(IntVec, BigReal)>>> = self.pool.install(|| {
            pre.par_iter()
                .map(|x| {
                    let l = l_form.eval(x, &ctx);
                    match l.abs().cmp_certified(&l_abs) {
                        Some(Ordering::Less) => Ok(Some((x.clone(), l))),
                        Some(_) => Ok(None),
                        None => Err(undecidable(x, norm, &ctx)),
                    }
                })
                .collect()
        });
        let mut hits = vec![];
        for e in evaluated {
            if let Some(h) = e? {
                hits.push(h);
            }
        }
        let Some(min_key) = hits.iter().map(|(x, _)| norm.key(x)).min() else {
            return Ok(Search::Empty);
        };
        let mut same: Vec<(IntVec, BigReal)> = hits.into_iter().filter(|(x, _)| norm.key(x) == min_key).collect();
        same.sort_by(|a, b| a.0.cmp(&b.0));
        let best = best_of(same, norm, &ctx, &mut self.ties)?;
        Ok(best.map_or(Search::Empty, |(x, _)| Search::Found(x)))
    }

    /// Successor of the record `(x, l)`, or `None` when it lies beyond `T`.
    fn next(&mut self, x: &IntVec, l: &BigReal) -> Result<Option<IntVec>> {
        let key = self.norm.key(x);
        let cur = match self.norm {
            NormKind::Euclid => key.sqrt() + 1u32,
            NormKind::Sup => key.clone(),
        }
        .to_u64()
        .unwrap_or(u64::MAX);
        if cur >= self.t && self.norm.bound_key(&BigInt::from(self.t)) <= key {
            return Ok(None);
        }
        let mut lo = cur;
        let mut r = cur.saturating_mul(2).max(2).min(self.t);
        loop {
            match self.search(r, &key, l)? {
                Search::Found(v) => return Ok(Some(v)),
                Search::Empty => {
                    if r >= self.t {
                        return Ok(None);
                    }
                    lo = r;
                    r = r.saturating_mul(2).min(self.t);
                }
                Search::Overflow => {
                    if r <= lo + 1 {
                        return Err(Error::Undecidable(format!("too many candidates near height {r}")));
                    }
                    r = lo + (r - lo) / 2;
                }
            }
        }
    }
}

/// One enumeration attempt at a fixed precision. On failure returns the
/// certified prefix alongside the error.
fn attempt(
    problem: &Problem,
    norm: NormKind,
    t: u64,
    ctx: &RealCtx,
    workers: usize,
    resume: &[IntVec],
) -> std::result::Result<MinimalSequence, (Option<MinimalSequence>, Error)> {
    let forms = problem.instantiate(ctx).map_err(|e| (None, e))?;
    let mut seq = MinimalSequence {
        problem: problem.clone(),
        norm,
        t_reached: 0,
        forms: forms.clone(),
        records: vec![],
        ties: vec![],
        terminated: None,
    };
    let mut walker = Walker::new(&forms, norm, t, workers);
    macro_rules! bail {
        ($e:expr) => {{
            let e = $e;
            seq.ties = walker.ties.clone();
            seq.t_reached = seq.records.last().map_or(0, |r| floor_norm(norm, &r.x));
            return Err((Some(seq), e));
        }};
    }
    let mut next = if resume.is_empty() {
        match walker.first() {
            Ok(v) => v,
            Err(e) => bail!(e),
        }
    } else {
        for x in resume {
            match make_record(&forms, norm, seq.records.len() + 1, x) {
                Ok(Some(r)) => seq.records.push(r),
                Ok(None) => bail!(Error::CacheMismatch(format!("cached vector {x} has L = 0"))),
                Err(e) => bail!(e),
            }
        }
        let last = seq.records.last().unwrap().clone();
        match walker.next(&last.x, &last.l) {
            Ok(v) => v,
            Err(e) => bail!(e),
        }
    };
    while let Some(x) = next.take() {
        if floor_norm(norm, &x) > t && norm.bound_key(&BigInt::from(t)) < norm.key(&x) {
            break;
        }
        match make_record(&forms, norm, seq.records.len() + 1, &x) {
            Ok(Some(r)) => {
                next = match walker.next(&r.x, &r.l) {
                    Ok(v) => v,
                    Err(e) => {
                        seq.records.push(r);
                        bail!(e)
                    }
                };
                seq.records.push(r);
            }
            Ok(None) => {
                seq.terminated = Some(format!("L vanishes at {x}"));
                break;
            }
            Err(e) => bail!(e),
        }
    }
    seq.ties = walker.ties;
    seq.t_reached = t;
    Ok(seq)
}

fn floor_norm(norm: NormKind, x: &IntVec) -> u64 {
    let k = norm.key(x);
    match norm {
        NormKind::Euclid => k.sqrt(),
        NormKind::Sup => k,
    }
    .to_u64()
    .unwrap_or(u64::MAX)
}

/// Enumerates every minimal point with norm at most `t`, escalating
/// precision on undecidable comparisons. `resume` seeds the walk with known
/// leading minimal points. On a final failure the certified prefix is
/// returned alongside the error.
pub fn enumerate_partial(
    problem: &Problem,
    norm: NormKind,
    t: u64,
    ctx: &RealCtx,
    opts: EnumOptions,
    resume: &[IntVec],
) -> (Option<MinimalSequence>, Option<Error>) {
    if t == 0 {
        return (None, Some(Error::InvalidArgument("T must be at least 1".into())));
    }
    let mut ctx = *ctx;
    loop {
        match attempt(problem, norm, t, &ctx, opts.workers, resume) {
            Ok(seq) => return (Some(seq), None),
            Err((partial, e)) => {
                if e.is_precision_failure() && ctx.precision_bits() * 2 <= opts.precision_cap {
                    ctx = ctx.doubled();
                    continue;
                }
                return (partial, Some(e));
            }
        }
    }
}

pub fn enumerate_minimal_points(
    problem: &Problem,
    norm: NormKind,
    t: u64,
    ctx: &RealCtx,
    opts: EnumOptions,
) -> Result<MinimalSequence> {
    match enumerate_partial(problem, norm, t, ctx, opts, &[]) {
        (Some(seq), None) => Ok(seq),
        (_, Some(e)) => Err(e),
        (None, None) => unreachable!(),
    }
}

/// `gamma_j = −log L_j / log X_{j+1}` for each consecutive pair.
pub fn gamma_ratios(seq: &MinimalSequence) -> Vec<(usize, f64)> {
    seq.records
        .windows(2)
        .map(|w| (w[0].nu, -w[0].l.ln_abs() / w[1].norm.ln_abs()))
        .collect()
}

// ---------------------------------------------------------------------------
// Oracle: scan of every (x1, x2) in a half plane with the two best x0, in
// i128 fixed point with explicit error units.

#[derive(Debug, Clone)]
struct Entry {
    v: i128,
    err: i128,
    x: [i64; 3],
}

fn cmp_entries(a: &Entry, b: &Entry) -> std::result::Result<Ordering, ()> {
    if a.x == b.x {
        return Ok(Ordering::Equal);
    }
    let d = a.v - b.v;
    if d.abs() > a.err + b.err {
        Ok(d.cmp(&0))
    } else if a.err == 0 && b.err == 0 && d == 0 {
        Ok(Ordering::Equal)
    } else {
        Err(())
    }
}

#[derive(Default)]
struct Frontier {
    pts: BTreeMap<i128, Entry>,
}

impl Frontier {
    fn insert(&mut self, key: i128, e: Entry) -> std::result::Result<(), ()> {
        if let Some(old) = self.pts.get(&key) {
            match cmp_entries(&e, old)? {
                Ordering::Less => {}
                Ordering::Equal if e.x < old.x => {}
                _ => return Ok(()),
            }
        } else if let Some((_, prev)) = self.pts.range(..key).next_back() {
            if cmp_entries(prev, &e)? != Ordering::Greater {
                return Ok(());
            }
        }
        let mut drop = vec![];
        for (k, later) in self.pts.range(key + 1..) {
            if cmp_entries(later, &e)? != Ordering::Less {
                drop.push(*k);
            } else {
                break;
            }
        }
        for k in drop {
            self.pts.remove(&k);
        }
        self.pts.insert(key, e);
        Ok(())
    }
}

/// `round(c·2^k)` and its error in grid units (zero when exact).
fn fixed(c: &BigReal, k: u32) -> Result<(i128, i128)> {
    let sh = c.exp() + k as i64;
    let (v, exact) = if sh >= 0 {
        (c.mid() << sh as usize, true)
    } else {
        let d = BigInt::one() << (-sh) as usize;
        let (q, r) = (c.mid() + (&d >> 1usize)).div_mod_floor(&d);
        (q, r == (&d >> 1usize))
    };
    let v = v
        .to_i128()
        .ok_or_else(|| Error::InvalidArgument("coefficient too large for the oracle".into()))?;
    if exact && c.is_exact() {
        return Ok((v, 0));
    }
    let rad = c.err_f64() * (k as f64).exp2();
    Ok((v, 1 + rad.ceil() as i128))
}

/// Independent brute-force enumeration for small `t` (quadratic cost).
pub fn brute_force_oracle(
    problem: &Problem,
    norm: NormKind,
    t: u64,
    ctx: &RealCtx,
    workers: usize,
) -> Result<MinimalSequence> {
    if t == 0 || t > 100_000 {
        return Err(Error::InvalidArgument("oracle needs 1 <= T <= 1e5".into()));
    }
    let forms = problem.instantiate(ctx)?;
    if forms.l.coeffs[0] != BigReal::one() {
        return Err(Error::InvalidArgument("oracle needs L = x0 + ...".into()));
    }
    let c1f = forms.l.coeffs[1].to_f64().abs();
    let c2f = forms.l.coeffs[2].to_f64().abs();
    let scale_bits = ((c1f + c2f + 1.0) * 3.0 * t as f64).log2().ceil() as i64;
    let k = (120 - scale_bits).clamp(8, 110) as u32;
    let (th1, e1) = fixed(&forms.l.coeffs[1], k)?;
    let (th2, e2) = fixed(&forms.l.coeffs[2], k)?;
    let ti = t as i64;
    let key_of = |x: &[i64; 3]| -> i128 {
        match norm {
            NormKind::Euclid => x.iter().map(|&v| (v as i128) * (v as i128)).sum(),
            NormKind::Sup => x.iter().map(|v| v.unsigned_abs() as i128).max().unwrap(),
        }
    };
    let t_key: i128 = match norm {
        NormKind::Euclid => (ti as i128) * (ti as i128),
        NormKind::Sup => ti as i128,
    };
    let one = 1i128 << k;

    let scan_row = |x1: i64| -> std::result::Result<Frontier, ()> {
        let mut fr = Frontier::default();
        let x2_lo = if x1 == 0 { 0 } else { -ti };
        for x2 in x2_lo..=ti {
            if key_of(&[0, x1, x2]) > t_key {
                continue;
            }
            let err = e1 * x1.unsigned_abs() as i128 + e2 * x2.unsigned_abs() as i128;
            if x1 == 0 && x2 == 0 {
                fr.insert(1, Entry { v: one, err: 0, x: [1, 0, 0] })?;
                continue;
            }
            let c = x1 as i128 * th1 + x2 as i128 * th2;
            let base = (-c) >> k;
            for x0 in [base, base + 1] {
                let x0 = x0 as i64;
                let x = [x0, x1, x2];
                let key = key_of(&x);
                if key > t_key {
                    continue;
                }
                let raw = x0 as i128 * one + c;
                let x = if raw < 0 { [-x[0], -x[1], -x[2]] } else { x };
                fr.insert(key, Entry { v: raw.abs(), err, x })?;
            }
        }
        Ok(fr)
    };
    let rows: Vec<std::result::Result<Frontier, ()>> = pool(workers).install(|| (0..=ti).into_par_iter().map(scan_row).collect());
    let mut all = Frontier::default();
    for fr in rows {
        let fr = fr.map_err(|_| Error::UndecidableComparison {
            height: t.to_string(),
            cap: ctx.precision_bits(),
        })?;
        for (key, e) in fr.pts {
            all.insert(key, e).map_err(|_| Error::UndecidableComparison {
                height: key.to_string(),
                cap: ctx.precision_bits(),
            })?;
        }
    }
    let mut records = vec![];
    let mut terminated = None;
    for e in all.pts.values() {
        let x = IntVec::new(e.x[0], e.x[1], e.x[2]);
        match make_record(&forms, norm, records.len() + 1, &x)? {
            Some(r) => records.push(r),
            None => {
                terminated = Some(format!("L vanishes at {x}"));
                break;
            }
        }
    }
    Ok(MinimalSequence {
        problem: problem.clone(),
        norm,
        t_reached: t,
        forms,
        records,
        ties: vec![],
        terminated,
    })
}
