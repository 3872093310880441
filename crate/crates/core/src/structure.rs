//! Triples of consecutive minimal points: dependency, recursion
//! coefficients, Δ_j, the Wronskian and Jarník ratios.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{det3_rows, IntVec, LinearForm};
use crate::minimal_points::MinimalSequence;
use crate::numeric::{BigReal, RealCtx, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TripleKind {
    Dependent,
    Independent,
}

/// Triple `(x_{j−1}, x_j, x_{j+1})`. When dependent,
/// `x_{j+1} = t·x_j + sign·x_{j−1}` exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleClass {
    pub j: usize,
    pub kind: TripleKind,
    #[serde(serialize_with = "ser_big")]
    pub det3: BigInt,
    #[serde(serialize_with = "ser_opt_big")]
    pub t: Option<BigInt>,
    pub sign: Option<i8>,
}

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_opt_big<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Exact `(a, b)` with `w = a·u + b·v`, or `None` when `w` is outside the
/// integer span of `u, v` (or `u, v` are dependent).
pub fn lattice_coords(u: &IntVec, v: &IntVec, w: &IntVec) -> Option<(BigInt, BigInt)> {
    for (p, q) in [(0, 1), (0, 2), (1, 2)] {
        let d = &u.0[p] * &v.0[q] - &u.0[q] * &v.0[p];
        if d.is_zero() {
            continue;
        }
        let an = &w.0[p] * &v.0[q] - &w.0[q] * &v.0[p];
        let bn = &u.0[p] * &w.0[q] - &u.0[q] * &w.0[p];
        let (a, ra) = an.div_rem(&d);
        let (b, rb) = bn.div_rem(&d);
        if !ra.is_zero() || !rb.is_zero() {
            return None;
        }
        return (u.scale(&a).add(&v.scale(&b)) == *w).then_some((a, b));
    }
    None
}

pub fn classify_triples(seq: &MinimalSequence) -> Result<Vec<TripleClass>> {
    classify_vectors(&seq.vectors())
}

/// Same as [`classify_triples`] on a bare list of vectors; `j` is 1-based.
pub fn classify_vectors(xs: &[IntVec]) -> Result<Vec<TripleClass>> {
    let mut out = vec![];
    for j in 2..xs.len() {
        let (a, b, c) = (&xs[j - 2], &xs[j - 1], &xs[j]);
        let det3 = a.det3(b, c);
        if !det3.is_zero() {
            out.push(TripleClass {
                j,
                kind: TripleKind::Independent,
                det3,
                t: None,
                sign: None,
            });
            continue;
        }
        let (t, s) = lattice_coords(b, a, c)
            .ok_or_else(|| Error::RunIntegrity(format!("x_{} not an integer combination of x_{}, x_{}", j + 1, j, j - 1)))?;
        if s.abs() != BigInt::from(1) {
            return Err(Error::RunIntegrity(format!("coefficient of x_{} at j={j} is {s}, not ±1", j - 1)));
        }
        out.push(TripleClass {
            j,
            kind: TripleKind::Dependent,
            det3,
            t: Some(t),
            sign: Some(if s.is_positive() { 1 } else { -1 }),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependentRun {
    pub nu: usize,
    pub k: usize,
    pub lattice_basis: [[String; 3]; 2],
    /// False for the trailing run that has not met a closing independent
    /// triple within the enumerated range.
    pub closed: bool,
}

/// Runs between consecutive independent triples, with exact membership of
/// every `x_j`, `nu ≤ j ≤ k`, in the lattice spanned by `x_nu, x_{nu+1}`.
pub fn segment_runs(xs: &[IntVec], classes: &[TripleClass]) -> Result<Vec<DependentRun>> {
    if classes.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let starts: Vec<usize> = classes.iter().filter(|c| c.kind == TripleKind::Independent).map(|c| c.j).collect();
    let mut runs = vec![];
    for (i, &nu) in starts.iter().enumerate() {
        let (k, closed) = match starts.get(i + 1) {
            Some(&k) => (k, true),
            None if nu < xs.len() => (xs.len(), false),
            None => continue,
        };
        let (u, v) = (&xs[nu - 1], &xs[nu]);
        for j in nu..=k {
            if lattice_coords(u, v, &xs[j - 1]).is_none() {
                return Err(Error::RunIntegrity(format!("x_{j} outside the lattice of run starting at {nu}")));
            }
        }
        if closed || k > nu {
            runs.push(DependentRun {
                nu,
                k,
                lattice_basis: [u.to_strings(), v.to_strings()],
                closed,
            });
        }
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    pub j: usize,
    pub value: BigReal,
    pub det3: BigInt,
    /// Whether the enclosure of Δ_j meets the enclosure of `A·det3`.
    pub matches_product: bool,
}

/// `Δ_j = det[(L, P, F) at j−1, j, j+1]` and its integer counterpart.
pub fn delta(seq: &MinimalSequence, j: usize, a: &BigReal, ctx: &RealCtx) -> Result<Delta> {
    if j < 2 || j >= seq.len() {
        return Err(Error::InvalidArgument(format!("delta needs 2 <= j < {}", seq.len())));
    }
    let row = |i: usize| {
        let r = &seq.records[i - 1];
        [r.l.clone(), r.p.clone(), r.f.clone()]
    };
    let (r0, r1, r2) = (row(j - 1), row(j), row(j + 1));
    let value = det3_rows([&r0, &r1, &r2], ctx);
    let xs = &seq.records;
    let det3 = xs[j - 2].x.det3(&xs[j - 1].x, &xs[j].x);
    let product = ctx.mul_int(a, &det3);
    Ok(Delta {
        j,
        matches_product: value.overlaps(&product),
        value,
        det3,
    })
}

/// Enclosure of `W_j = L_j·P_{j+1} − L_{j+1}·P_j`.
pub fn wronskian(seq: &MinimalSequence, j: usize, ctx: &RealCtx) -> Result<BigReal> {
    if j < 1 || j >= seq.len() {
        return Err(Error::InvalidArgument(format!("wronskian needs 1 <= j < {}", seq.len())));
    }
    let (a, b) = (&seq.records[j - 1], &seq.records[j]);
    Ok(ctx.sub(&ctx.mul(&a.l, &b.p), &ctx.mul(&b.l, &a.p)))
}

fn exact_eval(coeffs: &[BigRational; 3], x: &IntVec) -> BigRational {
    coeffs
        .iter()
        .zip(x.0.iter())
        .map(|(c, xi)| c * BigRational::from_integer(xi.clone()))
        .sum()
}

/// Forms with rational coefficients, used for exact replay.
pub fn rational_forms(l: &LinearForm, p: &LinearForm) -> ([BigRational; 3], [BigRational; 3]) {
    let q = |f: &LinearForm| [f.coeffs[0].mid_rational(), f.coeffs[1].mid_rational(), f.coeffs[2].mid_rational()];
    (q(l), q(p))
}

/// Exact `W_j` for rational forms on the vectors `xs` (1-based `j`).
pub fn wronskian_exact(l: &[BigRational; 3], p: &[BigRational; 3], xs: &[IntVec], j: usize) -> BigRational {
    let (a, b) = (&xs[j - 1], &xs[j]);
    exact_eval(l, a) * exact_eval(p, b) - exact_eval(l, b) * exact_eval(p, a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunWronskian {
    pub nu: usize,
    pub k: usize,
    pub values: Vec<String>,
    /// Every `|W_j|` enclosure meets `|W_nu|`.
    pub abs_consistent: bool,
    /// Certified signs alternate along the run.
    pub alternating: bool,
    /// Exact replay with the midpoint forms gives equal `|W_j|`.
    pub exact_equal: bool,
}

/// Wronskians `W_nu .. W_{k−1}` along a run, the pairs lying in the run's
/// lattice.
pub fn run_wronskian(seq: &MinimalSequence, run: &DependentRun, ctx: &RealCtx) -> Result<RunWronskian> {
    let last = (run.k - 1).min(seq.len() - 1);
    let ws: Vec<BigReal> = (run.nu..=last).map(|j| wronskian(seq, j, ctx)).collect::<Result<_>>()?;
    let abs0 = ws[0].abs();
    let abs_consistent = ws.iter().all(|w| w.abs().overlaps(&abs0));
    let alternating = ws.windows(2).all(|p| {
        let (a, b) = (p[0].sign(), p[1].sign());
        a != Sign::ZeroIndeterminate && b != Sign::ZeroIndeterminate && a != b
    });
    let (lq, pq) = rational_forms(&seq.forms.l, &seq.forms.p);
    let xs = seq.vectors();
    let exact: Vec<BigRational> = (run.nu..=last).map(|j| wronskian_exact(&lq, &pq, &xs, j)).collect();
    let exact_equal = exact.iter().all(|w| w.abs() == exact[0].abs());
    Ok(RunWronskian {
        nu: run.nu,
        k: run.k,
        values: ws.iter().map(|w| w.to_sci_string(64)).collect(),
        abs_consistent,
        alternating,
        exact_equal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JarnikRow {
    pub j: usize,
    pub growth: f64,
    pub decay: f64,
}

/// Growth `log X_{j+1} / log X_j` and decay `−log L_j / log X_j` at
/// independent triples past the burn-in.
pub fn jarnik_report(seq: &MinimalSequence, classes: &[TripleClass], burn_in: usize) -> Vec<JarnikRow> {
    classes
        .iter()
        .filter(|c| c.kind == TripleKind::Independent && c.j > burn_in && c.j < seq.len())
        .filter_map(|c| {
            let (r, next) = (&seq.records[c.j - 1], &seq.records[c.j]);
            let lx = r.norm.ln_abs();
            (lx > 0.0).then(|| JarnikRow {
                j: c.j,
                growth: next.norm.ln_abs() / lx,
                decay: -r.l.ln_abs() / lx,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub j: usize,
    pub value: String,
    pub det3: String,
    pub matches_product: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub theta: String,
    pub norm: String,
    pub t_reached: u64,
    pub burn_in: usize,
    pub a: String,
    pub triples: Vec<TripleClass>,
    pub runs: Vec<DependentRun>,
    pub delta: Vec<DeltaRow>,
    pub wronskian: Vec<RunWronskian>,
    pub jarnik: Vec<JarnikRow>,
    pub independent_after_burn_in: usize,
}

pub fn analyze(seq: &MinimalSequence, burn_in: usize) -> Result<AnalysisReport> {
    if seq.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: seq.len() });
    }
    let ctx = seq.forms.ctx;
    let classes = classify_triples(seq)?;
    let xs = seq.vectors();
    let runs = segment_runs(&xs, &classes)?;
    let delta_rows = classes
        .iter()
        .map(|c| {
            let d = delta(seq, c.j, &seq.forms.a, &ctx)?;
            Ok(DeltaRow {
                j: d.j,
                value: d.value.to_sci_string(64),
                det3: d.det3.to_string(),
                matches_product: d.matches_product,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wronskian = runs
        .iter()
        .filter(|r| r.k > r.nu + 1)
        .map(|r| run_wronskian(seq, r, &ctx))
        .collect::<Result<Vec<_>>>()?;
    let independent_after_burn_in = classes
        .iter()
        .filter(|c| c.kind == TripleKind::Independent && c.j > burn_in)
        .count();
    Ok(AnalysisReport {
        theta: seq.problem.key(),
        norm: seq.norm.to_string(),
        t_reached: seq.t_reached,
        burn_in,
        a: seq.forms.a.to_sci_string(64),
        jarnik: jarnik_report(seq, &classes, burn_in),
        triples: classes,
        runs,
        delta: delta_rows,
        wronskian,
        independent_after_burn_in,
    })
}
