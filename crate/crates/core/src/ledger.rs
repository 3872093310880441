//! Exact rational checks of the exponent recursion behind the lower bound:
//! the step map on β, its fixed point and closed form, and the bound on r.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minimal_points::MinimalSequence;
use crate::rational::LedgerScalar;
use crate::structure::DependentRun;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerParams {
    pub alpha: LedgerScalar,
    pub r: LedgerScalar,
    pub beta0: LedgerScalar,
}

impl LedgerParams {
    pub fn new(alpha: LedgerScalar, r: LedgerScalar, beta0: LedgerScalar) -> Result<Self> {
        if alpha <= LedgerScalar::int(2) {
            return Err(Error::OutOfRegime(format!("alpha = {alpha} must exceed 2")));
        }
        if r <= LedgerScalar::zero() {
            return Err(Error::InvalidArgument(format!("r = {r} must be positive")));
        }
        Ok(LedgerParams { alpha, r, beta0 })
    }
}

fn check_alpha(alpha: &LedgerScalar) -> Result<()> {
    if *alpha <= LedgerScalar::int(2) {
        return Err(Error::OutOfRegime(format!("alpha = {alpha} must exceed 2")));
    }
    Ok(())
}

/// `α² − α + 1`.
pub fn r_threshold(alpha: &LedgerScalar) -> Result<LedgerScalar> {
    check_alpha(alpha)?;
    Ok(alpha * alpha - alpha + LedgerScalar::one())
}

/// `α(α − 1)`.
pub fn jarnik_decay(alpha: &LedgerScalar) -> LedgerScalar {
    alpha * (alpha - LedgerScalar::one())
}

/// `β ↦ r − α − 1 + β/(α − 1)`.
pub fn beta_step(p: &LedgerParams, beta: &LedgerScalar) -> LedgerScalar {
    let a1 = &p.alpha - LedgerScalar::one();
    &p.r - &p.alpha - LedgerScalar::one() + beta / &a1
}

/// `(r − α − 1)(α − 1)/(α − 2)`.
pub fn beta_fixed_point(p: &LedgerParams) -> LedgerScalar {
    let one = LedgerScalar::one();
    (&p.r - &p.alpha - one.clone()) * (&p.alpha - one) / (&p.alpha - LedgerScalar::int(2))
}

/// Exact `β_i` at critical `r = α² − α + 1`:
/// `α(α − 1) + (β_0 − α(α − 1))/(α − 1)^i`.
pub fn beta_closed_form(p: &LedgerParams, i: u32) -> Result<LedgerScalar> {
    if p.r != r_threshold(&p.alpha)? {
        return Err(Error::NotCritical);
    }
    let star = jarnik_decay(&p.alpha);
    let denom = (&p.alpha - LedgerScalar::one()).pow(i);
    Ok(&star + (&p.beta0 - &star) / denom)
}

/// `α² + 1 − β/(α − 1)`.
pub fn r_lower_bound(alpha: &LedgerScalar, beta: &LedgerScalar) -> LedgerScalar {
    alpha * alpha + LedgerScalar::one() - beta / (alpha - LedgerScalar::one())
}

/// Per-run hypotheses of the main estimate for a given `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunPredicates {
    pub nu: usize,
    pub k: usize,
    /// `|P_ν| ≤ L_ν X_ν^r`
    pub a1: bool,
    /// `|P_{k−1}| ≤ L_{k−1} X_{k−1}^r`
    pub a2: bool,
    /// `|P_k| ≤ L_k X_ν^r`
    pub a3: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub alpha: LedgerScalar,
    pub r: LedgerScalar,
    pub beta0: LedgerScalar,
    pub iterations: usize,
    pub beta_trace: Vec<LedgerScalar>,
    pub fixed_point: LedgerScalar,
    pub r_bound_trace: Vec<LedgerScalar>,
    pub contradiction_at: Option<usize>,
    /// `β_{i+1} < β_i` at every step where `β_i` exceeds the fixed point.
    pub monotone_decrease: bool,
    /// `β_0 ≥ α(α − 1)`, the decay guaranteed at independent triples.
    pub beta0_at_least_jarnik: bool,
    pub predicates: Option<Vec<RunPredicates>>,
}

/// Iterates the β recursion `w` times and reports the first index at which
/// the bound on r exceeds `r`.
pub fn contradiction_trace(p: &LedgerParams, w: usize) -> Result<TraceReport> {
    let threshold = r_threshold(&p.alpha)?;
    if p.r >= threshold {
        return Err(Error::InvalidArgument(format!(
            "r = {} must be below alpha² − alpha + 1 = {threshold}",
            p.r
        )));
    }
    let fixed = beta_fixed_point(p);
    if p.beta0 < fixed {
        return Err(Error::InvalidArgument(format!(
            "beta0 = {} below the fixed point {fixed}",
            p.beta0
        )));
    }
    let mut beta_trace = vec![p.beta0.clone()];
    for i in 0..w {
        let next = beta_step(p, &beta_trace[i]);
        beta_trace.push(next);
    }
    let r_bound_trace: Vec<LedgerScalar> = beta_trace.iter().map(|b| r_lower_bound(&p.alpha, b)).collect();
    let contradiction_at = r_bound_trace.iter().position(|b| *b > p.r);
    let monotone_decrease = beta_trace
        .windows(2)
        .filter(|s| s[0] > fixed)
        .all(|s| s[1] < s[0] && s[1] > fixed);
    Ok(TraceReport {
        alpha: p.alpha.clone(),
        r: p.r.clone(),
        beta0: p.beta0.clone(),
        iterations: w,
        beta_trace,
        fixed_point: fixed,
        r_bound_trace,
        contradiction_at,
        monotone_decrease,
        beta0_at_least_jarnik: p.beta0 >= jarnik_decay(&p.alpha),
        predicates: None,
    })
}

/// Evaluates the per-run hypotheses on a computed sequence for rational r.
pub fn run_predicates(seq: &MinimalSequence, runs: &[DependentRun], r: &LedgerScalar) -> Vec<RunPredicates> {
    let r = r.to_f64();
    let rec = |j: usize| &seq.records[j - 1];
    let holds = |j: usize, x_at: usize| {
        let (a, b) = (rec(j), rec(x_at));
        a.p.ln_abs() <= a.l.ln_abs() + r * b.norm.ln_abs()
    };
    runs.iter()
        .filter(|run| run.closed && run.k <= seq.len())
        .map(|run| RunPredicates {
            nu: run.nu,
            k: run.k,
            a1: holds(run.nu, run.nu),
            a2: holds(run.k - 1, run.k - 1),
            a3: holds(run.k, run.nu),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> LedgerScalar {
        s.parse().unwrap()
    }

    fn params(a: &str, r: &str, b: &str) -> LedgerParams {
        LedgerParams::new(q(a), q(r), q(b)).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(r_threshold(&q("5/2")).unwrap(), q("19/4"));
        assert_eq!(r_threshold(&q("3")).unwrap(), q("7"));
        assert!(matches!(r_threshold(&q("2")), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn steps_and_fixed_points() {
        let p = params("5/2", "19/4", "6");
        assert_eq!(beta_step(&p, &q("15/4")), q("15/4"));
        assert_eq!(beta_step(&p, &q("6")), q("21/4"));
        assert_eq!(beta_step(&params("3", "7", "6"), &q("6")), q("6"));
        assert_eq!(beta_fixed_point(&p), q("15/4"));
        let p4 = params("5/2", "4", "6");
        assert_eq!(beta_fixed_point(&p4), q("3/2"));
        assert_eq!(beta_step(&p4, &q("3/2")), q("3/2"));
        assert_eq!(beta_fixed_point(&params("3", "7", "6")), q("6"));
    }

    #[test]
    fn closed_form() {
        let p = params("5/2", "19/4", "6");
        assert_eq!(beta_closed_form(&p, 1).unwrap(), q("21/4"));
        assert_eq!(beta_closed_form(&params("5/2", "19/4", "15/4"), 9).unwrap(), q("15/4"));
        assert_eq!(beta_closed_form(&params("3", "7", "10"), 2).unwrap(), q("7"));
        assert_eq!(beta_closed_form(&params("3", "6", "10"), 2).unwrap_err(), Error::NotCritical);
        for (a, b0) in [("5/2", "6"), ("7/3", "-1"), ("3", "100/7")] {
            let p = LedgerParams::new(q(a), r_threshold(&q(a)).unwrap(), q(b0)).unwrap();
            let mut beta = p.beta0.clone();
            for i in 0..=64 {
                assert_eq!(beta_closed_form(&p, i).unwrap(), beta);
                beta = beta_step(&p, &beta);
            }
        }
    }

    #[test]
    fn r_lower_bound_values() {
        assert_eq!(r_lower_bound(&q("5/2"), &q("15/4")), q("19/4"));
        assert_eq!(r_lower_bound(&q("3"), &q("6")), q("7"));
        assert_eq!(r_lower_bound(&q("3"), &q("12")), q("4"));
    }

    #[test]
    fn contraction_is_exact() {
        for (a, r, b0) in [("5/2", "9/2", "6"), ("3", "6", "8"), ("21/10", "3", "-2")] {
            let p = params(a, r, b0);
            let star = beta_fixed_point(&p);
            let factor = (q(a) - LedgerScalar::one()).recip().unwrap();
            let next = beta_step(&p, &p.beta0);
            assert_eq!((&next - &star).abs(), (&p.beta0 - &star).abs() * factor);
        }
    }

    #[test]
    fn traces() {
        let t = contradiction_trace(&params("5/2", "9/2", "6"), 50).unwrap();
        assert_eq!(t.fixed_point, q("3"));
        assert_eq!(t.contradiction_at, Some(3));
        assert!(t.monotone_decrease);
        // the gap shrinks by exactly 2/3 per step: 3·(2/3)^50 ≈ 4.7e-9
        assert_eq!(&t.beta_trace[50] - q("3"), q("3") * q("2/3").pow(50));
        assert_eq!(r_lower_bound(&q("5/2"), &q("3")), q("21/4"));

        let t = contradiction_trace(&params("3", "6", "8"), 50).unwrap();
        assert_eq!(t.fixed_point, q("4"));
        assert!(t.contradiction_at.is_some());

        let p = params("5/2", "9/2", "3");
        let t = contradiction_trace(&p, 10).unwrap();
        assert_eq!(t.contradiction_at, Some(0));
        assert!(!t.beta0_at_least_jarnik);

        assert!(contradiction_trace(&params("5/2", "5", "6"), 5).is_err());
        assert!(contradiction_trace(&params("5/2", "9/2", "2"), 5).is_err());
    }

    #[test]
    fn closure_on_grid() {
        for k in 1..=40 {
            let a = LedgerScalar::new(80 + k, 40).unwrap();
            assert_eq!(r_lower_bound(&a, &jarnik_decay(&a)), r_threshold(&a).unwrap());
        }
    }
}
