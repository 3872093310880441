//! Finite-height estimates of ω̂ and ω_LP, and the lower-bound verdict.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minimal_points::{gamma_ratios, MinimalSequence};
use crate::rational::LedgerScalar;

pub const DEFAULT_BURN_IN: usize = 3;
pub const DEFAULT_SLACK: f64 = 0.5;
const MIN_RECORDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    UniformHat,
    TwoFormLp,
    QuadraticStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub kind: EstimateKind,
    pub value: f64,
    /// Inclusive index range of the samples used.
    pub window: (usize, usize),
    /// `(index, sample)` pairs.
    pub samples: Vec<(usize, f64)>,
    pub trend: Trend,
    /// Records left out (P enclosing zero, or norm 1).
    pub skipped: usize,
}

impl ExponentEstimate {
    pub fn max_sample(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Least-squares slope sign over the second half of the samples.
pub fn trend_of(samples: &[(usize, f64)]) -> Trend {
    let half = &samples[samples.len() / 2..];
    if half.len() < 2 {
        return Trend::Flat;
    }
    let n = half.len() as f64;
    let mx = half.iter().map(|s| s.0 as f64).sum::<f64>() / n;
    let my = half.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = half.iter().map(|s| (s.0 as f64 - mx) * (s.1 - my)).sum();
    let sxx: f64 = half.iter().map(|s| (s.0 as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope > 0.005 {
        Trend::Increasing
    } else if slope < -0.005 {
        Trend::Decreasing
    } else {
        Trend::Flat
    }
}

fn window_of(samples: &[(usize, f64)]) -> (usize, usize) {
    (samples.first().map_or(0, |s| s.0), samples.last().map_or(0, |s| s.0))
}

/// Samples `gamma_j = −log L_j / log X_{j+1}` past the burn-in; the value
/// is the minimum over the last half of the window.
pub fn estimate_uniform(seq: &MinimalSequence, burn_in: usize) -> Result<ExponentEstimate> {
    let got = seq.len().saturating_sub(burn_in);
    if got < MIN_RECORDS {
        return Err(Error::InsufficientData { needed: MIN_RECORDS + burn_in, got: seq.len() });
    }
    let samples: Vec<(usize, f64)> = gamma_ratios(seq).into_iter().filter(|s| s.0 > burn_in).collect();
    let half = &samples[samples.len() / 2..];
    let value = half.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(ExponentEstimate {
        kind: EstimateKind::UniformHat,
        value,
        window: window_of(&samples),
        trend: trend_of(&samples),
        samples,
        skipped: 0,
    })
}

/// Samples `s_ν = log(|P_ν| / L_ν) / log X_ν` past the burn-in; the value
/// is the running maximum.
pub fn estimate_two_form(seq: &MinimalSequence, burn_in: usize) -> Result<ExponentEstimate> {
    let got = seq.len().saturating_sub(burn_in);
    if got < MIN_RECORDS {
        return Err(Error::InsufficientData { needed: MIN_RECORDS + burn_in, got: seq.len() });
    }
    let mut skipped = 0;
    let mut samples = vec![];
    for r in seq.records.iter().filter(|r| r.nu > burn_in) {
        let lx = r.norm.ln_abs();
        if r.p.contains_zero() || lx <= 0.0 {
            skipped += 1;
            continue;
        }
        samples.push((r.nu, (r.p.ln_abs() - r.l.ln_abs()) / lx));
    }
    if samples.is_empty() {
        return Err(Error::PVanishes { skipped });
    }
    let value = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentEstimate {
        kind: EstimateKind::TwoFormLp,
        value,
        window: window_of(&samples),
        trend: trend_of(&samples),
        samples,
        skipped,
    })
}

/// `w² − w + 1`, exact on rationals.
pub fn lp_floor(w: &LedgerScalar) -> LedgerScalar {
    w * w - w + LedgerScalar::one()
}

pub fn lp_floor_f64(w: f64) -> f64 {
    w * w - w + 1.0
}

/// True when the input lies below 2, where the bound is outside its regime.
pub fn floor_out_of_regime(w: f64) -> bool {
    w < 2.0
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateSummary {
    pub value: f64,
    pub window: (usize, usize),
    pub trend: Trend,
    pub skipped: usize,
    pub samples_csv_ref: Option<String>,
}

impl From<&ExponentEstimate> for EstimateSummary {
    fn from(e: &ExponentEstimate) -> Self {
        EstimateSummary {
            value: e.value,
            window: e.window,
            trend: e.trend,
            skipped: e.skipped,
            samples_csv_ref: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub theta: String,
    #[serde(rename = "T")]
    pub t: u64,
    pub omega_hat: EstimateSummary,
    pub omega_lp: EstimateSummary,
    pub floor: f64,
    pub slack: f64,
    pub consistent_with_theorem: bool,
    pub warnings: Vec<String>,
}

pub fn verdict_from(theta: String, t: u64, hat: &ExponentEstimate, lp: &ExponentEstimate, slack: f64) -> Verdict {
    let floor = lp_floor_f64(hat.value);
    let mut warnings = vec![];
    if floor_out_of_regime(hat.value) {
        warnings.push(format!("omega_hat estimate {:.4} below 2; floor computed anyway", hat.value));
    }
    Verdict {
        theta,
        t,
        omega_hat: hat.into(),
        omega_lp: lp.into(),
        floor,
        slack,
        consistent_with_theorem: lp.value >= floor - slack,
        warnings,
    }
}

pub fn verdict(seq: &MinimalSequence, burn_in: usize, slack: f64) -> Result<Verdict> {
    let hat = estimate_uniform(seq, burn_in)?;
    let lp = estimate_two_form(seq, burn_in)?;
    Ok(verdict_from(seq.problem.key(), seq.t_reached, &hat, &lp, slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{NormKind, Problem};
    use crate::minimal_points::{enumerate_minimal_points, EnumOptions};
    use crate::numeric::{BigReal, RealCtx};
    use crate::theta::ThetaSpec;

    fn pow2(e: i64) -> BigReal {
        BigReal::from_parts(1.into(), 0u32.into(), e)
    }

    /// X_j = 2^(j+1), L_j = X_{j+1}^-2, |P_j| = L_j X_j^3.
    fn synthetic(n: usize) -> MinimalSequence {
        let p = Problem::derivative(ThetaSpec::Cbrt(2.into()));
        let mut seq = enumerate_minimal_points(&p, NormKind::Euclid, 2, &RealCtx::default(), EnumOptions::default()).unwrap();
        let base = seq.records[0].clone();
        seq.records = (1..=n)
            .map(|j| {
                let mut r = base.clone();
                let e = j as i64 + 1;
                r.nu = j;
                r.norm = pow2(e);
                r.l = pow2(-2 * (e + 1));
                r.p = pow2(-2 * (e + 1) + 3 * e);
                r
            })
            .collect();
        seq
    }

    #[test]
    fn synthetic_values() {
        let s = synthetic(12);
        let hat = estimate_uniform(&s, 3).unwrap();
        assert!((hat.value - 2.0).abs() < 1e-12);
        let lp = estimate_two_form(&s, 3).unwrap();
        assert!((lp.value - 3.0).abs() < 1e-12);
        let v = verdict(&s, 3, 0.0).unwrap();
        assert!(v.consistent_with_theorem);
        assert!((v.floor - 3.0).abs() < 1e-12);
        assert_eq!(
            estimate_uniform(&synthetic(8), 3).unwrap_err(),
            Error::InsufficientData { needed: 9, got: 8 }
        );
    }

    #[test]
    fn floor_values() {
        assert_eq!(lp_floor(&LedgerScalar::int(2)), LedgerScalar::int(3));
        assert_eq!(lp_floor(&LedgerScalar::int(1)), LedgerScalar::int(1));
        assert!(floor_out_of_regime(1.0));
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((lp_floor_f64(golden) - (3.0 + 5f64.sqrt())).abs() < 1e-12);
        let mut prev = lp_floor(&LedgerScalar::int(2));
        for k in 1..=40 {
            let w = LedgerScalar::new(80 + k, 40).unwrap();
            let f = lp_floor(&w);
            assert!(f > prev);
            prev = f;
        }
    }

    #[test]
    fn vanishing_p_is_reported() {
        let mut s = synthetic(10);
        for r in &mut s.records {
            r.p = BigReal::zero();
        }
        assert_eq!(estimate_two_form(&s, 3).unwrap_err(), Error::PVanishes { skipped: 7 });
    }

    #[test]
    fn scale_robustness() {
        let s = synthetic(12);
        let mut scaled = s.clone();
        let c = 8.0f64;
        for r in &mut scaled.records {
            r.l = RealCtx::default().mul_int(&r.l, &8.into());
        }
        let a = estimate_uniform(&s, 3).unwrap().value;
        let b = estimate_uniform(&scaled, 3).unwrap().value;
        let x_min = (s.records[4].norm.ln_abs()).max(1.0);
        assert!((a - b).abs() < 2.0 * c.ln() / x_min);
    }
}
