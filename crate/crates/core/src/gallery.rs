//! Built-in reproducible inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::theta::ThetaSpec;

/// Prefix of the fixed point of the substitution `1 -> 12, 2 -> 1`.
pub fn fibonacci_word(n: usize) -> Vec<u8> {
    let mut w = vec![1u8];
    while w.len() < n {
        w = w
            .iter()
            .flat_map(|&c| if c == 1 { vec![1, 2] } else { vec![1] })
            .collect();
    }
    w.truncate(n);
    w
}

/// Target annotation with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Expectation {
    pub exponent: &'static str,
    pub target: String,
    /// `limit` for T -> infinity values, `desk` for finite-size bands.
    pub provenance: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GalleryEntry {
    pub name: String,
    pub spec: ThetaSpec,
    pub expected: Vec<Expectation>,
    pub notes: String,
}

fn exp(exponent: &'static str, target: &str, provenance: &'static str) -> Expectation {
    Expectation {
        exponent,
        target: target.to_string(),
        provenance,
    }
}

pub fn builtin_gallery() -> Vec<GalleryEntry> {
    let mut out = vec![
        GalleryEntry {
            name: "cbrt2".into(),
            spec: ThetaSpec::Cbrt(2.into()),
            expected: vec![
                exp("omega_hat", "2", "limit"),
                exp("omega_star", ">= 3", "limit"),
                exp("omega_hat", "[1.6, 2.4] at T=1e5", "desk"),
                exp("omega_lp", ">= 2.3 at T=1e5", "desk"),
            ],
            notes: "generic cubic irrational".into(),
        },
        GalleryEntry {
            name: "fib_cf_40".into(),
            spec: ThetaSpec::CfFib(40),
            expected: vec![
                exp("omega_hat", "(3+sqrt5)/2", "limit"),
                exp("omega_star", "3+sqrt5", "limit"),
                exp("gamma_max", ">= 2.2 at T=1e6", "desk"),
            ],
            notes: "Fibonacci-word continued fraction over {1,2}, truncated; extremal-type candidate".into(),
        },
    ];
    for seed in 1..=3u64 {
        out.push(GalleryEntry {
            name: format!("rand_{seed}"),
            spec: ThetaSpec::Random(seed),
            expected: vec![exp("omega_hat", "2", "limit"), exp("omega_hat", "[1.6, 2.4] at T=1e5", "desk")],
            notes: "seeded uniform θ in (0,1)".into(),
        });
    }
    out
}

pub fn lookup(name: &str) -> Result<GalleryEntry> {
    builtin_gallery()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no gallery entry `{name}`")))
}

/// Resolves `gallery:<name>` references and plain spec text alike.
pub fn resolve(text: &str) -> Result<ThetaSpec> {
    match text.strip_prefix("gallery:") {
        Some(name) => Ok(lookup(name)?.spec),
        None => text.parse(),
    }
}
