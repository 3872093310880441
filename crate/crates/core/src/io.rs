//! JSON-lines sequence cache, CSV and JSON report emission, and the shipped
//! report schemas.
//!
//! A cache file holds one header line, then record lines, then extent lines
//! `{"T_reached": N}` appended after each successful extension. Records are
//! never rewritten.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forms::{IntVec, NormKind, Problem};
use crate::minimal_points::{enumerate_partial, gamma_ratios, EnumOptions, MinimalPointRecord, MinimalSequence};
use crate::numeric::RealCtx;
use crate::quadratic::QuadraticApproximant;

pub const FORMAT_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "DIOPHANT_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub theta: String,
    pub norm: NormKind,
    pub precision_bits: u32,
    #[serde(rename = "T_reached")]
    pub t_reached: u64,
    pub format_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub nu: usize,
    pub x: [String; 3],
    #[serde(rename = "X")]
    pub norm: String,
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "F")]
    pub f: String,
    pub err_bits: Option<i64>,
}

impl CacheRecord {
    pub fn from_record(r: &MinimalPointRecord, precision_bits: u32) -> Self {
        CacheRecord {
            nu: r.nu,
            x: r.x.to_strings(),
            norm: r.norm.to_sci_string(precision_bits),
            l: r.l.to_sci_string(precision_bits),
            p: r.p.to_sci_string(precision_bits),
            f: r.f.to_sci_string(precision_bits),
            err_bits: r.err_bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Extent {
    #[serde(rename = "T_reached")]
    t_reached: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terminated: Option<String>,
}

/// Parsed cache contents.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheFile {
    pub header: CacheHeader,
    pub records: Vec<CacheRecord>,
    /// Largest extent recorded; the header value if none was appended.
    pub t_reached: u64,
    pub terminated: Option<String>,
}

impl CacheFile {
    pub fn vectors(&self) -> Result<Vec<IntVec>> {
        self.records.iter().map(|r| IntVec::parse_strings(&r.x)).collect()
    }
}

/// `--cache-dir`, else `$DIOPHANT_CACHE`, else `./diophant-cache`.
pub fn cache_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("diophant-cache"))
}

/// Sanitized problem key plus norm and a short hash of the full key.
pub fn cache_file_name(problem: &Problem, norm: NormKind) -> String {
    let key = problem.key();
    let clean: String = key
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .take(48)
        .collect();
    let digest = Sha256::digest(format!("{key}|{norm}").as_bytes());
    let hash: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("{clean}.{norm}.{hash}.jsonl")
}

pub fn read_cache(path: &Path) -> Result<CacheFile> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))??;
    let header: CacheHeader = serde_json::from_str(&first)?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::CacheMismatch(format!(
            "format_version {} (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    let mut out = CacheFile {
        t_reached: header.t_reached,
        header,
        records: vec![],
        terminated: None,
    };
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)?;
        if v.get("nu").is_some() {
            let rec: CacheRecord = serde_json::from_value(v)?;
            if rec.nu != out.records.len() + 1 {
                return Err(Error::Format(format!("record {} out of order", rec.nu)));
            }
            out.records.push(rec);
        } else {
            let e: Extent = serde_json::from_value(v)?;
            out.t_reached = out.t_reached.max(e.t_reached);
            if e.terminated.is_some() {
                out.terminated = e.terminated;
            }
        }
    }
    Ok(out)
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string(v)? + "\n")
}

/// Outcome of [`cached_enumerate`].
#[derive(Debug)]
pub struct CachedRun {
    pub path: PathBuf,
    pub sequence: Option<MinimalSequence>,
    pub appended: usize,
    pub error: Option<Error>,
}

/// Loads the cached prefix, extends it to `t` if needed, and appends the new
/// records. A certified prefix is still written when enumeration fails.
pub fn cached_enumerate(
    dir: &Path,
    problem: &Problem,
    norm: NormKind,
    t: u64,
    ctx: &RealCtx,
    opts: EnumOptions,
) -> Result<CachedRun> {
    fs::create_dir_all(dir)?;
    let path = dir.join(cache_file_name(problem, norm));
    let header = CacheHeader {
        theta: problem.key(),
        norm,
        precision_bits: ctx.precision_bits(),
        t_reached: 0,
        format_version: FORMAT_VERSION,
    };
    let cached = if path.exists() {
        let c = read_cache(&path)?;
        let h = &c.header;
        if h.theta != header.theta || h.norm != norm || h.precision_bits != header.precision_bits {
            return Err(Error::CacheMismatch(format!(
                "{} holds theta={} norm={} precision={}; requested theta={} norm={norm} precision={}",
                path.display(),
                h.theta,
                h.norm,
                h.precision_bits,
                header.theta,
                header.precision_bits
            )));
        }
        Some(c)
    } else {
        None
    };

    let limit = norm.bound_key(&t.into());
    let (resume, have) = match &cached {
        Some(c) => {
            let all = c.vectors()?;
            let keep: Vec<IntVec> = all.iter().filter(|x| norm.key(x) <= limit).cloned().collect();
            (keep, all.len())
        }
        None => (vec![], 0),
    };
    let covered = cached.as_ref().is_some_and(|c| c.t_reached >= t || c.terminated.is_some());
    let (seq, err) = enumerate_partial(problem, norm, t, ctx, opts, &resume);
    if covered {
        return Ok(CachedRun { path, sequence: seq, appended: 0, error: err });
    }

    let mut buf = String::new();
    if cached.is_none() {
        buf += &json_line(&header)?;
    }
    let mut appended = 0;
    if let Some(s) = &seq {
        for r in s.records.iter().skip(have) {
            buf += &json_line(&CacheRecord::from_record(r, ctx.precision_bits()))?;
            appended += 1;
        }
        if s.t_reached > cached.as_ref().map_or(0, |c| c.t_reached) || s.terminated.is_some() {
            buf += &json_line(&Extent { t_reached: s.t_reached, terminated: s.terminated.clone() })?;
        }
    }
    if !buf.is_empty() {
        let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
        f.write_all(buf.as_bytes())?;
    }
    Ok(CachedRun { path, sequence: seq, appended, error: err })
}

/// Samples CSV: `nu, X, L, P, gamma, s`.
pub fn samples_csv<W: Write>(seq: &MinimalSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["nu", "X", "L", "P", "gamma", "s"])?;
    let gammas: std::collections::HashMap<usize, f64> = gamma_ratios(seq).into_iter().collect();
    let prec = seq.precision_bits();
    for r in &seq.records {
        let lx = r.norm.ln_abs();
        let s = (!r.p.contains_zero() && lx > 0.0).then(|| (r.p.ln_abs() - r.l.ln_abs()) / lx);
        let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.12}"));
        w.write_record([
            r.nu.to_string(),
            r.norm.to_sci_string(prec),
            r.l.to_sci_string(prec),
            r.p.to_sci_string(prec),
            fmt(gammas.get(&r.nu).copied()),
            fmt(s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Quadratic records CSV: `H, a0, a1, a2, xi, dist, gamma`.
pub fn quadratic_csv<W: Write>(records: &[QuadraticApproximant], precision_bits: u32, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["H", "a0", "a1", "a2", "xi", "dist", "gamma"])?;
    for r in records {
        w.write_record([
            r.height.to_string(),
            r.coeffs[0].to_string(),
            r.coeffs[1].to_string(),
            r.coeffs[2].to_string(),
            r.xi.to_sci_string(precision_bits),
            r.dist.to_sci_string(precision_bits),
            r.gamma.map_or(String::new(), |g| format!("{g:.12}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Appends one line to `<out>.log`. The only place timestamps appear.
pub fn sidecar_log(out: &Path, line: &str) -> Result<()> {
    let mut name = out.as_os_str().to_owned();
    name.push(".log");
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = OpenOptions::new().create(true).append(true).open(PathBuf::from(name))?;
    writeln!(f, "{stamp} {line}")?;
    Ok(())
}

pub const SCHEMAS: &[(&str, &str)] = &[
    ("verdict", include_str!("../schemas/verdict.schema.json")),
    ("analysis", include_str!("../schemas/analysis.schema.json")),
    ("ledger", include_str!("../schemas/ledger.schema.json")),
    ("omega_star", include_str!("../schemas/omega_star.schema.json")),
    ("enumerate", include_str!("../schemas/enumerate.schema.json")),
    ("verify", include_str!("../schemas/verify.schema.json")),
    ("gallery", include_str!("../schemas/gallery.schema.json")),
];

pub fn schema(name: &str) -> Result<Value> {
    let text = SCHEMAS
        .iter()
        .find(|s| s.0 == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no schema `{name}`")))?
        .1;
    Ok(serde_json::from_str(text)?)
}

fn type_matches(v: &Value, ty: &str) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => false,
    }
}

/// Checks `type`, `required`, `properties` and `items`, which is all the
/// shipped schemas use. Returns the paths that fail.
pub fn validate(v: &Value, schema: &Value) -> Vec<String> {
    let mut errs = vec![];
    check(v, schema, "$", &mut errs);
    errs
}

fn check(v: &Value, s: &Value, at: &str, errs: &mut Vec<String>) {
    match s.get("type") {
        Some(Value::String(t)) if !type_matches(v, t) => errs.push(format!("{at}: expected {t}")),
        Some(Value::Array(ts)) if !ts.iter().filter_map(Value::as_str).any(|t| type_matches(v, t)) => {
            errs.push(format!("{at}: type not in {ts:?}"))
        }
        _ => {}
    }
    if let (Some(obj), Some(req)) = (v.as_object(), s.get("required").and_then(Value::as_array)) {
        for k in req.iter().filter_map(Value::as_str) {
            if !obj.contains_key(k) {
                errs.push(format!("{at}: missing `{k}`"));
            }
        }
    }
    if let (Some(obj), Some(props)) = (v.as_object(), s.get("properties").and_then(Value::as_object)) {
        for (k, sub) in props {
            if let Some(child) = obj.get(k) {
                check(child, sub, &format!("{at}.{k}"), errs);
            }
        }
    }
    if let (Some(arr), Some(items)) = (v.as_array(), s.get("items")) {
        for (i, child) in arr.iter().enumerate() {
            check(child, items, &format!("{at}[{i}]"), errs);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimal_points::enumerate_minimal_points;
    use crate::theta::ThetaSpec;

    fn cbrt2() -> Problem {
        Problem::derivative(ThetaSpec::Cbrt(2.into()))
    }

    #[test]
    fn file_names_are_stable_and_distinct() {
        let a = cache_file_name(&cbrt2(), NormKind::Euclid);
        assert_eq!(a, cache_file_name(&cbrt2(), NormKind::Euclid));
        assert_ne!(a, cache_file_name(&cbrt2(), NormKind::Sup));
        assert!(a.starts_with("cbrt_2.euclid."));
    }

    #[test]
    fn extend_and_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = RealCtx::default();
        let opts = EnumOptions::default();
        let a = cached_enumerate(dir.path(), &cbrt2(), NormKind::Euclid, 300, &ctx, opts).unwrap();
        let first = fs::read(&a.path).unwrap();
        let b = cached_enumerate(dir.path(), &cbrt2(), NormKind::Euclid, 300, &ctx, opts).unwrap();
        assert_eq!(b.appended, 0);
        assert_eq!(fs::read(&a.path).unwrap(), first);

        let c = cached_enumerate(dir.path(), &cbrt2(), NormKind::Euclid, 5000, &ctx, opts).unwrap();
        let direct = enumerate_minimal_points(&cbrt2(), NormKind::Euclid, 5000, &ctx, opts).unwrap();
        assert_eq!(c.sequence.unwrap().vectors(), direct.vectors());
        let file = read_cache(&c.path).unwrap();
        assert_eq!(file.t_reached, 5000);
        assert_eq!(file.vectors().unwrap(), direct.vectors());

        // a shorter request from a longer cache truncates
        let d = cached_enumerate(dir.path(), &cbrt2(), NormKind::Euclid, 300, &ctx, opts).unwrap();
        assert_eq!(d.sequence.unwrap().len(), a.sequence.unwrap().len());

        // a fresh file written in one go is byte-identical to the same T
        let dir2 = tempfile::tempdir().unwrap();
        let e = cached_enumerate(dir2.path(), &cbrt2(), NormKind::Euclid, 5000, &ctx, opts).unwrap();
        let one_go = read_cache(&e.path).unwrap();
        assert_eq!(one_go.records, file.records);
    }

    #[test]
    fn header_mismatch_refused() {
        let dir = tempfile::tempdir().unwrap();
        let opts = EnumOptions::default();
        cached_enumerate(dir.path(), &cbrt2(), NormKind::Sup, 50, &RealCtx::default(), opts).unwrap();
        let err = cached_enumerate(dir.path(), &cbrt2(), NormKind::Sup, 50, &RealCtx::new(512).unwrap(), opts).unwrap_err();
        assert!(matches!(err, Error::CacheMismatch(_)));
    }

    #[test]
    fn csv_columns() {
        let seq = enumerate_minimal_points(&cbrt2(), NormKind::Euclid, 100, &RealCtx::default(), EnumOptions::default()).unwrap();
        let mut buf = vec![];
        samples_csv(&seq, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("nu,X,L,P,gamma,s\n"));
        assert_eq!(text.lines().count(), seq.len() + 1);
    }

    #[test]
    fn schemas_parse_and_check() {
        for (name, _) in SCHEMAS {
            assert!(schema(name).unwrap().is_object());
        }
        let s = serde_json::json!({"type": "object", "required": ["a"], "properties": {"a": {"type": "array", "items": {"type": "integer"}}}});
        assert!(validate(&serde_json::json!({"a": [1, 2]}), &s).is_empty());
        assert_eq!(validate(&serde_json::json!({"a": [1, "x"]}), &s).len(), 1);
        assert_eq!(validate(&serde_json::json!({}), &s).len(), 1);
    }
}
