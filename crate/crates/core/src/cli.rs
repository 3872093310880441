//! Command-line front end. `run` parses arguments, executes one command and
//! returns the process exit code.
//!
//! Exit codes: 0 ok, 1 failed check, 2 configuration, 3 precision,
//! 4 verdict inconsistent, 5 hypothesis violated.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{self, ExponentEstimate, Verdict, DEFAULT_BURN_IN, DEFAULT_SLACK};
use crate::forms::{NormKind, PCoef, Problem};
use crate::gallery;
use crate::io;
use crate::ledger::{self, LedgerParams, TraceReport};
use crate::minimal_points::{gamma_ratios, EnumOptions, MinimalSequence};
use crate::numeric::{RealCtx, DEFAULT_PRECISION, DEFAULT_PRECISION_CAP};
use crate::quadratic::{self, DiffReport};
use crate::rational::LedgerScalar;
use crate::structure::{self, AnalysisReport, TripleKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;
pub const EXIT_HYPOTHESIS: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidTheta { .. }
        | Error::CacheMismatch(_)
        | Error::OutOfRegime(_)
        | Error::NotCritical => EXIT_CONFIG,
        e if e.is_precision_failure() => EXIT_PRECISION,
        Error::HypothesisViolated(_) => EXIT_HYPOTHESIS,
        _ => EXIT_FAILED,
    }
}

#[derive(Debug, Parser)]
#[command(name = "diophant", version, about = "Minimal points and exponents of linear forms in three variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate minimal points up to --tmax and extend the cache.
    Enumerate(Common),
    /// Triple classification, runs, Δ and Wronskian checks.
    Analyze(Common),
    /// ω̂ and ω_LP estimates and the lower-bound verdict.
    Exponents(Common),
    /// Quadratic approximants up to --hmax and the ω* estimate.
    #[command(name = "omega-star")]
    OmegaStar(Common),
    /// Exact trace of the β recursion.
    Ledger(LedgerArgs),
    /// List the built-in θ gallery.
    Gallery(OutArgs),
    /// Enumerate, analyze, estimate and cross-check in one go.
    Verify(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output path; extension is replaced by .json / .csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct Common {
    /// θ, e.g. `cbrt:2`, `poly:[-2,0,0,1]@0`, `gallery:fib_cf_40`.
    #[arg(long)]
    theta: String,
    /// Second θ; switches to general mode.
    #[arg(long)]
    theta2: Option<String>,
    /// P coefficients in general mode: `a;b;c` with integers, t1, t2 or specs.
    #[arg(long = "P")]
    p: Option<String>,
    #[arg(long, default_value = "euclid")]
    norm: NormKind,
    #[arg(long, default_value_t = 100_000)]
    tmax: u64,
    #[arg(long)]
    hmax: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long = "burn-in", default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: f64,
    #[arg(long = "cache-dir")]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct LedgerArgs {
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    r: String,
    #[arg(long)]
    beta0: String,
    #[arg(long, default_value_t = 50)]
    iterations: usize,
    /// Evaluate the per-run predicates on this θ's sequence.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long, default_value = "euclid")]
    norm: NormKind,
    #[arg(long, default_value_t = 100_000)]
    tmax: u64,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    #[arg(long = "cache-dir")]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

impl Common {
    fn problem(&self) -> Result<Problem> {
        let theta = gallery::resolve(&self.theta)?;
        match (&self.theta2, &self.p) {
            (None, None) => Ok(Problem::derivative(theta)),
            (Some(t2), Some(p)) => {
                let parts: Vec<&str> = p.split(';').collect();
                if parts.len() != 3 {
                    return Err(Error::InvalidArgument(format!("--P needs three `;`-separated coefficients, got `{p}`")));
                }
                let coef = |s: &str| s.parse::<PCoef>();
                Ok(Problem::General {
                    theta1: theta,
                    theta2: gallery::resolve(t2)?,
                    p: [coef(parts[0])?, coef(parts[1])?, coef(parts[2])?],
                })
            }
            _ => Err(Error::InvalidArgument("--theta2 and --P must be given together".into())),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tmax < 1 {
            return Err(Error::InvalidArgument("--tmax must be at least 1".into()));
        }
        if self.hmax == Some(0) {
            return Err(Error::InvalidArgument("--hmax must be at least 1".into()));
        }
        if !(self.slack.is_finite() && self.slack >= 0.0) {
            return Err(Error::InvalidArgument("--slack must be a non-negative number".into()));
        }
        RealCtx::new(self.precision).map(|_| ())
    }

    fn ctx(&self) -> Result<RealCtx> {
        RealCtx::new(self.precision)
    }

    fn opts(&self) -> EnumOptions {
        EnumOptions {
            workers: workers(self.workers),
            precision_cap: DEFAULT_PRECISION_CAP,
        }
    }
}

fn workers(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Output target derived from `--out` and `--format`.
struct Sink<'a> {
    stem: Option<PathBuf>,
    format: Format,
    stdout: &'a mut dyn Write,
}

impl<'a> Sink<'a> {
    fn new(args: &OutArgs, stdout: &'a mut dyn Write) -> Self {
        let stem = args.out.as_ref().map(|p| match p.extension().and_then(|e| e.to_str()) {
            Some("json") | Some("csv") => p.with_extension(""),
            _ => p.clone(),
        });
        Sink {
            stem,
            format: args.format,
            stdout,
        }
    }

    fn path(&self, ext: &str) -> Option<PathBuf> {
        self.stem.as_ref().map(|s| {
            let mut name = s.as_os_str().to_owned();
            name.push(".");
            name.push(ext);
            PathBuf::from(name)
        })
    }

    fn wants_json(&self) -> bool {
        self.format != Format::Csv
    }

    fn wants_csv(&self) -> bool {
        self.format != Format::Json
    }

    fn emit(&mut self, json: Option<String>, csv: Option<Vec<u8>>, summary: &str) -> Result<()> {
        match &self.stem {
            None => {
                if let Some(j) = json.filter(|_| self.wants_json()) {
                    self.stdout.write_all(j.as_bytes())?;
                }
                if let Some(c) = csv.filter(|_| self.wants_csv()) {
                    self.stdout.write_all(&c)?;
                }
            }
            Some(stem) => {
                if let Some(j) = json.filter(|_| self.wants_json()) {
                    io::write_file(&self.path("json").unwrap(), j.as_bytes())?;
                }
                if let Some(c) = csv.filter(|_| self.wants_csv()) {
                    io::write_file(&self.path("csv").unwrap(), &c)?;
                }
                io::sidecar_log(stem, summary)?;
                writeln!(self.stdout, "{summary}")?;
            }
        }
        Ok(())
    }
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Enumerate(c) => cmd_enumerate(c, stdout, stderr),
        Command::Analyze(c) => cmd_analyze(c, stdout, stderr),
        Command::Exponents(c) => cmd_exponents(c, stdout, stderr),
        Command::OmegaStar(c) => cmd_omega_star(c, stdout, stderr),
        Command::Ledger(l) => cmd_ledger(l, stdout, stderr),
        Command::Gallery(o) => cmd_gallery(o, stdout),
        Command::Verify(c) => cmd_verify(c, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err((stage, e)) => {
            let _ = writeln!(stderr, "error [{stage}]: {e}");
            exit_code(&e)
        }
    }
}

type CmdResult = std::result::Result<i32, (&'static str, Error)>;

fn at(stage: &'static str) -> impl Fn(Error) -> (&'static str, Error) {
    move |e| (stage, e)
}

/// Cached enumeration. Partial output is kept on disk; the error is returned.
fn sequence(c: &Common, stderr: &mut dyn Write) -> std::result::Result<(MinimalSequence, String), (&'static str, Error)> {
    c.validate().map_err(at("config"))?;
    let problem = c.problem().map_err(at("config"))?;
    let ctx = c.ctx().map_err(at("config"))?;
    if let Some(w) = problem.independence_warning(&ctx).map_err(at("forms"))? {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let dir = io::cache_dir(c.cache_dir.as_deref());
    let run = io::cached_enumerate(&dir, &problem, c.norm, c.tmax, &ctx, c.opts()).map_err(at("enumerate"))?;
    let name = run.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    if let Some(e) = run.error {
        if let Some(s) = &run.sequence {
            let _ = writeln!(stderr, "partial output: {} records up to T = {} in {name}", s.len(), s.t_reached);
        }
        return Err(("enumerate", e));
    }
    Ok((run.sequence.expect("sequence on success"), name))
}

#[derive(Debug, Serialize)]
pub struct EnumerateReport {
    pub theta: String,
    pub norm: NormKind,
    pub precision_bits: u32,
    #[serde(rename = "T_reached")]
    pub t_reached: u64,
    pub records: usize,
    pub x_first: Option<[String; 3]>,
    pub x_last: Option<[String; 3]>,
    pub last_gamma: Option<f64>,
    pub cache_file: String,
    pub ties: Vec<String>,
    pub terminated: Option<String>,
}

fn cmd_enumerate(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let (seq, name) = sequence(c, stderr)?;
    let report = EnumerateReport {
        theta: seq.problem.key(),
        norm: seq.norm,
        precision_bits: seq.precision_bits(),
        t_reached: seq.t_reached,
        records: seq.len(),
        x_first: seq.records.first().map(|r| r.x.to_strings()),
        x_last: seq.records.last().map(|r| r.x.to_strings()),
        last_gamma: gamma_ratios(&seq).last().map(|g| g.1),
        cache_file: name,
        ties: seq.ties.clone(),
        terminated: seq.terminated.clone(),
    };
    let summary = format!(
        "{}: {} minimal points up to T = {}, last X = {}, last gamma = {}",
        report.theta,
        report.records,
        report.t_reached,
        seq.records.last().map_or("-".into(), |r| r.norm.to_sci_string(32)),
        report.last_gamma.map_or("-".into(), |g| format!("{g:.4}"))
    );
    let mut csv = vec![];
    io::samples_csv(&seq, &mut csv).map_err(at("output"))?;
    let mut sink = Sink::new(&c.out, stdout);
    sink.emit(Some(io::to_json(&report).map_err(at("output"))?), Some(csv), &summary)
        .map_err(at("output"))?;
    Ok(EXIT_OK)
}

fn cmd_analyze(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let (seq, _) = sequence(c, stderr)?;
    let report = structure::analyze(&seq, c.burn_in).map_err(at("analyze"))?;
    let summary = format!(
        "{}: {} triples, {} independent after burn-in, {} runs",
        report.theta,
        report.triples.len(),
        report.independent_after_burn_in,
        report.runs.len()
    );
    let mut sink = Sink::new(&c.out, stdout);
    sink.emit(Some(io::to_json(&report).map_err(at("output"))?), None, &summary)
        .map_err(at("output"))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct ExponentsReport {
    pub verdict: Verdict,
    pub omega_hat: ExponentEstimate,
    pub omega_lp: ExponentEstimate,
}

fn exponents_of(seq: &MinimalSequence, burn_in: usize, slack: f64) -> Result<ExponentsReport> {
    let hat = exponents::estimate_uniform(seq, burn_in)?;
    let lp = exponents::estimate_two_form(seq, burn_in)?;
    let verdict = exponents::verdict_from(seq.problem.key(), seq.t_reached, &hat, &lp, slack);
    Ok(ExponentsReport {
        verdict,
        omega_hat: hat,
        omega_lp: lp,
    })
}

fn cmd_exponents(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let (seq, _) = sequence(c, stderr)?;
    let mut report = exponents_of(&seq, c.burn_in, c.slack).map_err(at("exponents"))?;
    let mut sink = Sink::new(&c.out, stdout);
    if sink.wants_csv() {
        let csv_ref = sink.path("csv").map(|p| p.file_name().unwrap().to_string_lossy().into_owned());
        report.verdict.omega_hat.samples_csv_ref = csv_ref.clone();
        report.verdict.omega_lp.samples_csv_ref = csv_ref;
    }
    for w in &report.verdict.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let v = &report.verdict;
    let summary = format!(
        "{}: omega_hat ~ {:.4}, omega_lp ~ {:.4}, floor {:.4}, slack {}, consistent = {}",
        v.theta, v.omega_hat.value, v.omega_lp.value, v.floor, v.slack, v.consistent_with_theorem
    );
    let consistent = v.consistent_with_theorem;
    let mut csv = vec![];
    io::samples_csv(&seq, &mut csv).map_err(at("output"))?;
    sink.emit(Some(io::to_json(&report).map_err(at("output"))?), Some(csv), &summary)
        .map_err(at("output"))?;
    Ok(if consistent { EXIT_OK } else { EXIT_INCONSISTENT })
}

#[derive(Debug, Serialize)]
pub struct ApproximantRow {
    #[serde(rename = "H")]
    pub height: u64,
    pub coeffs: [i64; 3],
    pub xi: String,
    pub dist: String,
    pub gamma: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct OmegaStarReport {
    pub theta: String,
    #[serde(rename = "H_max")]
    pub h_max: u64,
    pub precision_bits: u32,
    pub records: Vec<ApproximantRow>,
    pub omega_star: ExponentEstimate,
    /// Present when ω_LP could be estimated at `--tmax`.
    pub diff: Option<DiffReport>,
}

fn omega_star_of(c: &Common, omega_lp: Option<f64>) -> Result<(OmegaStarReport, Vec<u8>)> {
    let spec = gallery::resolve(&c.theta)?;
    let ctx = c.ctx()?;
    let h_max = c.hmax.unwrap_or(1000);
    let recs = quadratic::enumerate_approximants(&spec, h_max, &ctx, workers(c.workers))?;
    let star = quadratic::estimate_omega_star(&recs)?;
    let mut csv = vec![];
    io::quadratic_csv(&recs, ctx.precision_bits(), &mut csv)?;
    let report = OmegaStarReport {
        theta: spec.to_string(),
        h_max,
        precision_bits: ctx.precision_bits(),
        records: recs
            .iter()
            .map(|r| ApproximantRow {
                height: r.height,
                coeffs: r.coeffs,
                xi: r.xi.to_sci_string(ctx.precision_bits()),
                dist: r.dist.to_sci_string(ctx.precision_bits()),
                gamma: r.gamma,
            })
            .collect(),
        diff: omega_lp.map(|lp| quadratic::check_diff(star.value, lp, c.slack)),
        omega_star: star,
    };
    Ok((report, csv))
}

fn cmd_omega_star(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    c.validate().map_err(at("config"))?;
    if c.theta2.is_some() {
        return Err(("config", Error::InvalidArgument("omega-star takes a single --theta".into())));
    }
    let spec = gallery::resolve(&c.theta).map_err(at("config"))?;
    quadratic::check_hypothesis(&spec, &c.ctx().map_err(at("config"))?).map_err(at("omega-star"))?;
    let (seq, _) = sequence(c, stderr)?;
    let lp = exponents::estimate_two_form(&seq, c.burn_in).ok().map(|e| e.value);
    let (report, csv) = omega_star_of(c, lp).map_err(at("omega-star"))?;
    let summary = format!(
        "{}: {} record approximants up to H = {}, omega_star ~ {:.4}{}",
        report.theta,
        report.records.len(),
        report.h_max,
        report.omega_star.value,
        report.diff.as_ref().map_or(String::new(), |d| format!(", diff holds = {}", d.holds))
    );
    let holds = report.diff.as_ref().is_none_or(|d| d.holds);
    let mut sink = Sink::new(&c.out, stdout);
    sink.emit(Some(io::to_json(&report).map_err(at("output"))?), Some(csv), &summary)
        .map_err(at("output"))?;
    Ok(if holds { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn cmd_ledger(l: &LedgerArgs, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> CmdResult {
    let q = |s: &str| s.parse::<LedgerScalar>().map_err(at("config"));
    let params = LedgerParams::new(q(&l.alpha)?, q(&l.r)?, q(&l.beta0)?).map_err(at("config"))?;
    let mut trace = ledger::contradiction_trace(&params, l.iterations).map_err(at("config"))?;
    if let Some(theta) = &l.theta {
        let ctx = RealCtx::new(l.precision).map_err(at("config"))?;
        let problem = Problem::derivative(gallery::resolve(theta).map_err(at("config"))?);
        let dir = io::cache_dir(l.cache_dir.as_deref());
        let opts = EnumOptions {
            workers: workers(None),
            precision_cap: DEFAULT_PRECISION_CAP,
        };
        let run = io::cached_enumerate(&dir, &problem, l.norm, l.tmax, &ctx, opts).map_err(at("enumerate"))?;
        if let Some(e) = run.error {
            return Err(("enumerate", e));
        }
        let seq = run.sequence.expect("sequence on success");
        let classes = structure::classify_triples(&seq).map_err(at("analyze"))?;
        let runs = structure::segment_runs(&seq.vectors(), &classes).map_err(at("analyze"))?;
        trace.predicates = Some(ledger::run_predicates(&seq, &runs, &params.r));
    }
    let summary = format!(
        "alpha = {}, r = {}, fixed point {}, contradiction at {}",
        trace.alpha,
        trace.r,
        trace.fixed_point,
        trace.contradiction_at.map_or("none".into(), |i| i.to_string())
    );
    let detected = trace.contradiction_at.is_some();
    let mut sink = Sink::new(&l.out, stdout);
    sink.emit(Some(io::to_json(&trace).map_err(at("output"))?), None, &summary)
        .map_err(at("output"))?;
    Ok(if detected { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_gallery(o: &OutArgs, stdout: &mut dyn Write) -> CmdResult {
    let g = gallery::builtin_gallery();
    let summary = format!("{} gallery entries", g.len());
    let mut sink = Sink::new(o, stdout);
    sink.emit(Some(io::to_json(&g).map_err(at("output"))?), None, &summary)
        .map_err(at("output"))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub theta: String,
    pub norm: NormKind,
    #[serde(rename = "T_reached")]
    pub t_reached: u64,
    pub records: usize,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub ledger: Option<TraceReport>,
    pub omega_star: Option<OmegaStarReport>,
    pub ok: bool,
}

/// Property checks on an analysis report.
pub fn property_checks(report: &AnalysisReport) -> Vec<Check> {
    let dependent: Vec<_> = report.triples.iter().filter(|t| t.kind == TripleKind::Dependent).collect();
    let delta_bad = report.delta.iter().filter(|d| !d.matches_product).count();
    let det_mismatch = report
        .triples
        .iter()
        .filter(|t| t.det3.is_zero() != (t.kind == TripleKind::Dependent))
        .count();
    let w_bad: Vec<String> = report
        .wronskian
        .iter()
        .filter(|w| !(w.abs_consistent && w.alternating && w.exact_equal))
        .map(|w| format!("{}..{}", w.nu, w.k))
        .collect();
    vec![
        Check {
            name: "dependent triples on a lattice",
            passed: dependent.iter().all(|t| t.t.is_some()),
            detail: format!("{} dependent triples", dependent.len()),
        },
        Check {
            name: "delta matches A·det3",
            passed: delta_bad == 0 && det_mismatch == 0,
            detail: format!("{delta_bad} enclosure misses, {det_mismatch} classification mismatches"),
        },
        Check {
            name: "wronskian conserved on runs",
            passed: w_bad.is_empty(),
            detail: if w_bad.is_empty() {
                format!("{} runs", report.wronskian.len())
            } else {
                format!("failing runs {}", w_bad.join(", "))
            },
        },
        Check {
            name: "independent triples after burn-in",
            passed: report.independent_after_burn_in >= 2,
            detail: format!("{}", report.independent_after_burn_in),
        },
    ]
}

/// Rational with denominator 1000 nearest to `v`.
fn rational_near(v: f64) -> LedgerScalar {
    LedgerScalar::new((v * 1000.0).round() as i64, 1000).expect("nonzero denominator")
}

/// With α just below the ω̂ estimate and r just below the threshold, the
/// β recursion seeded at α(α−1) must reach a contradiction.
fn ledger_cross_check(omega_hat: f64) -> std::result::Result<Option<TraceReport>, Error> {
    let alpha = rational_near(omega_hat - 0.001);
    if alpha <= LedgerScalar::int(2) {
        return Ok(None);
    }
    let r = ledger::r_threshold(&alpha)? - LedgerScalar::new(1, 100)?;
    let beta0 = ledger::jarnik_decay(&alpha);
    let params = LedgerParams::new(alpha, r, beta0)?;
    ledger::contradiction_trace(&params, 50).map(Some)
}

fn cmd_verify(c: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    c.validate().map_err(at("config"))?;
    if c.hmax.is_some() && c.theta2.is_none() {
        let spec = gallery::resolve(&c.theta).map_err(at("config"))?;
        quadratic::check_hypothesis(&spec, &c.ctx().map_err(at("config"))?).map_err(at("omega-star"))?;
    }
    let (seq, _) = sequence(c, stderr)?;
    let analysis = structure::analyze(&seq, c.burn_in).map_err(at("analyze"))?;
    let mut checks = property_checks(&analysis);
    let ex = exponents_of(&seq, c.burn_in, c.slack).map_err(at("exponents"))?;
    let ledger = ledger_cross_check(ex.verdict.omega_hat.value).map_err(at("ledger"))?;
    checks.push(Check {
        name: "ledger contradiction reached",
        passed: ledger.as_ref().is_none_or(|t| t.contradiction_at.is_some()),
        detail: match &ledger {
            None => "skipped: omega_hat estimate at most 2".into(),
            Some(t) => format!("alpha = {}, contradiction at {:?}", t.alpha, t.contradiction_at),
        },
    });
    let omega_star = match c.hmax {
        Some(_) if c.theta2.is_none() => {
            Some(omega_star_of(c, Some(ex.omega_lp.value)).map_err(at("omega-star"))?.0)
        }
        _ => None,
    };
    let props_ok = checks.iter().all(|c| c.passed);
    let consistent = ex.verdict.consistent_with_theorem;
    let diff_ok = omega_star.as_ref().and_then(|o| o.diff.as_ref()).is_none_or(|d| d.holds);
    let report = VerifyReport {
        theta: seq.problem.key(),
        norm: seq.norm,
        t_reached: seq.t_reached,
        records: seq.len(),
        checks,
        verdict: ex.verdict,
        ledger,
        omega_star,
        ok: props_ok && consistent && diff_ok,
    };
    for ch in report.checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(stderr, "check failed: {} ({})", ch.name, ch.detail);
    }
    let summary = format!(
        "{}: checks {}, verdict consistent = {}, ok = {}",
        report.theta,
        if props_ok { "passed" } else { "FAILED" },
        consistent,
        report.ok
    );
    let mut sink = Sink::new(&c.out, stdout);
    sink.emit(Some(io::to_json(&report).map_err(at("output"))?), None, &summary)
        .map_err(at("output"))?;
    Ok(if !props_ok {
        EXIT_FAILED
    } else if !(consistent && diff_ok) {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    })
}

pub fn main_with_env() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}
