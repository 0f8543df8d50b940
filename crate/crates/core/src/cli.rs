//! Command-line front end. [`run`] does all the work and returns the text
//! to print together with the exit code, so the binary is a thin wrapper.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::beatty::{
    continuation_domain, expected_residue, near_pole, pole_lattice, PoleLattice, Route,
    SeriesEvaluator, SeriesId, SeriesKind,
};
use crate::engine::{residue_probe, Complex64, EvalResult};
use crate::error::{Error, Result};
use crate::realspec::{convergents, cf_expand, eta, type_estimate, RealSpec, SpecKind};
use crate::verify::{self, VerificationReport};

/// Environment variable read for the worker count when `--jobs` is absent.
pub const JOBS_ENV: &str = "BEATTY_ZETA_JOBS";

/// Grid points closer than this to a predicted pole are skipped.
pub const POLE_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub tol: f64,
    pub n_max: usize,
    pub m_max: usize,
    pub seed: u64,
    pub format: Format,
    pub jobs: Option<usize>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            tol: 1e-8,
            n_max: 1_000_000,
            m_max: 64,
            seed: verify::DEFAULT_SEED,
            format: Format::Json,
            jobs: None,
        }
    }
}

impl CliConfig {
    /// Reads `key = value` lines over the defaults. `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = CliConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse(format!("config line {}: bad {} {:?}", i + 1, what, value));
            match key {
                "tol" => cfg.tol = value.parse().map_err(|_| bad("tol"))?,
                "n_max" => cfg.n_max = parse_count(value).ok_or_else(|| bad("n_max"))?,
                "m_max" => cfg.m_max = value.parse().map_err(|_| bad("m_max"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "jobs" => cfg.jobs = Some(value.parse().map_err(|_| bad("jobs"))?),
                "format" => {
                    cfg.format = Format::from_str(value, true).map_err(|_| bad("format"))?
                }
                _ => return Err(Error::Parse(format!("config line {}: unknown key {:?}", i + 1, key))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-2).contains(&self.tol) {
            return Err(Error::InvalidSpec(format!("tol must lie in [1e-12, 1e-2], got {:e}", self.tol)));
        }
        if self.n_max < 1000 {
            return Err(Error::InvalidSpec(format!("n_max must be at least 1000, got {}", self.n_max)));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidSpec("jobs must be positive".into()));
        }
        Ok(())
    }
}

/// Accepts `1000000`, `1e6` and `1_000_000`.
fn parse_count(text: &str) -> Option<usize> {
    let t = text.replace('_', "");
    t.parse::<usize>().ok().or_else(|| {
        let x: f64 = t.parse().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < 1e18).then_some(x as usize)
    })
}

#[derive(Parser, Debug)]
#[command(name = "beatty-zeta", version, about = "Dirichlet series of Beatty and Sturmian sequences")]
struct Cli {
    /// output format
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// key=value config file (tol, n_max, m_max, seed, format, jobs)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads; defaults to $BEATTY_ZETA_JOBS, then all cores
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    ZetaBeatty,
    Sturmian,
    SawtoothJ,
    /// signed q selects the plus or minus set
    Hecke,
    HeckePlus,
    HeckeMinus,
    HurwitzBeatty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    CoefficientIdentity,
    Rayleigh,
    SawtoothIdentity,
    FunctionalRelations,
    Lemma1Truncation,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continued fraction, convergents, type estimate and period data.
    Cf {
        alpha: String,
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
    /// Evaluate a series at one point or over a grid.
    Eval {
        kind: KindArg,
        alpha: String,
        /// "a+bi" or "a,b"
        #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
        s: Option<String>,
        /// "s0:s1:ds,t0:t1:dt"
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<i64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// coefficient table length
        #[arg(long)]
        nmax: Option<String>,
        #[arg(long)]
        mmax: Option<usize>,
    },
    /// Candidate pole lattice of a quadratic irrational.
    Poles {
        alpha: String,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        /// also list the lattice of J
        #[arg(long)]
        include_j: bool,
    },
    /// Numerical residue at s = 1 against the predicted one.
    Residue {
        kind: KindArg,
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<i64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        nmax: Option<String>,
    },
    /// Run a verification suite; exit status 1 when a check fails.
    Verify {
        suite: SuiteArg,
        /// required except for lemma1-truncation (default phi)
        alpha: Option<String>,
        /// index range for exact suites, table length for numeric ones
        #[arg(long)]
        nmax: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// comma-separated q values
        #[arg(long, default_value = "1")]
        q: String,
        /// evaluation grid "s0:s1:ds,t0:t1:dt"
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// extra seeded random points in 0.2 < Re(s) <= 2.5, |Im(s)| <= 5
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long)]
        tol: Option<f64>,
        /// random points for sawtooth-identity
        #[arg(long, default_value_t = 1000)]
        grid_size: usize,
        /// comma-separated m0 values for lemma1-truncation
        #[arg(long, default_value = "2,3")]
        m0: String,
        /// semicolon-separated points for lemma1-truncation
        #[arg(long, default_value = "0.5;1.5", allow_hyphen_values = true)]
        points: String,
    },
}

/// What the process prints and returns.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, stderr: String::new(), code: 0 }
    }

    fn error(e: &Error) -> Self {
        Outcome { stdout: String::new(), stderr: format!("error: {}\n", e), code: e.exit_code() }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome::ok(text)
                }
                _ => Outcome { stdout: String::new(), stderr: text, code: 2 },
            };
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return Outcome::error(&e),
    };
    let jobs = cfg
        .jobs
        .or_else(|| std::env::var(JOBS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&j| j > 0);
    match jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &cfg)),
            Err(e) => Outcome {
                stdout: String::new(),
                stderr: format!("error: thread pool: {}\n", e),
                code: 1,
            },
        },
        None => dispatch(&cli.command, &cfg),
    }
}

fn load_config(cli: &Cli) -> Result<CliConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("config {}: {}", path.display(), e)))?;
            CliConfig::from_kv(&text)?
        }
        None => CliConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: &Command, cfg: &CliConfig) -> Outcome {
    let res = match cmd {
        Command::Cf { alpha, terms } => cmd_cf(alpha, *terms, cfg),
        Command::Eval { kind, alpha, s, grid, q, gamma, tol, nmax, mmax } => {
            let mut cfg = cfg.clone();
            if let Err(e) = override_numeric(&mut cfg, *tol, nmax.as_deref(), *mmax) {
                return Outcome::error(&e);
            }
            return match cmd_eval(*kind, alpha, s.as_deref(), grid.as_deref(), *q, *gamma, &cfg) {
                Ok((text, None)) => Outcome::ok(text),
                Ok((text, Some(e))) => Outcome { stdout: text, ..Outcome::error(&e) },
                Err(e) => Outcome::error(&e),
            };
        }
        Command::Poles { alpha, kmax, nmax, include_j } => cmd_poles(alpha, *kmax, *nmax, *include_j, cfg),
        Command::Residue { kind, alpha, q, gamma, tol, nmax } => {
            let mut cfg = cfg.clone();
            if let Err(e) = override_numeric(&mut cfg, *tol, nmax.as_deref(), None) {
                return Outcome::error(&e);
            }
            cmd_residue(*kind, alpha, *q, *gamma, &cfg)
        }
        Command::Verify { suite, alpha, nmax, seed, q, grid, random, tol, grid_size, m0, points } => {
            let mut cfg = cfg.clone();
            if let Some(t) = tol {
                cfg.tol = *t;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let nmax = match nmax.as_deref().map(|t| parse_count(t).ok_or_else(|| Error::Parse(format!("bad --nmax {:?}", t)))) {
                None => None,
                Some(Ok(n)) => Some(n),
                Some(Err(e)) => return Outcome::error(&e),
            };
            let args = VerifyArgs {
                suite: *suite,
                alpha: alpha.as_deref(),
                nmax,
                q,
                grid: grid.as_deref(),
                random: *random,
                grid_size: *grid_size,
                m0,
                points,
            };
            return cmd_verify(&args, &cfg);
        }
    };
    match res {
        Ok(text) => Outcome::ok(text),
        Err(e) => Outcome::error(&e),
    }
}

fn override_numeric(cfg: &mut CliConfig, tol: Option<f64>, nmax: Option<&str>, mmax: Option<usize>) -> Result<()> {
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if let Some(n) = nmax {
        cfg.n_max = parse_count(n).ok_or_else(|| Error::Parse(format!("bad --nmax {:?}", n)))?;
    }
    if let Some(m) = mmax {
        cfg.m_max = m;
    }
    cfg.validate()
}

fn parse_alpha(text: &str) -> Result<RealSpec> {
    text.parse()
}

fn parse_f64(text: &str) -> Result<f64> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("bad number {:?}", text)))
}

/// `"a+bi"`, `"a-bi"`, `"a"`, `"bi"` or `"a,b"`; `.` is always the decimal point.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty complex number".into()));
    }
    if let Some((a, b)) = t.split_once(',') {
        return Ok(Complex64::new(parse_f64(a)?, parse_f64(b)?));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(parse_f64(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_f64(s),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(parse_f64(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

fn parse_axis(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![parse_f64(v)?]),
        [a, b, d] => {
            let (a, b, d) = (parse_f64(a)?, parse_f64(b)?, parse_f64(d)?);
            if a == b {
                return Ok(vec![a]);
            }
            if !(d > 0.0) || b < a {
                return Err(Error::Parse(format!("bad grid axis {:?}: need start <= end and step > 0", text)));
            }
            let n = ((b - a) / d + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(Error::Parse(format!("grid axis {:?} has too many points", text)));
            }
            Ok((0..=n).map(|k| a + k as f64 * d).collect())
        }
        _ => Err(Error::Parse(format!("bad grid axis {:?}", text))),
    }
}

/// `"s0:s1:ds,t0:t1:dt"` in canonical (σ, t) order; a missing `t` axis means `t = 0`.
pub fn parse_grid(text: &str) -> Result<Vec<Complex64>> {
    let (sa, ta) = text.split_once(',').unwrap_or((text, "0"));
    let sigmas = parse_axis(sa)?;
    let ts = parse_axis(ta)?;
    Ok(sigmas
        .iter()
        .flat_map(|&x| ts.iter().map(move |&y| Complex64::new(x, y)))
        .collect())
}

fn parse_list<T: std::str::FromStr>(text: &str, sep: char, what: &str) -> Result<Vec<T>> {
    text.split(sep)
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| Error::Parse(format!("bad {} {:?}", what, p))))
        .collect()
}

fn series_id(kind: KindArg, alpha: RealSpec, q: Option<i64>, gamma: Option<f64>) -> Result<SeriesId> {
    let hecke = matches!(kind, KindArg::Hecke | KindArg::HeckePlus | KindArg::HeckeMinus);
    if q.is_some() && !hecke {
        return Err(Error::InvalidSpec("--q applies to the Hecke series only".into()));
    }
    if gamma.is_some() && kind != KindArg::HurwitzBeatty {
        return Err(Error::InvalidSpec("--gamma applies to hurwitz-beatty only".into()));
    }
    match kind {
        KindArg::ZetaBeatty => Ok(SeriesId::zeta_beatty(alpha)),
        KindArg::Sturmian => Ok(SeriesId::sturmian(alpha)),
        KindArg::SawtoothJ => Ok(SeriesId::sawtooth_j(alpha)),
        KindArg::Hecke => {
            let q = q.ok_or_else(|| Error::InvalidSpec("hecke needs --q".into()))?;
            SeriesId::hecke(alpha, q)
        }
        KindArg::HeckePlus | KindArg::HeckeMinus => {
            let q = q.unwrap_or(1);
            if q <= 0 {
                return Err(Error::InvalidSpec("hecke-plus and hecke-minus take q > 0".into()));
            }
            SeriesId::hecke(alpha, if kind == KindArg::HeckeMinus { -q } else { q })
        }
        KindArg::HurwitzBeatty => {
            let g = gamma.ok_or_else(|| Error::InvalidSpec("hurwitz-beatty needs --gamma".into()))?;
            SeriesId::hurwitz_beatty(alpha, g)
        }
    }
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn cmd_cf(alpha_text: &str, terms: usize, cfg: &CliConfig) -> Result<String> {
    let alpha = parse_alpha(alpha_text)?;
    if terms == 0 {
        return Err(Error::InvalidSpec("--terms must be positive".into()));
    }
    let cf = cf_expand(&alpha, terms)?;
    let available = cf.len().min(terms);
    let conv = convergents(&cf, available)?;
    let tau = if available >= 3 && !cf.finite { type_estimate(&cf, available).ok() } else { None };
    let eta_info = if alpha.kind() == SpecKind::Quadratic {
        let e = eta(&cf)?;
        Some(json!({
            "inverse": e.inverse.to_string(),
            "inverse_value": (-e.log_eta).exp(),
            "log_eta": e.log_eta,
            "spacing": 2.0 * std::f64::consts::PI / e.log_eta.abs(),
        }))
    } else {
        None
    };
    let quotients: Vec<String> = std::iter::once(cf.a0.to_string())
        .chain(cf.partial_quotients.iter().map(|a| a.to_string()))
        .take(available)
        .collect();
    match cfg.format {
        Format::Json => Ok(json_text(&json!({
            "alpha": alpha.to_string(),
            "value": alpha.to_f64(),
            "quotients": quotients,
            "finite": cf.finite,
            "reliable_terms": cf.reliable_terms,
            "period": cf.period,
            "convergents": conv.iter().map(|(p, q)| json!({ "p": p.to_string(), "q": q.to_string() })).collect::<Vec<_>>(),
            "type_estimate": tau,
            "eta": eta_info,
        }))),
        Format::Csv => {
            let rows: Vec<Vec<String>> = conv
                .iter()
                .enumerate()
                .map(|(k, (p, q))| vec![k.to_string(), quotients[k].clone(), p.to_string(), q.to_string()])
                .collect();
            Ok(csv_text(&["k", "a_k", "p_k", "q_k"], &rows))
        }
        Format::Text => {
            let mut out = String::new();
            let head = quotients.first().cloned().unwrap_or_default();
            let tail = quotients.iter().skip(1).cloned().collect::<Vec<_>>().join(",");
            let dots = if cf.finite { "" } else { ",..." };
            let _ = writeln!(out, "alpha = {} ~ {}", alpha, alpha.to_f64());
            let _ = writeln!(out, "cf    = [{};{}{}]", head, tail, dots);
            if let Some(p) = &cf.period {
                let _ = writeln!(out, "period: preperiod {}, length {}", p.preperiod, p.length);
            }
            if let Some(t) = &tau {
                let _ = writeln!(out, "tau_hat = {:.4} (window {:?})", t.tau_hat, t.window);
            }
            if let Some(e) = &eta_info {
                let _ = writeln!(out, "eta^-1 = {}, log eta = {:.10}", e["inverse"].as_str().unwrap_or(""), e["log_eta"]);
            }
            for (k, (p, q)) in conv.iter().enumerate() {
                let _ = writeln!(out, "{:>4}  {}/{}", k, p, q);
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct Query<'a> {
    series: String,
    kind: SeriesKind,
    alpha: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<&'a str>,
    tol: f64,
    n_max: usize,
}

fn query<'a>(id: &SeriesId, s: Option<Complex64>, grid: Option<&'a str>, cfg: &CliConfig) -> Query<'a> {
    Query {
        series: id.to_string(),
        kind: id.kind,
        alpha: id.alpha.to_string(),
        q: id.q,
        gamma: id.gamma,
        s: s.map(|s| json!({ "re": s.re, "im": s.im })),
        grid,
        tol: cfg.tol,
        n_max: cfg.n_max,
    }
}

fn check_numeric_domain(id: &SeriesId, s: Complex64) -> Result<()> {
    let d = continuation_domain(id);
    if s.re <= d.numeric_left {
        return Err(Error::OutOfDomain(format!(
            "{} is evaluated for Re(s) > {}, got {}",
            id.kind, d.numeric_left, s.re
        )));
    }
    Ok(())
}

fn evaluate_point(ev: &SeriesEvaluator, id: &SeriesId, s: Complex64, tol: f64) -> Result<EvalResult> {
    check_numeric_domain(id, s)?;
    ev.evaluate(id, s, tol)
}

fn predicted_poles(id: &SeriesId, points: &[Complex64]) -> Option<PoleLattice> {
    if id.alpha.kind() != SpecKind::Quadratic {
        return None;
    }
    let t_max = points.iter().map(|s| s.im.abs()).fold(0.0, f64::max);
    let s_min = points.iter().map(|s| s.re).fold(0.0, f64::min);
    let k_max = (-s_min).ceil().max(0.0) as usize + 1;
    let probe = pole_lattice(&id.alpha, 1, 0, false).ok()?;
    let n_max = (t_max / probe.spacing).ceil() as usize + 1;
    pole_lattice(&id.alpha, k_max, n_max, id.kind == SeriesKind::SawtoothJ).ok()
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    kind: KindArg,
    alpha_text: &str,
    s_text: Option<&str>,
    grid_text: Option<&str>,
    q: Option<i64>,
    gamma: Option<f64>,
    cfg: &CliConfig,
) -> Result<(String, Option<Error>)> {
    let alpha = parse_alpha(alpha_text)?;
    let id = series_id(kind, alpha, q, gamma)?;
    let ev = SeriesEvaluator { n_max: cfg.n_max, m_max: cfg.m_max };
    match (s_text, grid_text) {
        (Some(st), None) => {
            let s = parse_complex(st)?;
            let r = evaluate_point(&ev, &id, s, cfg.tol)?;
            let text = match cfg.format {
                Format::Json => json_text(&json!({
                    "query": query(&id, Some(s), None, cfg),
                    "method": r.method,
                    "value": { "re": r.value.re, "im": r.value.im },
                    "err": r.err,
                    "warnings": r.warnings,
                })),
                Format::Csv => csv_text(
                    &["sigma", "t", "re", "im", "err", "method"],
                    &[vec![
                        s.re.to_string(),
                        s.im.to_string(),
                        r.value.re.to_string(),
                        r.value.im.to_string(),
                        r.err.to_string(),
                        r.method.to_string(),
                    ]],
                ),
                Format::Text => {
                    let mut out = format!(
                        "{}(s = {}) = {} {:+}i  (err {:.3e}, {})\n",
                        id, fmt_s(s), r.value.re, r.value.im, r.err, r.method
                    );
                    for w in &r.warnings {
                        let _ = writeln!(out, "warning: {}", w);
                    }
                    out
                }
            };
            Ok((text, None))
        }
        (None, Some(gt)) => eval_grid(&ev, &id, gt, cfg),
        _ => Err(Error::InvalidSpec("eval needs exactly one of --s and --grid".into())),
    }
}

fn fmt_s(s: Complex64) -> String {
    format!("{}{:+}i", s.re, s.im)
}

struct GridRow {
    s: Complex64,
    result: std::result::Result<EvalResult, Error>,
}

/// The table, and the first failing point's error if any.
fn eval_grid(
    ev: &SeriesEvaluator,
    id: &SeriesId,
    grid_text: &str,
    cfg: &CliConfig,
) -> Result<(String, Option<Error>)> {
    let points = parse_grid(grid_text)?;
    let lattice = predicted_poles(id, &points);
    let (skipped, kept): (Vec<Complex64>, Vec<Complex64>) = points
        .iter()
        .partition(|&&s| near_pole(s, lattice.as_ref(), POLE_RADIUS));
    let rows: Vec<GridRow> = kept
        .par_iter()
        .map(|&s| GridRow { s, result: evaluate_point(ev, id, s, cfg.tol) })
        .collect();
    let first_failure = rows.iter().find_map(|r| r.result.as_ref().err().cloned());
    let text = match cfg.format {
        Format::Json => {
            let pts: Vec<Value> = rows
                .iter()
                .map(|r| match &r.result {
                    Ok(v) => json!({
                        "sigma": r.s.re, "t": r.s.im,
                        "method": v.method,
                        "value": { "re": v.value.re, "im": v.value.im },
                        "err": v.err,
                        "warnings": v.warnings,
                    }),
                    Err(e) => json!({ "sigma": r.s.re, "t": r.s.im, "error": e.to_string(), "code": e.exit_code() }),
                })
                .collect();
            let skips: Vec<Value> = skipped
                .iter()
                .map(|s| json!({ "sigma": s.re, "t": s.im, "reason": "within 1e-6 of a predicted pole" }))
                .collect();
            json_text(&json!({ "query": query(id, None, Some(grid_text), cfg), "points": pts, "skipped": skips }))
        }
        Format::Csv => {
            let data: Vec<Vec<String>> = rows
                .iter()
                .map(|r| match &r.result {
                    Ok(v) => vec![
                        r.s.re.to_string(),
                        r.s.im.to_string(),
                        v.value.re.to_string(),
                        v.value.im.to_string(),
                        v.err.to_string(),
                        v.method.to_string(),
                    ],
                    Err(e) => vec![
                        r.s.re.to_string(),
                        r.s.im.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        format!("error: {}", e),
                    ],
                })
                .collect();
            let mut out = csv_text(&["sigma", "t", "re", "im", "err", "method"], &data);
            for s in &skipped {
                let _ = writeln!(out, "# skipped sigma={} t={}: within 1e-6 of a predicted pole", s.re, s.im);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for r in &rows {
                match &r.result {
                    Ok(v) => {
                        let _ = writeln!(
                            out,
                            "{:>10} {:>10}  {:>22} {:>22}  {:.2e}  {}",
                            r.s.re, r.s.im, v.value.re, v.value.im, v.err, v.method
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(out, "{:>10} {:>10}  error: {}", r.s.re, r.s.im, e);
                    }
                }
            }
            for s in &skipped {
                let _ = writeln!(out, "skipped {}: near a predicted pole", fmt_s(*s));
            }
            out
        }
    };
    Ok((text, first_failure))
}

fn cmd_poles(alpha_text: &str, k_max: usize, n_max: usize, include_j: bool, cfg: &CliConfig) -> Result<String> {
    let alpha = parse_alpha(alpha_text)?;
    let l = pole_lattice(&alpha, k_max, n_max, include_j)?;
    Ok(match cfg.format {
        Format::Json => json_text(&l),
        Format::Csv => {
            let mut rows = vec![vec!["principal".into(), "1".into(), "0".into()]];
            for p in &l.lattice {
                rows.push(vec!["lattice".into(), p.re.to_string(), p.im.to_string()]);
            }
            for p in l.j_lattice.iter().flatten() {
                rows.push(vec!["j_lattice".into(), p.re.to_string(), p.im.to_string()]);
            }
            csv_text(&["set", "re", "im"], &rows)
        }
        Format::Text => {
            let mut out = format!(
                "alpha = {}\neta^-1 = {}\nspacing 2pi/|log eta| = {:.10}\nprincipal pole 1, residue {:.10}\n{}\n",
                l.alpha, l.eta_inverse, l.spacing, l.principal.residue, l.provenance
            );
            for p in &l.lattice {
                let _ = writeln!(out, "  {} {:+.6}i", p.re, p.im);
            }
            if let Some(j) = &l.j_lattice {
                let _ = writeln!(out, "J lattice:");
                for p in j {
                    let _ = writeln!(out, "  {} {:+.6}i", p.re, p.im);
                }
            }
            out
        }
    })
}

fn cmd_residue(kind: KindArg, alpha_text: &str, q: Option<i64>, gamma: Option<f64>, cfg: &CliConfig) -> Result<String> {
    let alpha = parse_alpha(alpha_text)?;
    let id = series_id(kind, alpha, q, gamma)?;
    let ev = SeriesEvaluator { n_max: cfg.n_max, m_max: cfg.m_max };
    let f = |s: Complex64, t: f64| ev.evaluate_lenient(&id, s, t, Route::Auto);
    let residue = residue_probe(&f, cfg.tol)?;
    let expected = expected_residue(&id)?;
    let abs_error = (residue - expected).abs();
    Ok(match cfg.format {
        Format::Json => json_text(&json!({
            "query": query(&id, None, None, cfg),
            "residue": residue,
            "expected": expected,
            "abs_error": abs_error,
        })),
        Format::Csv => csv_text(
            &["series", "residue", "expected", "abs_error"],
            &[vec![id.to_string(), residue.to_string(), expected.to_string(), abs_error.to_string()]],
        ),
        Format::Text => format!("{}: residue {} (expected {}, |diff| {:.3e})\n", id, residue, expected, abs_error),
    })
}

struct VerifyArgs<'a> {
    suite: SuiteArg,
    alpha: Option<&'a str>,
    nmax: Option<usize>,
    q: &'a str,
    grid: Option<&'a str>,
    random: usize,
    grid_size: usize,
    m0: &'a str,
    points: &'a str,
}

fn default_relation_grid() -> Vec<Complex64> {
    [0.5, 1.5, 2.0]
        .iter()
        .flat_map(|&x| [Complex64::new(x, 0.0), Complex64::new(x, 2.0)])
        .collect()
}

fn run_suite(a: &VerifyArgs<'_>, cfg: &CliConfig) -> Result<VerificationReport> {
    let alpha = || -> Result<RealSpec> {
        parse_alpha(a.alpha.ok_or_else(|| Error::InvalidSpec("this suite needs an alpha spec".into()))?)
    };
    match a.suite {
        SuiteArg::CoefficientIdentity => verify::suite_coefficient_identity(&alpha()?, a.nmax.unwrap_or(100_000)),
        SuiteArg::Rayleigh => verify::suite_rayleigh(&alpha()?, a.nmax.unwrap_or(100_000)),
        SuiteArg::SawtoothIdentity => verify::suite_sawtooth_identity(alpha()?.to_f64(), a.grid_size, cfg.seed),
        SuiteArg::FunctionalRelations => {
            let alpha = alpha()?;
            let q_list: Vec<i64> = parse_list(a.q, ',', "q")?;
            let mut grid = match a.grid {
                Some(g) => parse_grid(g)?,
                None => default_relation_grid(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..a.random {
                let x = 2.5 - rng.gen::<f64>() * 2.3;
                let y = (rng.gen::<f64>() * 10.0 - 5.0) * 1000.0;
                grid.push(Complex64::new((x * 1000.0).round() / 1000.0, y.round() / 1000.0));
            }
            let ev = SeriesEvaluator { n_max: a.nmax.unwrap_or(cfg.n_max), m_max: cfg.m_max };
            let mut r = verify::suite_functional_relations(&ev, &alpha, &q_list, &grid, cfg.tol)?;
            r.params["seed"] = json!(cfg.seed);
            r.params["random_points"] = json!(a.random);
            Ok(r)
        }
        SuiteArg::Lemma1Truncation => {
            if let Some(t) = a.alpha {
                if parse_alpha(t)? != RealSpec::phi() {
                    return Err(Error::InvalidSpec("lemma1-truncation runs on the coefficients of J_phi".into()));
                }
            }
            let q_list: Vec<usize> = parse_list(a.q, ',', "q")?;
            let m0: Vec<usize> = parse_list(a.m0, ',', "m0")?;
            let pts: Vec<Complex64> = a
                .points
                .split(';')
                .filter(|p| !p.trim().is_empty())
                .map(parse_complex)
                .collect::<Result<_>>()?;
            let n = a.nmax.unwrap_or(1 << 16);
            let reports: Vec<VerificationReport> = q_list
                .iter()
                .map(|&q| verify::suite_lemma1_truncation(q, &m0, &pts, n))
                .collect::<Result<_>>()?;
            Ok(merge_reports("lemma1_truncation", json!({ "q": q_list, "m0": m0, "n_max": n }), reports))
        }
    }
}

fn merge_reports(suite: &str, params: Value, reports: Vec<VerificationReport>) -> VerificationReport {
    let mut checks = Vec::new();
    for r in reports {
        let q = r.params.get("q").cloned().unwrap_or(Value::Null);
        for mut c in r.checks {
            c.description = format!("q = {}: {}", q, c.description);
            checks.push(c);
        }
    }
    checks.sort_by(|a, b| a.description.cmp(&b.description));
    let pass = checks.iter().all(|c| c.pass);
    VerificationReport { suite: suite.into(), params, checks, pass }
}

fn cmd_verify(a: &VerifyArgs<'_>, cfg: &CliConfig) -> Outcome {
    let report = match run_suite(a, cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::error(&e),
    };
    let text = match cfg.format {
        Format::Json => json_text(&report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.description.clone(),
                        c.deviation.to_string(),
                        c.bound.to_string(),
                        c.pass.to_string(),
                        c.skipped.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            csv_text(&["description", "deviation", "bound", "pass", "skipped"], &rows)
        }
        Format::Text => {
            let mut out = format!("{}: {}\n", report.suite, if report.pass { "pass" } else { "FAIL" });
            for c in &report.checks {
                let mark = match (&c.skipped, c.pass) {
                    (Some(_), true) => "skip",
                    (_, true) => "ok",
                    (_, false) => "FAIL",
                };
                let _ = write!(out, "  [{}] {}: {:.3e} <= {:.3e}", mark, c.description, c.deviation, c.bound);
                if let Some(why) = &c.skipped {
                    let _ = write!(out, " ({})", why);
                }
                out.push('\n');
            }
            out
        }
    };
    Outcome { stdout: text, stderr: String::new(), code: if report.pass { 0 } else { 1 } }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(parse_complex("0.5+14.1i").unwrap(), Complex64::new(0.5, 14.1));
        assert_eq!(parse_complex("-0.5-2i").unwrap(), Complex64::new(-0.5, -2.0));
        assert_eq!(parse_complex("1e-3+1e+2i").unwrap(), Complex64::new(1e-3, 100.0));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(parse_complex("1-i").unwrap(), Complex64::new(1.0, -1.0));
        assert_eq!(parse_complex("0.25, -3").unwrap(), Complex64::new(0.25, -3.0));
        assert!(parse_complex("1,5,2").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("1.5:2.5:0.5,-1:1:1").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], Complex64::new(1.5, -1.0));
        assert_eq!(g[8], Complex64::new(2.5, 1.0));
        assert_eq!(parse_grid("2").unwrap(), vec![Complex64::new(2.0, 0.0)]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert!(parse_grid("2:1:0.5").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }

    #[test]
    fn config_parsing_and_limits() {
        let c = CliConfig::from_kv("tol = 1e-6\n# comment\nn_max=1e5\nformat=csv\nseed = 7\n").unwrap();
        assert_eq!(c.tol, 1e-6);
        assert_eq!(c.n_max, 100_000);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.seed, 7);
        assert!(CliConfig::from_kv("tol=1e-13").is_err());
        assert!(CliConfig::from_kv("tol=0.5").is_err());
        assert!(CliConfig::from_kv("n_max=999").is_err());
        assert!(CliConfig::from_kv("colour=blue").is_err());
        assert!(CliConfig::from_kv("tol").is_err());
        assert_eq!(CliConfig::from_kv("").unwrap(), CliConfig::default());
    }
}
