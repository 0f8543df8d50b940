//! Identity-verification suites with structured reports.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::beatty::{Route, SeriesEvaluator, SeriesId};
use crate::engine::{
    binom_neg_s, binomial_shift_lenient, pow_neg, riemann_zeta, shift_truncation_bound,
    Complex64, EvalResult, Method, ShiftSign,
};
use crate::error::{Error, Result};
use crate::realspec::RealSpec;
use crate::sequences::{
    hecke_indicator, materialize_cached, sawtooth, sawtooth_at, sturmian_coefficient,
    CoefficientStream, StreamTable,
};

/// Seed for randomized grids unless one is given.
pub const DEFAULT_SEED: u64 = 0x5eed_beef;

/// Largest fraction of skipped grid points a suite tolerates.
pub const MAX_SKIP_FRACTION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub description: String,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
    /// everything needed to replay the check
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl Check {
    fn new(description: impl Into<String>, deviation: f64, bound: f64, inputs: Value) -> Self {
        Check {
            description: description.into(),
            deviation,
            bound,
            pass: deviation <= bound,
            inputs,
            skipped: None,
        }
    }

    fn skip(description: impl Into<String>, reason: impl Into<String>, inputs: Value) -> Self {
        Check {
            description: description.into(),
            deviation: 0.0,
            bound: 0.0,
            pass: true,
            inputs,
            skipped: Some(reason.into()),
        }
    }
}

/// Field order is fixed: suite, params, checks, pass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerificationReport {
    fn assemble(suite: &str, params: Value, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.description.cmp(&b.description));
        let pass = checks.iter().all(|c| c.pass);
        VerificationReport { suite: suite.into(), params, checks, pass }
    }

    /// Appends the skip-fraction check over the checks present so far.
    fn with_skip_limit(mut self) -> Self {
        let total = self.checks.len();
        let skipped = self.checks.iter().filter(|c| c.skipped.is_some()).count();
        let frac = if total == 0 { 0.0 } else { skipped as f64 / total as f64 };
        self.checks.push(Check::new(
            "~ skipped fraction",
            frac,
            MAX_SKIP_FRACTION,
            json!({ "skipped": skipped, "total": total }),
        ));
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn skipped(&self) -> usize {
        self.checks.iter().filter(|c| c.skipped.is_some()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn require_irrational_above_one(alpha: &RealSpec) -> Result<()> {
    if alpha.is_rational() {
        return Err(Error::RationalAlpha);
    }
    if alpha.floor()? < 1.into() {
        return Err(Error::InvalidSpec(format!("suite needs alpha > 1, got {}", alpha)));
    }
    Ok(())
}

fn to_u64(x: num_bigint::BigInt) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::InvalidSpec("Beatty term out of range".into()))
}

/// Marks `⌊αm⌋ ≤ n_max`, `m ≥ 1`, in a membership count array.
fn beatty_counts(alpha: &RealSpec, n_max: usize) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; n_max + 1];
    let m_max = (n_max as f64 / alpha.to_f64()).ceil() as u64 + 2;
    let terms: Vec<u64> = (1..m_max as usize + 1)
        .into_par_iter()
        .with_min_len(4096)
        .map(|m| to_u64(alpha.floor_mul(m as i64)?))
        .collect::<Result<_>>()?;
    for t in terms {
        if (t as usize) <= n_max {
            counts[t as usize] += 1;
        }
    }
    Ok(counts)
}

/// `⌈β(n+1)⌉ − ⌈βn⌉ = χ_{B(α)}(n)` for `n ≤ n_max`, together with
/// `a_1(S_α) = 1` and `a_n(S_α) = χ_{A_β}(n)` for `2 ≤ n ≤ min(n_max, 10⁴)`.
pub fn suite_coefficient_identity(alpha: &RealSpec, n_max: usize) -> Result<VerificationReport> {
    require_irrational_above_one(alpha)?;
    let beta = alpha.reciprocal();
    let counts = beatty_counts(alpha, n_max)?;
    let mismatches: Vec<usize> = (1..n_max + 1)
        .into_par_iter()
        .with_min_len(4096)
        .map(|n| {
            let lhs = beta.ceil_mul(n as i64 + 1)? - beta.ceil_mul(n as i64)?;
            Ok((lhs != counts[n].into()).then_some(n))
        })
        .collect::<Result<Vec<Option<usize>>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut checks = vec![Check::new(
        "ceil differences of beta match the Beatty indicator",
        mismatches.len() as f64,
        0.0,
        json!({ "n_range": [1, n_max], "first_mismatch": mismatches.first() }),
    )];

    let n_sub = n_max.min(10_000) as u64;
    let sub_mismatches: Vec<u64> = (1..=n_sub)
        .into_par_iter()
        .map(|n| {
            let a = sturmian_coefficient(&beta, n)?;
            let want = if n == 1 { true } else { hecke_indicator(&beta, 1, n)? };
            Ok((a != (want as u8).into()).then_some(n))
        })
        .collect::<Result<Vec<Option<u64>>>>()?
        .into_iter()
        .flatten()
        .collect();
    checks.push(Check::new(
        "Sturmian coefficients match 1 + Hecke set of beta",
        sub_mismatches.len() as f64,
        0.0,
        json!({ "n_range": [1, n_sub], "first_mismatch": sub_mismatches.first() }),
    ));
    Ok(VerificationReport::assemble(
        "coefficient_identity",
        json!({ "alpha": alpha.to_string(), "n_max": n_max }),
        checks,
    ))
}

/// `B(α) ⊔ B(α′) = ℕ` on `[1, n_max]`, `1/α + 1/α′ = 1`.
pub fn suite_rayleigh(alpha: &RealSpec, n_max: usize) -> Result<VerificationReport> {
    require_irrational_above_one(alpha)?;
    let conj = alpha.rayleigh_conjugate()?;
    let a = beatty_counts(alpha, n_max)?;
    let b = beatty_counts(&conj, n_max)?;
    let mut missing = Vec::new();
    let mut repeated = Vec::new();
    for n in 1..=n_max {
        match a[n] + b[n] {
            0 => missing.push(n),
            1 => {}
            _ => repeated.push(n),
        }
    }
    let checks = vec![
        Check::new(
            "every n is covered",
            missing.len() as f64,
            0.0,
            json!({ "n_range": [1, n_max], "first_missing": missing.first() }),
        ),
        Check::new(
            "no n is covered twice",
            repeated.len() as f64,
            0.0,
            json!({ "n_range": [1, n_max], "first_repeated": repeated.first() }),
        ),
    ];
    Ok(VerificationReport::assemble(
        "rayleigh",
        json!({ "alpha": alpha.to_string(), "conjugate": conj.to_string(), "n_max": n_max }),
        checks,
    ))
}

/// `χ_{[0,α)}(x) = R(x − α) − R(x) + α` at `grid_size` seeded random
/// `x ∈ (0,1) \ {α}`.
pub fn suite_sawtooth_identity(alpha: f64, grid_size: usize, seed: u64) -> Result<VerificationReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfDomain(format!("alpha must lie in (0, 1], got {}", alpha)));
    }
    const BOUND: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = std::iter::repeat_with(|| rng.gen::<f64>())
        .filter(|&x| x > 0.0 && x != alpha)
        .take(grid_size)
        .collect();
    let mut worst = (0.0f64, None::<f64>);
    for &x in &xs {
        let lhs = if x < alpha { 1.0 } else { 0.0 };
        let rhs = sawtooth(x - alpha) - sawtooth(x) + alpha;
        let d = (lhs - rhs).abs();
        if d > worst.0 || worst.1.is_none() {
            worst = (d.max(worst.0), Some(x));
        }
    }
    let checks = vec![Check::new(
        "indicator of [0, alpha) equals the sawtooth difference",
        worst.0,
        BOUND,
        json!({ "worst_x": worst.1, "points": xs.len() }),
    )];
    Ok(VerificationReport::assemble(
        "sawtooth_identity",
        json!({ "alpha": alpha, "grid_size": grid_size, "seed": seed }),
        checks,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Relation {
    Fz,
    Subnice,
    Fg1(i64),
    Bg(i64),
}

impl Relation {
    fn label(&self) -> String {
        match self {
            Relation::Fz => "zeta_alpha = zeta - g_{-beta}".into(),
            Relation::Subnice => "S_alpha = 1 + g_beta".into(),
            Relation::Fg1(q) => format!("g_(alpha*{q}) = F^{q}J - J + {{alpha*{q}}}zeta + h"),
            Relation::Bg(q) => format!("g_(-alpha*{q}) = B^{q}J - J + (1 - {{alpha*{q}}})zeta"),
        }
    }
}

fn fmt_point(s: Complex64) -> String {
    format!("{}{:+}i", s.re, s.im)
}

/// `Σ_{n>q} a_{n∓q} n^{-s}` (forward) or `Σ_{n≥1} a_{n+q} n^{-s}` (backward)
/// through the binomial series, with `J` itself supplying `φ_{q,0}`.
fn shifted_j(
    ev: &SeriesEvaluator,
    alpha: &RealSpec,
    table: &StreamTable,
    q: usize,
    sign: ShiftSign,
    s: Complex64,
    tol: f64,
) -> Result<EvalResult> {
    let jid = SeriesId::sawtooth_j(alpha.clone());
    let base = |x: Complex64, t: f64| ev.evaluate_lenient(&jid, x, t, Route::Auto);
    let series = binomial_shift_lenient(table, q, sign, 0, s, tol, Some(&base))?;
    Ok(match sign {
        ShiftSign::Backward => series,
        ShiftSign::Forward => {
            let head: Complex64 = (q + 1..=2 * q)
                .map(|n| table.coeff(n - q) * pow_neg(n as f64, s))
                .sum();
            series.add_const(head, 4.0 * f64::EPSILON * q as f64)
        }
    }
    .tagged(Method::Shift))
}

/// One relation at one point: (lhs, rhs).
fn relation_sides(
    ev: &SeriesEvaluator,
    alpha: &RealSpec,
    rel: Relation,
    s: Complex64,
    tol: f64,
) -> Result<(EvalResult, EvalResult)> {
    let one = Complex64::new(1.0, 0.0);
    let beta = alpha.reciprocal();
    let sub_tol = tol / 4.0;
    match rel {
        Relation::Fz => {
            let lhs = ev.evaluate_lenient(&SeriesId::zeta_beatty(alpha.clone()), s, tol, Route::Stream)?;
            let g = ev.evaluate_lenient(&SeriesId::hecke(beta, -1)?, s, tol / 2.0, Route::Relation)?;
            let z = riemann_zeta(s, sub_tol.max(1e-14))?;
            Ok((lhs, z.combine(one, &g, -one, Method::Composite)))
        }
        Relation::Subnice => {
            let lhs = ev.evaluate_lenient(&SeriesId::sturmian(alpha.clone()), s, tol, Route::Stream)?;
            let g = ev.evaluate_lenient(&SeriesId::hecke(beta, 1)?, s, tol, Route::Relation)?;
            Ok((lhs, g.add_const(one, 0.0).tagged(Method::Composite)))
        }
        Relation::Fg1(q) | Relation::Bg(q) => {
            let forward = matches!(rel, Relation::Fg1(_));
            let signed = if forward { q } else { -q };
            let lhs = ev.evaluate_lenient(&SeriesId::hecke(alpha.clone(), signed)?, s, tol, Route::Stream)?;
            let jt = materialize_cached(&CoefficientStream::sawtooth(alpha), ev.n_max)?;
            let sign = if forward { ShiftSign::Forward } else { ShiftSign::Backward };
            let shifted = shifted_j(ev, alpha, &jt, q as usize, sign, s, sub_tol)?;
            let j = ev.evaluate_lenient(&SeriesId::sawtooth_j(alpha.clone()), s, sub_tol, Route::Auto)?;
            let z = riemann_zeta(s, sub_tol.max(1e-14))?;
            let density = CoefficientStream::hecke(alpha, signed)?.density();
            let mut rhs = shifted
                .combine(one, &j, -one, Method::Composite)
                .combine(one, &z, Complex64::new(density, 0.0), Method::Composite);
            if forward {
                let mut h = -0.5 * pow_neg(q as f64, s);
                for n in 1..=q {
                    let m = n - q;
                    let r = if m < 0 { -sawtooth_at(alpha, -m)? } else { 0.0 };
                    h += r * pow_neg(n as f64, s);
                }
                rhs = rhs.add_const(h, 4.0 * f64::EPSILON * q as f64);
            }
            Ok((lhs, rhs))
        }
    }
}

/// The relations (Fz), (subnice), (Fg1) and (Bg) on a grid, each side by
/// its own route. A point passes when the deviation is within the combined
/// reported error; evaluator failures are recorded as skips.
pub fn suite_functional_relations(
    ev: &SeriesEvaluator,
    alpha: &RealSpec,
    q_list: &[i64],
    s_grid: &[Complex64],
    tol: f64,
) -> Result<VerificationReport> {
    require_irrational_above_one(alpha)?;
    if q_list.iter().any(|&q| q <= 0) {
        return Err(Error::InvalidSpec("q values must be positive".into()));
    }
    let mut rels = vec![Relation::Fz, Relation::Subnice];
    for &q in q_list {
        rels.push(Relation::Fg1(q));
        rels.push(Relation::Bg(q));
    }
    let tasks: Vec<(Relation, Complex64)> = rels
        .iter()
        .flat_map(|&r| s_grid.iter().map(move |&s| (r, s)))
        .collect();
    let checks: Vec<Check> = tasks
        .par_iter()
        .map(|&(rel, s)| {
            let desc = format!("{} at s = {}", rel.label(), fmt_point(s));
            let inputs = json!({ "s": [s.re, s.im], "tol": tol });
            if s == Complex64::new(1.0, 0.0) {
                return Check::skip(desc, Error::PoleAt1.to_string(), inputs);
            }
            match relation_sides(ev, alpha, rel, s, tol) {
                Err(e) => Check::skip(desc, e.to_string(), inputs),
                Ok((lhs, rhs)) => {
                    let mut inputs = inputs;
                    inputs["lhs"] = json!({ "re": lhs.value.re, "im": lhs.value.im, "err": lhs.err, "method": lhs.method });
                    inputs["rhs"] = json!({ "re": rhs.value.re, "im": rhs.value.im, "err": rhs.err, "method": rhs.method });
                    let mut c = Check::new(desc, (lhs.value - rhs.value).norm(), lhs.err + rhs.err, inputs);
                    if lhs.method == rhs.method {
                        c.pass = false;
                        c.skipped = Some("both sides used the same route".into());
                    }
                    c
                }
            }
        })
        .collect();
    let grid: Vec<[f64; 2]> = s_grid.iter().map(|s| [s.re, s.im]).collect();
    Ok(VerificationReport::assemble(
        "functional_relations",
        json!({ "alpha": alpha.to_string(), "q": q_list, "grid": grid, "tol": tol, "n_max": ev.n_max }),
        checks,
    )
    .with_skip_limit())
}

/// Absolute tail `Σ_{m≥m0} q^m |C(−s,m)| Σ_{n>q} |a_n| n^{−σ−m}` of the
/// binomial double series, summed by brute force over the table with an
/// integral bound for `n` past its end.
pub fn realized_tail(table: &StreamTable, q: usize, m0: usize, s: Complex64) -> f64 {
    let sigma = s.re;
    let n_end = table.len();
    let abs: Vec<f64> = (1..=n_end).map(|n| table.coeff(n).abs()).collect();
    let norm = table.bound();
    let mut total = 0.0;
    let mut m = m0;
    loop {
        let w = (q as f64).powi(m as i32) * binom_neg_s(s, m).norm();
        let x = sigma + m as f64;
        let mut inner = 0.0;
        for n in (q + 1)..=n_end {
            let t = abs[n - 1] * (n as f64).powf(-x);
            if t == 0.0 && (n as f64).powf(-x) < 1e-300 {
                break;
            }
            inner += t;
        }
        inner += norm * (n_end as f64).powf(1.0 - x) / (x - 1.0);
        let term = w * inner;
        total += term;
        if (term <= 1e-17 * total && m > m0 + 8) || m > m0 + 5000 {
            break;
        }
        m += 1;
    }
    total
}

/// Compares realized tails of the binomial double series over the `J_φ`
/// coefficients with `shift_truncation_bound`.
pub fn suite_lemma1_truncation(
    q: usize,
    m0_list: &[usize],
    s_list: &[Complex64],
    n_max: usize,
) -> Result<VerificationReport> {
    let table = materialize_cached(&CoefficientStream::sawtooth(&RealSpec::phi()), n_max)?;
    lemma1_on_table(&table, q, m0_list, s_list)
}

pub(crate) fn lemma1_on_table(
    table: &StreamTable,
    q: usize,
    m0_list: &[usize],
    s_list: &[Complex64],
) -> Result<VerificationReport> {
    if q == 0 {
        return Err(Error::InvalidSpec("q must be positive".into()));
    }
    let tasks: Vec<(usize, Complex64)> = m0_list
        .iter()
        .flat_map(|&m0| s_list.iter().map(move |&s| (m0, s)))
        .collect();
    let checks: Vec<Check> = tasks
        .par_iter()
        .map(|&(m0, s)| {
            let desc = format!("tail from m0 = {} at s = {}", m0, fmt_point(s));
            let inputs = json!({ "q": q, "m0": m0, "s": [s.re, s.im] });
            if s.re + m0 as f64 <= 1.0 {
                return Check::skip(desc, "needs Re(s) + m0 > 1", inputs);
            }
            match shift_truncation_bound(table.bound(), q, m0, s, s.re) {
                Err(e) => Check::skip(desc, e.to_string(), inputs),
                Ok(bound) => Check::new(desc, realized_tail(table, q, m0, s), bound, inputs),
            }
        })
        .collect();
    let s_json: Vec<[f64; 2]> = s_list.iter().map(|s| [s.re, s.im]).collect();
    Ok(VerificationReport::assemble(
        "lemma1_truncation",
        json!({ "stream": table.label(), "q": q, "m0": m0_list, "s": s_json, "n_max": table.len() }),
        checks,
    )
    .with_skip_limit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::ErrorModel;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn coefficient_identity_phi_and_sqrt2() {
        for a in [RealSpec::phi(), RealSpec::sqrt(2).unwrap()] {
            let r = suite_coefficient_identity(&a, 100_000).unwrap();
            assert!(r.pass, "{}", r.to_json());
            assert_eq!(r.checks[0].deviation, 0.0);
        }
        assert_eq!(
            suite_coefficient_identity(&RealSpec::rational(3, 2).unwrap(), 10),
            Err(Error::RationalAlpha)
        );
    }

    #[test]
    fn coefficient_identity_reports_exhausted_budget() {
        // the enclosure of 3/2 straddles 3 at n = 2
        let a: RealSpec = "decimal:1.5000000000000000@17".parse().unwrap();
        match suite_coefficient_identity(&a, 1000) {
            Err(Error::PrecisionExhausted(msg)) => assert!(msg.contains("n = "), "{}", msg),
            other => panic!("{:?}", other.map(|r| r.pass)),
        }
    }

    #[test]
    fn rayleigh_partitions() {
        for a in [RealSpec::phi(), RealSpec::sqrt(2).unwrap()] {
            let r = suite_rayleigh(&a, 100_000).unwrap();
            assert!(r.pass);
        }
        let r = suite_rayleigh(&RealSpec::sqrt(2).unwrap(), 10).unwrap();
        assert_eq!(r.params["conjugate"], RealSpec::sqrt(2).unwrap().rayleigh_conjugate().unwrap().to_string());
        assert_eq!(suite_rayleigh(&RealSpec::rational(2, 1).unwrap(), 10), Err(Error::RationalAlpha));
    }

    #[test]
    fn sawtooth_identity_examples_and_suite() {
        let a = 0.618;
        assert_eq!(sawtooth(0.3 - a) - sawtooth(0.3) + a, 1.0);
        assert!((sawtooth(0.7 - a) - sawtooth(0.7) + a).abs() < 1e-15);
        let r = suite_sawtooth_identity(a, 10_000, DEFAULT_SEED).unwrap();
        assert!(r.pass);
        assert_eq!(r.to_json(), suite_sawtooth_identity(a, 10_000, DEFAULT_SEED).unwrap().to_json());
        assert!(suite_sawtooth_identity(1.0, 100, 1).unwrap().pass);
        assert!(suite_sawtooth_identity(1.5, 100, 1).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let r = suite_lemma1_truncation(1, &[3], &[re(0.5)], 1 << 16).unwrap();
        assert!(r.pass, "{}", r.to_json());
        // ‖ω‖∞ = 1/2 for J, so half of 2^{3.5} ζ(3.5)
        assert!((r.checks[0].bound - 12.75 / 2.0).abs() < 0.01);
        assert!(r.checks[0].deviation > 0.0);
        let r = suite_lemma1_truncation(2, &[2], &[re(1.5)], 1 << 16).unwrap();
        assert!(r.pass);
        let zero = StreamTable::from_fn("zero", 1 << 10, 0.0, 0.0, ErrorModel::Logarithmic, |_| 0.0);
        let r = lemma1_on_table(&zero, 1, &[3], &[re(0.5)]).unwrap();
        assert_eq!(r.checks[0].deviation, 0.0);
        assert_eq!(r.checks[0].bound, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn functional_relations_phi() {
        let ev = SeriesEvaluator::new(1 << 18);
        let grid: Vec<Complex64> = [0.5, 1.5, 2.0]
            .iter()
            .flat_map(|&x| [Complex64::new(x, 0.0), Complex64::new(x, 2.0)])
            .chain([re(1.0)])
            .collect();
        let r = suite_functional_relations(&ev, &RealSpec::phi(), &[1], &grid, 1e-6).unwrap();
        assert!(r.pass, "{}", r.to_json());
        let pole: Vec<_> = r.checks.iter().filter(|c| c.skipped.is_some()).collect();
        assert_eq!(pole.len(), 4);
        assert!(pole.iter().all(|c| c.skipped.as_deref().unwrap().contains("pole")));
        let text = r.to_json();
        let suite = text.find("\"suite\"").unwrap();
        let params = text.find("\"params\"").unwrap();
        let checks = text.find("\"checks\"").unwrap();
        assert!(suite < params && params < checks);
    }
}
