//! The named series `ζ_α`, `S_α`, `J_α`, `g_{±αq}` and `ζ_α(s;γ)`.
//!
//! [`SeriesEvaluator`] picks a method by region: closed forms for rational
//! `α`, direct summation right of `Re(s) = 1.05`, Abel continuation down to
//! `Re(s) = 0.05`, and the shift relations through `J_α` down to
//! `Re(s) = −1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::engine::{
    hurwitz_zeta, pow_neg, riemann_zeta, shift_forward_eval,
    Complex64, EvalResult, Evaluator, Method, ShiftSign, DEFAULT_MARGIN,
};
use crate::engine::{abel_lenient, binomial_shift_lenient, direct_sum_lenient};
use crate::error::{Error, Result};
use crate::realspec::{cf_expand, eta, type_estimate, Eta, RealSpec, SpecKind};
use crate::sequences::{materialize_cached, sawtooth_at, CoefficientStream, StreamTable};

/// Right edge of the Abel region; direct summation takes over beyond it.
pub const DIRECT_EDGE: f64 = 1.0 + DEFAULT_MARGIN;
/// Left edge of the Abel region; the relation route takes over below it.
pub const ABEL_EDGE: f64 = 0.05;
/// Relations through `J_α(s+m)`, `m ≥ 1`, reach down to here.
pub const RELATION_EDGE: f64 = -1.0;

const MIN_SUB_TOL: f64 = 1e-14;
const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    ZetaBeatty,
    Sturmian,
    SawtoothJ,
    HeckePlus,
    HeckeMinus,
    HurwitzBeatty,
}

impl SeriesKind {
    pub fn name(&self) -> &'static str {
        match self {
            SeriesKind::ZetaBeatty => "zeta-beatty",
            SeriesKind::Sturmian => "sturmian",
            SeriesKind::SawtoothJ => "sawtooth-j",
            SeriesKind::HeckePlus => "hecke-plus",
            SeriesKind::HeckeMinus => "hecke-minus",
            SeriesKind::HurwitzBeatty => "hurwitz-beatty",
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully specified series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesId {
    pub kind: SeriesKind,
    pub alpha: RealSpec,
    pub q: Option<i64>,
    pub gamma: Option<f64>,
}

impl SeriesId {
    pub fn zeta_beatty(alpha: RealSpec) -> Self {
        SeriesId { kind: SeriesKind::ZetaBeatty, alpha, q: None, gamma: None }
    }

    pub fn sturmian(alpha: RealSpec) -> Self {
        SeriesId { kind: SeriesKind::Sturmian, alpha, q: None, gamma: None }
    }

    pub fn sawtooth_j(alpha: RealSpec) -> Self {
        SeriesId { kind: SeriesKind::SawtoothJ, alpha, q: None, gamma: None }
    }

    /// `g_{αq}`; the sign of `q` selects the plus or minus kind.
    pub fn hecke(alpha: RealSpec, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidSpec("Hecke parameter q must be nonzero".into()));
        }
        if alpha.is_rational() {
            return Err(Error::RationalAlpha);
        }
        let kind = if q > 0 { SeriesKind::HeckePlus } else { SeriesKind::HeckeMinus };
        Ok(SeriesId { kind, alpha, q: Some(q), gamma: None })
    }

    pub fn hurwitz_beatty(alpha: RealSpec, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(SeriesId { kind: SeriesKind::HurwitzBeatty, alpha, q: None, gamma: Some(gamma) })
    }

    fn q_value(&self) -> Result<i64> {
        self.q.ok_or_else(|| Error::InvalidSpec(format!("{} needs q", self.kind)))
    }

    fn gamma_value(&self) -> Result<f64> {
        self.gamma.ok_or_else(|| Error::InvalidSpec(format!("{} needs gamma", self.kind)))
    }
}

impl fmt::Display for SeriesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}", self.kind, self.alpha)?;
        if let Some(q) = self.q {
            write!(f, "; q={}", q)?;
        }
        if let Some(g) = self.gamma {
            write!(f, "; gamma={}", g)?;
        }
        f.write_str("]")
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("gamma must lie in (0, 1], got {}", gamma)))
    }
}

/// Forces one evaluation route where several apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// region dispatch
    Auto,
    /// the series' own coefficient stream (direct or Abel)
    Stream,
    /// the shift relations through `J`
    Relation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormKind {
    ZetaBeatty,
    Sturmian,
}

/// Evaluation settings shared by all series.
#[derive(Clone, Debug)]
pub struct SeriesEvaluator {
    /// coefficient table length
    pub n_max: usize,
    /// cap on the number of terms in the `γ`-series of `ζ_α(s;γ)`
    pub m_max: usize,
}

impl Default for SeriesEvaluator {
    fn default() -> Self {
        SeriesEvaluator { n_max: 1_000_000, m_max: 64 }
    }
}

fn check_tol(res: EvalResult, tol: f64) -> Result<EvalResult> {
    if res.err <= tol {
        Ok(res)
    } else {
        Err(Error::DidNotConverge { err: res.err, tol })
    }
}

fn rational_parts(alpha: &RealSpec) -> Option<(u64, u64)> {
    let r = alpha.as_rational()?;
    Some((r.numer().to_u64()?, r.denom().to_u64()?))
}

fn is_one(z: Complex64) -> bool {
    z == Complex64::new(1.0, 0.0)
}

/// `{β}^{-1}` and `⌊β⌋` for `β = 1/α`, `0 < α < 1`.
fn sub_one_reduction(alpha: &RealSpec) -> Result<(f64, Option<RealSpec>)> {
    let (k, frac) = alpha.reciprocal().split_integer_part()?;
    let k = k.to_f64().ok_or_else(|| Error::InvalidSpec("alpha too small".into()))?;
    Ok((k, frac.map(|f| f.reciprocal())))
}

fn below_one(alpha: &RealSpec) -> Result<bool> {
    Ok(alpha.floor()? < BigInt::one())
}

/// `p^{-s} Σ ζ(s; c_k/p)` over the offsets `c_k`.
fn hurwitz_combination(p: u64, offsets: &[u64], s: Complex64, tol: f64) -> Result<EvalResult> {
    let scale = pow_neg(p as f64, s);
    let each = (tol / (2.0 * offsets.len() as f64 * scale.norm().max(1e-300))).max(MIN_SUB_TOL);
    let mut out = EvalResult::new(Complex64::new(0.0, 0.0), 0.0, Method::ClosedForm);
    for &c in offsets {
        let h = hurwitz_zeta(s, c as f64 / p as f64, each)?;
        out.value += h.value;
        out.err += h.err;
        out.absorb_warnings(&h);
    }
    out.value *= scale;
    out.err *= scale.norm();
    Ok(out)
}

/// Closed forms for rational `α = p/q ≥ 1` through Hurwitz zeta values:
/// `ζ_α(s) = p^{-s} Σ_{ℓ=1}^{q} ζ(s; ⌊ℓp/q⌋/p)` and
/// `S_α(s) = p^{-s} Σ_{k=0}^{q−1} ζ(s; (⌊kp/q⌋+1)/p)`.
pub fn rational_closed_form(
    kind: ClosedFormKind,
    p: u64,
    q: u64,
    s: Complex64,
    tol: f64,
) -> Result<EvalResult> {
    if q == 0 || p == 0 {
        return Err(Error::InvalidSpec("p and q must be positive".into()));
    }
    if p.gcd(&q) != 1 {
        return Err(Error::InvalidSpec(format!("{}/{} is not in lowest terms", p, q)));
    }
    if p < q {
        return Err(Error::OutOfDomain(format!(
            "closed form needs p/q >= 1, got {}/{}; reduce first",
            p, q
        )));
    }
    if q > MAX_DENOMINATOR {
        return Err(Error::OutOfDomain(format!("denominator {} too large for the closed form", q)));
    }
    if is_one(s) {
        return Err(Error::PoleAt1);
    }
    let (p128, q128) = (p as u128, q as u128);
    let offsets: Vec<u64> = match kind {
        ClosedFormKind::ZetaBeatty => (1..=q128).map(|l| (l * p128 / q128) as u64).collect(),
        ClosedFormKind::Sturmian => (0..q128).map(|k| (k * p128 / q128) as u64 + 1).collect(),
    };
    debug_assert!(offsets.iter().all(|&c| c >= 1 && c as u128 <= p128));
    hurwitz_combination(p, &offsets, s, tol)
}

/// `R(α m)` for any integer `m`, using oddness for `m < 0`.
fn sawtooth_signed(alpha: &RealSpec, m: i64) -> Result<f64> {
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => Ok(0.0),
        std::cmp::Ordering::Greater => sawtooth_at(alpha, m),
        std::cmp::Ordering::Less => Ok(-sawtooth_at(alpha, -m)?),
    }
}

impl SeriesEvaluator {
    pub fn new(n_max: usize) -> Self {
        SeriesEvaluator { n_max, ..Default::default() }
    }

    fn table(&self, stream: &CoefficientStream) -> Result<Arc<StreamTable>> {
        materialize_cached(stream, self.n_max)
    }

    /// Direct summation or Abel continuation on a coefficient table.
    fn stream_eval(&self, table: &StreamTable, s: Complex64, tol: f64) -> Result<EvalResult> {
        if s.re > DIRECT_EDGE {
            direct_sum_lenient(table, 1, s, tol)
        } else if s.re > 0.0 {
            if is_one(s) && table.density() != 0.0 {
                return Err(Error::PoleAt1);
            }
            abel_lenient(table, s, tol)
        } else {
            Err(Error::OutOfDomain(format!(
                "{} needs Re(s) > 0, got {}",
                table.label(),
                s.re
            )))
        }
    }

    /// Evaluates `series` at `s` to within `tol`.
    pub fn evaluate(&self, series: &SeriesId, s: Complex64, tol: f64) -> Result<EvalResult> {
        check_tol(self.evaluate_lenient(series, s, tol, Route::Auto)?, tol)
    }

    /// As [`SeriesEvaluator::evaluate`] with a forced route, returning the
    /// best available estimate even when its error exceeds `tol`.
    pub fn evaluate_lenient(
        &self,
        series: &SeriesId,
        s: Complex64,
        tol: f64,
        route: Route,
    ) -> Result<EvalResult> {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::OutOfDomain(format!("non-finite point {}", s)));
        }
        if !(tol > 0.0) {
            return Err(Error::OutOfDomain("tolerance must be positive".into()));
        }
        let a = &series.alpha;
        match series.kind {
            SeriesKind::ZetaBeatty => self.zeta_raw(a, s, tol, route),
            SeriesKind::Sturmian => self.sturmian_raw(a, s, tol, route),
            SeriesKind::SawtoothJ => self.j_raw(a, s, tol),
            SeriesKind::HeckePlus | SeriesKind::HeckeMinus => {
                self.hecke_raw(a, series.q_value()?, s, tol, route)
            }
            SeriesKind::HurwitzBeatty => self.hurwitz_beatty_raw(a, series.gamma_value()?, s, tol),
        }
    }

    /// `ζ_α(s) = Σ_{n≥1} ⌊αn⌋^{-s}`.
    pub fn zeta_beatty(&self, alpha: &RealSpec, s: Complex64, tol: f64) -> Result<EvalResult> {
        check_tol(self.zeta_raw(alpha, s, tol, Route::Auto)?, tol)
    }

    /// `S_α(s) = Σ_{n≥1} (⌈βn⌉ − ⌈β(n−1)⌉) n^{-s}`.
    pub fn sturmian_series(&self, alpha: &RealSpec, s: Complex64, tol: f64) -> Result<EvalResult> {
        check_tol(self.sturmian_raw(alpha, s, tol, Route::Auto)?, tol)
    }

    /// `J_α(s) = Σ_{n≥1} R(αn) n^{-s}`.
    pub fn j_series(&self, alpha: &RealSpec, s: Complex64, tol: f64) -> Result<EvalResult> {
        check_tol(self.j_raw(alpha, s, tol)?, tol)
    }

    /// `g_{αq}(s) = Σ_{n ∈ A_{αq}} n^{-s}`.
    pub fn hecke_series(&self, alpha: &RealSpec, q: i64, s: Complex64, tol: f64) -> Result<EvalResult> {
        check_tol(self.hecke_raw(alpha, q, s, tol, Route::Auto)?, tol)
    }

    /// `ζ_α(s;γ) = Σ_{n≥0} (⌊αn⌋ + γ)^{-s}`.
    pub fn hurwitz_beatty(
        &self,
        alpha: &RealSpec,
        gamma: f64,
        s: Complex64,
        tol: f64,
    ) -> Result<EvalResult> {
        check_tol(self.hurwitz_beatty_raw(alpha, gamma, s, tol)?, tol)
    }

    fn zeta_raw(&self, alpha: &RealSpec, s: Complex64, tol: f64, route: Route) -> Result<EvalResult> {
        if let Some((p, q)) = rational_parts(alpha) {
            if p >= q {
                return rational_closed_form(ClosedFormKind::ZetaBeatty, p, q, s, tol);
            }
        }
        if below_one(alpha)? {
            return self.reduced(alpha, s, tol, |inner, t| self.zeta_raw(inner, s, t, route));
        }
        if is_one(s) {
            return Err(Error::PoleAt1);
        }
        let use_relation = match route {
            Route::Relation => true,
            Route::Stream => false,
            Route::Auto => s.re <= ABEL_EDGE,
        };
        if use_relation {
            // ζ_α = ζ − g_{−β}
            check_relation_domain(s)?;
            let g = self.hecke_raw(&alpha.reciprocal(), -1, s, tol / 2.0, Route::Relation)?;
            let z = riemann_zeta(s, (tol / 4.0).max(MIN_SUB_TOL))?;
            return Ok(z.combine(Complex64::new(1.0, 0.0), &g, Complex64::new(-1.0, 0.0), Method::Composite));
        }
        let t = self.table(&CoefficientStream::beatty(alpha))?;
        self.stream_eval(&t, s, tol)
    }

    /// `⌊β⌋ζ(s) + f_{{β}^{-1}}(s)` for `0 < α < 1`.
    fn reduced(
        &self,
        alpha: &RealSpec,
        s: Complex64,
        tol: f64,
        inner: impl Fn(&RealSpec, f64) -> Result<EvalResult>,
    ) -> Result<EvalResult> {
        let (k, rest) = sub_one_reduction(alpha)?;
        let z = riemann_zeta(s, (tol / (2.0 * k)).max(MIN_SUB_TOL))?;
        let mut out = z.scale(Complex64::new(k, 0.0));
        if let Some(r) = rest {
            let f = inner(&r, tol / 2.0)?;
            out = out.combine(Complex64::new(1.0, 0.0), &f, Complex64::new(1.0, 0.0), Method::Composite);
        }
        Ok(out.tagged(Method::Composite))
    }

    fn sturmian_raw(&self, alpha: &RealSpec, s: Complex64, tol: f64, route: Route) -> Result<EvalResult> {
        if let Some((p, q)) = rational_parts(alpha) {
            if p >= q {
                return rational_closed_form(ClosedFormKind::Sturmian, p, q, s, tol);
            }
        }
        if below_one(alpha)? {
            return self.reduced(alpha, s, tol, |inner, t| self.sturmian_raw(inner, s, t, route));
        }
        if is_one(s) {
            return Err(Error::PoleAt1);
        }
        let use_relation = match route {
            Route::Relation => true,
            Route::Stream => false,
            Route::Auto => s.re <= ABEL_EDGE,
        };
        if use_relation {
            // S_α = 1 + g_β
            check_relation_domain(s)?;
            let g = self.hecke_raw(&alpha.reciprocal(), 1, s, tol, Route::Relation)?;
            return Ok(g.add_const(Complex64::new(1.0, 0.0), 0.0).tagged(Method::Composite));
        }
        let t = self.table(&CoefficientStream::sturmian(alpha))?;
        self.stream_eval(&t, s, tol)
    }

    fn j_raw(&self, alpha: &RealSpec, s: Complex64, tol: f64) -> Result<EvalResult> {
        let t = self.table(&CoefficientStream::sawtooth(alpha))?;
        self.stream_eval(&t, s, tol)
    }

    fn hecke_raw(
        &self,
        alpha: &RealSpec,
        q: i64,
        s: Complex64,
        tol: f64,
        route: Route,
    ) -> Result<EvalResult> {
        let stream = CoefficientStream::hecke(alpha, q)?;
        if is_one(s) {
            return Err(Error::PoleAt1);
        }
        let use_relation = match route {
            Route::Relation => true,
            Route::Stream => false,
            Route::Auto => s.re <= ABEL_EDGE,
        };
        if !use_relation {
            let t = self.table(&stream)?;
            return self.stream_eval(&t, s, tol);
        }
        check_relation_domain(s)?;
        let jt = self.table(&CoefficientStream::sawtooth(alpha))?;
        let jbase = |x: Complex64, t: f64| self.j_raw(alpha, x, t);
        let base: &Evaluator<'_> = &jbase;
        let frac = stream.density();
        let k = q.unsigned_abs() as usize;
        let z_tol = (tol / 4.0).max(MIN_SUB_TOL);
        let mut out = if q > 0 {
            // g_{αq} = Σ_{m≥1} q^m C(−s,m) φ_{q,m} + {αq}ζ + h₁
            let series = binomial_shift_lenient(&jt, k, ShiftSign::Forward, 1, s, tol / 2.0, Some(base))?;
            let z = riemann_zeta(s, z_tol)?;
            let mut h1 = Complex64::new(0.0, 0.0);
            for n in (k + 1)..=(2 * k) {
                h1 += sawtooth_signed(alpha, n as i64 - q)? * pow_neg(n as f64, s);
            }
            for n in 1..=k {
                let w = pow_neg(n as f64, s);
                h1 += (sawtooth_signed(alpha, n as i64 - q)? - sawtooth_signed(alpha, n as i64)?) * w;
            }
            h1 -= 0.5 * pow_neg(k as f64, s);
            series
                .combine(Complex64::new(1.0, 0.0), &z, Complex64::new(frac, 0.0), Method::Composite)
                .add_const(h1, 1e-15 * (1.0 + h1.norm()) * k as f64)
        } else {
            // g_{−α|q|} = −Σ_{n≤|q|} R(αn)n^{-s} + Σ_{m≥1} (−|q|)^m C(−s,m) φ_{|q|,m} + (1−{α|q|})ζ
            let series = binomial_shift_lenient(&jt, k, ShiftSign::Backward, 1, s, tol / 2.0, Some(base))?;
            let z = riemann_zeta(s, z_tol)?;
            let mut head = Complex64::new(0.0, 0.0);
            for n in 1..=k {
                head += sawtooth_signed(alpha, n as i64)? * pow_neg(n as f64, s);
            }
            series
                .combine(Complex64::new(1.0, 0.0), &z, Complex64::new(frac, 0.0), Method::Composite)
                .add_const(-head, 1e-15 * (1.0 + head.norm()) * k as f64)
        };
        out.method = Method::Composite;
        Ok(out)
    }

    fn hurwitz_beatty_raw(&self, alpha: &RealSpec, gamma: f64, s: Complex64, tol: f64) -> Result<EvalResult> {
        check_gamma(gamma)?;
        if is_one(s) {
            return Err(Error::PoleAt1);
        }
        // number of n ≥ 0 with ⌊αn⌋ = 0
        let c0 = alpha
            .reciprocal()
            .ceil_mul(1)?
            .to_f64()
            .ok_or_else(|| Error::InvalidSpec("alpha too small".into()))?;
        if gamma == 1.0 {
            let t = self.table(&CoefficientStream::beatty(alpha))?;
            let base = |x: Complex64, t: f64| self.zeta_raw(alpha, x, t, Route::Auto);
            let f = shift_forward_eval(&t, 1, s, tol, Some(&base))?;
            return Ok(f.add_const(Complex64::new(c0, 0.0), 0.0).tagged(Method::Composite));
        }
        // c0 γ^{-s} + Σ_m C(−s,m) γ^m ζ_α(s+m)
        let norm = alpha.reciprocal().ceil_mul(1)?.to_f64().unwrap_or(f64::INFINITY);
        let dist = (s - 1.0).norm();
        let mut out = EvalResult::new(c0 * pow_neg(gamma, s), 0.0, Method::Composite);
        let mut binom = Complex64::new(1.0, 0.0);
        let mut gpow = 1.0;
        for m in 0..=self.m_max {
            let w = binom * gpow;
            if w != Complex64::new(0.0, 0.0) {
                let sm = s + m as f64;
                let term_tol = (tol / (4.0 * ((m + 1) as f64).powi(2) * w.norm())).max(MIN_SUB_TOL);
                let z = self.zeta_raw(alpha, sm, term_tol, Route::Auto)?;
                out.value += w * z.value;
                out.err += w.norm() * z.err;
                out.absorb_warnings(&z);
            }
            let x = s.re + m as f64;
            if x > 1.0 {
                let r = gamma * (1.0 + dist / (m + 1) as f64);
                if r < 1.0 {
                    // ζ_α(x) ≤ ‖ω‖ ζ(x) ≤ ‖ω‖ (1 + 1/(x−1))
                    let t_m = w.norm() * norm * (1.0 + 1.0 / (x - 1.0));
                    let rest = t_m * r / (1.0 - r);
                    if rest <= tol / 2.0 {
                        out.err += rest;
                        return Ok(out);
                    }
                }
            }
            binom = binom * (-s - m as f64) / (m + 1) as f64;
            gpow *= gamma;
        }
        Err(Error::DidNotConverge { err: f64::INFINITY, tol })
    }
}

fn check_relation_domain(s: Complex64) -> Result<()> {
    if s.re <= RELATION_EDGE {
        Err(Error::OutOfDomain(format!(
            "relation route needs Re(s) > {}, got {}",
            RELATION_EDGE, s.re
        )))
    } else {
        Ok(())
    }
}

/// Residue at `s = 1`: `β` for `ζ_α`, `S_α`, `ζ_α(s;γ)`, `{αq}` for `g_{αq}`,
/// and `0` for `J_α`.
pub fn expected_residue(series: &SeriesId) -> Result<f64> {
    match series.kind {
        SeriesKind::ZetaBeatty | SeriesKind::Sturmian | SeriesKind::HurwitzBeatty => {
            Ok(series.alpha.reciprocal().to_f64())
        }
        SeriesKind::SawtoothJ => Ok(0.0),
        SeriesKind::HeckePlus | SeriesKind::HeckeMinus => {
            Ok(CoefficientStream::hecke(&series.alpha, series.q_value()?)?.density())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticePoint {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrincipalPole {
    pub re: f64,
    pub im: f64,
    pub residue: f64,
}

/// Candidate pole set for quadratic `α`: every listed point is at most a
/// simple pole; none is claimed to be an actual pole except `s = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleLattice {
    pub alpha: String,
    pub principal: PrincipalPole,
    pub eta_inverse: String,
    pub log_eta: f64,
    pub spacing: f64,
    pub lattice: Vec<LatticePoint>,
    pub j_lattice: Option<Vec<LatticePoint>>,
    pub provenance: String,
}

fn lattice_points(real_parts: impl Iterator<Item = f64>, n_max: usize, spacing: f64) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    for re in real_parts {
        out.push(LatticePoint { re, im: 0.0 });
        for n in 1..=n_max {
            let im = n as f64 * spacing;
            out.push(LatticePoint { re, im });
            out.push(LatticePoint { re, im: -im });
        }
    }
    out
}

/// `−k ± 2πin/log η_α` for `1 ≤ k ≤ k_max`, `0 ≤ n ≤ n_max`, and optionally
/// the `J_α` lattice `−2k ± 2πin/log η_α`, `k ≥ 0`.
pub fn pole_lattice(alpha: &RealSpec, k_max: usize, n_max: usize, include_j: bool) -> Result<PoleLattice> {
    if alpha.kind() != SpecKind::Quadratic {
        return Err(Error::NotPeriodic);
    }
    let cf = cf_expand(alpha, 2)?;
    Ok(lattice_from_eta(alpha, &eta(&cf)?, k_max, n_max, include_j))
}

fn lattice_from_eta(alpha: &RealSpec, e: &Eta, k_max: usize, n_max: usize, include_j: bool) -> PoleLattice {
    let spacing = 2.0 * PI / e.log_eta.abs();
    let lattice = lattice_points((1..=k_max).map(|k| -(k as f64)), n_max, spacing);
    let j_lattice = include_j
        .then(|| lattice_points((0..=k_max).map(|k| -2.0 * k as f64), n_max, spacing));
    PoleLattice {
        alpha: alpha.to_string(),
        principal: PrincipalPole { re: 1.0, im: 0.0, residue: alpha.reciprocal().to_f64() },
        eta_inverse: e.inverse.to_string(),
        log_eta: e.log_eta,
        spacing,
        lattice,
        j_lattice,
        provenance: "candidate set (at most simple poles)".into(),
    }
}

/// Where a series can be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuationDomain {
    /// left edge of the theoretical domain of meromorphy (`−∞` for the whole plane)
    pub sigma_left: f64,
    /// left edge of what this crate evaluates
    pub numeric_left: f64,
    /// whether `sigma_left` rests on an estimated type
    pub heuristic: bool,
    pub boundary_note: String,
}

/// Domain metadata; nothing here is verified numerically.
pub fn continuation_domain(series: &SeriesId) -> ContinuationDomain {
    let alpha = &series.alpha;
    let rational = alpha.is_rational();
    if series.kind == SeriesKind::SawtoothJ {
        let (tau, heuristic) = type_of(alpha);
        let note = if rational {
            "rational alpha: finite combination of Hurwitz zeta values; numeric domain Re(s) > 0".to_string()
        } else {
            format!(
                "abscissa of convergence 1 - 1/tau = {:.6}; numeric domain Re(s) > 0",
                1.0 - 1.0 / tau
            )
        };
        return ContinuationDomain { sigma_left: 0.0, numeric_left: 0.0, heuristic, boundary_note: note };
    }
    if rational {
        return ContinuationDomain {
            sigma_left: f64::NEG_INFINITY,
            numeric_left: -(crate::engine::BERNOULLI_ORDER as f64),
            heuristic: false,
            boundary_note: "entire plane minus {1}".into(),
        };
    }
    match alpha.kind() {
        SpecKind::Quadratic => ContinuationDomain {
            sigma_left: f64::NEG_INFINITY,
            numeric_left: RELATION_EDGE,
            heuristic: false,
            boundary_note: "entire plane minus the candidate lattice -k ± 2πin/log η; numeric Re(s) > -1".into(),
        },
        _ => {
            let (tau, _) = type_of(alpha);
            let left = -1.0 / tau;
            ContinuationDomain {
                sigma_left: left,
                numeric_left: RELATION_EDGE.max(left),
                heuristic: true,
                boundary_note: format!(
                    "continuation to Re(s) > -1/tau_hat = {:.3}; natural boundary there if tau > 1",
                    left
                ),
            }
        }
    }
}

/// `(τ̂, heuristic)`: `1` exactly for rational and quadratic `α`.
fn type_of(alpha: &RealSpec) -> (f64, bool) {
    match alpha.kind() {
        SpecKind::Rational | SpecKind::Quadratic => (1.0, false),
        SpecKind::Decimal => {
            let tau = cf_expand(alpha, 64)
                .and_then(|cf| {
                    let n = cf.reliable_terms.unwrap_or(cf.len()).min(cf.len());
                    type_estimate(&cf, n)
                })
                .map(|t| t.tau_hat)
                .unwrap_or(1.0);
            (tau, true)
        }
    }
}

/// Whether `s` lies within `radius` of `1` or of a lattice point.
pub fn near_pole(s: Complex64, lattice: Option<&PoleLattice>, radius: f64) -> bool {
    if (s - 1.0).norm() < radius {
        return true;
    }
    lattice.is_some_and(|l| {
        l.lattice
            .iter()
            .chain(l.j_lattice.iter().flatten())
            .any(|p| (s - Complex64::new(p.re, p.im)).norm() < radius)
    })
}
