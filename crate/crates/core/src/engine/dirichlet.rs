use rayon::prelude::*;

use super::{check_finite, expm1, pow_neg, riemann_zeta, Complex64, EvalResult, Method, EPS};
use crate::error::{Error, Result};
use crate::sequences::{ErrorModel, StreamTable};

/// Direct summation requires `Re(s) > 1 + DEFAULT_MARGIN`.
pub const DEFAULT_MARGIN: f64 = 0.05;

const CHUNK: usize = 1 << 15;
const FIRST_CHECKPOINT: usize = 1 << 12;

/// Deterministic chunked parallel sum of `f(n)` over `lo..=hi`, returning
/// the sum and the sum of moduli.
fn chunked_sum(lo: usize, hi: usize, f: impl Fn(usize) -> Complex64 + Sync) -> (Complex64, f64) {
    if hi < lo {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let blocks = (hi - lo) / CHUNK + 1;
    let parts: Vec<(Complex64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = lo + b * CHUNK;
            let end = (start + CHUNK - 1).min(hi);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            for n in (start..=end).rev() {
                let v = f(n);
                acc += v;
                abs += v.norm();
            }
            (acc, abs)
        })
        .collect();
    parts
        .into_iter()
        .rev()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(a, b), (c, d)| (a + c, b + d))
}

fn phase_factor(s: Complex64, n: usize) -> f64 {
    2.0 + s.im.abs() * (n.max(2) as f64).ln()
}

/// `∫_N^∞ w(x) x^{-σ-2} dx` for the envelope shape `w`.
fn envelope_integral(model: ErrorModel, n: f64, sigma: f64) -> f64 {
    match model {
        ErrorModel::Logarithmic => {
            n.powf(-sigma - 1.0) / (sigma + 1.0) * (1.0 + n.ln() + 1.0 / (sigma + 1.0))
        }
        ErrorModel::Power(e) => n.powf(e - sigma - 1.0) / (sigma + 1.0 - e),
    }
}

/// Mean-discrepancy tail model at cutoff `n`.
///
/// Returns `(μ̂, bound)` where `μ̂ = (1/N)Σ_{k≤N} E(k)` and `bound` estimates
/// `|Σ_{k>N} E(k)(k^{-s} − (k+1)^{-s}) − μ̂(N+1)^{-s}|` from the measured
/// size of `F(k) = Σ_{j≤k} E(j) − kμ̂` on `[N/2, N]`.
fn tail_model(table: &StreamTable, n: usize, s: Complex64) -> (f64, f64) {
    let model = table.error_model();
    let mu = table.discrepancy_sum(n) / n as f64;
    let c = (n / 2..=n)
        .map(|k| (table.discrepancy_sum(k) - k as f64 * mu).abs() / model.shape(k as f64))
        .fold(0.0f64, f64::max);
    let sigma = s.re;
    let nf = n as f64;
    let drift = model.shape(nf) * nf.powf(-sigma - 1.0) / sigma;
    let bound = 2.0 * c * s.norm() * (s + 1.0).norm() * (envelope_integral(model, nf, sigma) + drift);
    (mu, bound)
}

fn heuristic_warning(table: &StreamTable) -> String {
    let shape = match table.error_model() {
        ErrorModel::Logarithmic => "log".to_string(),
        ErrorModel::Power(e) => format!("n^{}", e),
    };
    format!(
        "tail estimate for {} uses a heuristic {}-shaped discrepancy envelope",
        table.label(),
        shape
    )
}

/// `Σ_{n≥1} a_n n^{-s}`.
pub fn direct_sum(table: &StreamTable, s: Complex64, tol: f64) -> Result<EvalResult> {
    direct_sum_from(table, 1, s, tol)
}

/// `Σ_{n≥start} a_n n^{-s}` for `Re(s) > 1 + DEFAULT_MARGIN`.
///
/// The cutoff is the smallest `N` with `‖ω‖∞ N^{1−σ}/(σ−1) ≤ tol`. When that
/// exceeds the table, the remainder past the table end is modeled by the
/// stream density plus the mean-discrepancy correction, and a warning is
/// attached.
pub fn direct_sum_from(
    table: &StreamTable,
    start: usize,
    s: Complex64,
    tol: f64,
) -> Result<EvalResult> {
    let out = direct_sum_lenient(table, start, s, tol)?;
    if out.err > tol {
        return Err(Error::DidNotConverge { err: out.err, tol });
    }
    Ok(out)
}

/// As [`direct_sum_from`] but returns the modeled result even when its
/// error estimate exceeds `tol`.
pub(crate) fn direct_sum_lenient(
    table: &StreamTable,
    start: usize,
    s: Complex64,
    tol: f64,
) -> Result<EvalResult> {
    check_finite(s)?;
    let sigma = s.re;
    if sigma <= 1.0 + DEFAULT_MARGIN {
        return Err(Error::OutOfDomain(format!(
            "direct summation needs Re(s) > {}, got {}",
            1.0 + DEFAULT_MARGIN,
            sigma
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfDomain("tolerance must be positive".into()));
    }
    let start = start.max(1);
    let norm = table.bound();
    let len = table.len();
    let needed = if norm == 0.0 {
        start
    } else {
        // half the budget for truncation, the rest for rounding
        let x = (2.0 * norm / (tol * (sigma - 1.0))).powf(1.0 / (sigma - 1.0)).ceil();
        if x.is_finite() && x < 1e18 {
            (x as usize).max(start)
        } else {
            usize::MAX
        }
    };

    if needed <= len {
        let (value, abs) = chunked_sum(start, needed, |n| table.coeff(n) * pow_neg(n as f64, s));
        let trunc = norm * (needed as f64).powf(1.0 - sigma) / (sigma - 1.0);
        let round = 4.0 * EPS * abs * phase_factor(s, needed);
        return Ok(EvalResult::new(value, trunc + round, Method::Direct));
    }
    if len < start.max(FIRST_CHECKPOINT) {
        return Err(Error::NotEnoughTerms {
            requested: needed,
            available: len,
        });
    }

    // tail-modeled mode
    let delta = table.density();
    let n = len;
    let (head, abs) = chunked_sum(start, n, |k| (table.coeff(k) - delta) * pow_neg(k as f64, s));
    let mut value = head;
    let mut err = 4.0 * EPS * abs * phase_factor(s, n);
    let mut warnings = Vec::new();
    if delta != 0.0 {
        let z = riemann_zeta(s, (tol / (4.0 * delta.abs())).max(1e-14))?;
        let (h, h_abs) = chunked_sum(1, start - 1, |k| pow_neg(k as f64, s));
        value += delta * (z.value - h);
        err += delta.abs() * (z.err + 4.0 * EPS * h_abs);
        warnings.extend(z.warnings);
    }
    let (mu, bound) = tail_model(table, n, s);
    value += (mu - table.discrepancy(n)) * pow_neg(n as f64 + 1.0, s);
    err += bound;
    let mut out = EvalResult::new(value, err, Method::Direct);
    out.push_warning(format!(
        "direct cutoff {} exceeds table length {}; remainder modeled",
        if needed == usize::MAX { "∞".to_string() } else { needed.to_string() },
        len
    ));
    out.push_warning(heuristic_warning(table));
    for w in warnings {
        out.push_warning(w);
    }
    Ok(out)
}

/// Continuation to `Re(s) > 0` by summation by parts:
/// `f(s) = δζ(s) + Σ_{n≥1} E(n)(n^{-s} − (n+1)^{-s})`, `E(n) = A(n) − δn`.
///
/// Partial sums are checked at powers of two; the remainder is the
/// mean-discrepancy model of [`tail_model`].
pub fn abel_continuation(table: &StreamTable, s: Complex64, tol: f64) -> Result<EvalResult> {
    abel_impl(table, s, tol, AbelMode::Strict)
}

/// Abel continuation summed over the whole table regardless of `tol`; `tol`
/// only sets the accuracy of the `δζ(s)` part. The returned `err` is the
/// model estimate at the table end.
pub fn abel_full_table(table: &StreamTable, s: Complex64, tol: f64) -> Result<EvalResult> {
    abel_impl(table, s, tol, AbelMode::Full)
}

/// Stops once `tol` is met, otherwise returns the table-end estimate.
pub(crate) fn abel_lenient(table: &StreamTable, s: Complex64, tol: f64) -> Result<EvalResult> {
    abel_impl(table, s, tol, AbelMode::Lenient)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum AbelMode {
    Strict,
    Lenient,
    Full,
}

fn abel_impl(table: &StreamTable, s: Complex64, tol: f64, mode: AbelMode) -> Result<EvalResult> {
    check_finite(s)?;
    let sigma = s.re;
    if sigma <= 0.0 {
        return Err(Error::OutOfDomain(format!(
            "Abel continuation needs Re(s) > 0, got {}",
            sigma
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfDomain("tolerance must be positive".into()));
    }
    let delta = table.density();
    if s == Complex64::new(1.0, 0.0) && delta != 0.0 {
        return Err(Error::PoleAt1);
    }
    let len = table.len();
    if len < 16 {
        return Err(Error::NotEnoughTerms {
            requested: FIRST_CHECKPOINT,
            available: len,
        });
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut err0 = 0.0;
    let mut warnings = Vec::new();
    if delta != 0.0 {
        let z = riemann_zeta(s, (tol / (4.0 * delta.abs())).max(1e-14))?;
        value = delta * z.value;
        err0 = delta.abs() * z.err;
        warnings.extend(z.warnings);
    }

    let weight = |n: usize| {
        let p = pow_neg(n as f64, s);
        -p * expm1(-s * (1.0 / n as f64).ln_1p())
    };
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let mut done = 0usize;
    let mut checkpoint = FIRST_CHECKPOINT.min(len);
    loop {
        let (part, part_abs) =
            chunked_sum(done + 1, checkpoint, |n| table.discrepancy(n) * weight(n));
        acc += part;
        abs += part_abs;
        done = checkpoint;

        let (mu, bound) = tail_model(table, done, s);
        let round = 4.0 * EPS * abs * phase_factor(s, done);
        let err = err0 + bound + round;
        if (err <= tol && mode != AbelMode::Full) || done == len {
            if err > tol && mode == AbelMode::Strict {
                return Err(Error::DidNotConverge { err, tol });
            }
            let total = value + acc + mu * pow_neg(done as f64 + 1.0, s);
            let mut out = EvalResult::new(total, err, Method::Abel);
            out.push_warning(heuristic_warning(table));
            for w in warnings {
                out.push_warning(w);
            }
            return Ok(out);
        }
        checkpoint = (checkpoint * 2).min(len);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realspec::RealSpec;
    use crate::sequences::CoefficientStream;
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn ones(n: usize) -> StreamTable {
        StreamTable::from_fn("one", n, 1.0, 1.0, ErrorModel::Logarithmic, |_| 1.0)
    }

    #[test]
    fn constant_stream_direct() {
        let t = ones(1 << 16);
        let r = direct_sum(&t, re(2.0), 1e-10).unwrap();
        assert!((r.value.re - PI * PI / 6.0).abs() < 1e-9);
        assert!(r.err <= 1e-10);
        // σ = 4: plain truncation fits
        let r = direct_sum(&t, re(4.0), 1e-10).unwrap();
        assert!(r.warnings.is_empty());
        assert!((r.value.re - PI.powi(4) / 90.0).abs() < 1e-10);
    }

    #[test]
    fn beatty_two_direct() {
        let two = RealSpec::rational(2, 1).unwrap();
        let t = CoefficientStream::beatty(&two).materialize(1 << 16).unwrap();
        let r = direct_sum(&t, re(2.0), 1e-10).unwrap();
        assert!((r.value.re - PI * PI / 24.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn sawtooth_direct_against_brute_force() {
        let phi = RealSpec::phi();
        let t = CoefficientStream::sawtooth(&phi).materialize(1 << 17).unwrap();
        let r = direct_sum(&t, re(3.0), 1e-10).unwrap();
        let p = phi.to_f64();
        let brute: f64 = (1..=1_000_000u64)
            .rev()
            .map(|n| {
                let x = p * n as f64;
                (x - x.floor() - 0.5) / (n as f64).powi(3)
            })
            .sum();
        assert!((r.value.re - brute).abs() < 1e-8, "{} vs {}", r.value.re, brute);
    }

    #[test]
    fn domain_errors() {
        let t = ones(1 << 12);
        assert!(matches!(direct_sum(&t, re(1.04), 1e-6), Err(Error::OutOfDomain(_))));
        assert!(matches!(abel_continuation(&t, re(-0.1), 1e-6), Err(Error::OutOfDomain(_))));
        assert_eq!(abel_continuation(&t, re(1.0), 1e-6), Err(Error::PoleAt1));
    }

    #[test]
    fn abel_rational_beatty() {
        let two = RealSpec::rational(2, 1).unwrap();
        let t = CoefficientStream::beatty(&two).materialize(1 << 18).unwrap();
        let r = abel_continuation(&t, re(0.5), 1e-7).unwrap();
        // 2^{-1/2} ζ(1/2)
        let want = -1.460_354_508_809_586_8 / 2f64.sqrt();
        assert!((r.value.re - want).abs() < 1e-7, "{}", r.value);
        assert!(!r.warnings.is_empty());
        let z = abel_continuation(&ones(1 << 14), Complex64::new(0.5, 14.134_725_141_734_693), 1e-8)
            .unwrap();
        assert!(z.value.norm() < 1e-8);
    }

    #[test]
    fn abel_matches_direct_in_overlap() {
        let phi = RealSpec::phi();
        for stream in [CoefficientStream::beatty(&phi), CoefficientStream::sawtooth(&phi)] {
            let t = stream.materialize(1 << 18).unwrap();
            for &(a, b) in &[(2.0, 0.0), (1.5, 3.0), (3.0, -5.0)] {
                let s = Complex64::new(a, b);
                let d = direct_sum(&t, s, 1e-8).unwrap();
                let ab = abel_continuation(&t, s, 1e-8).unwrap();
                assert!((d.value - ab.value).norm() <= d.err + ab.err, "{} at {}", t.label(), s);
            }
        }
    }

    #[test]
    fn abel_truncation_honesty() {
        let phi = RealSpec::phi();
        for stream in [CoefficientStream::beatty(&phi), CoefficientStream::sawtooth(&phi)] {
            let long = stream.materialize(1 << 20).unwrap();
            let short = stream.materialize(1 << 16).unwrap();
            for &(a, b) in &[(0.3, 0.0), (0.5, 2.0), (0.8, -4.0), (1.5, 1.0)] {
                let s = Complex64::new(a, b);
                let lo = abel_full_table(&short, s, 1e-12).unwrap();
                let hi = abel_full_table(&long, s, 1e-12).unwrap();
                let realized = (lo.value - hi.value).norm();
                assert!(realized <= lo.err, "{} at {}: {} > {}", short.label(), s, realized, lo.err);
            }
        }
    }
}
