use super::dirichlet::direct_sum_lenient;
use super::{
    check_finite, pow_neg, riemann_zeta, Complex64, EvalResult, Evaluator,
    Method, DEFAULT_MARGIN, EPS,
};
use crate::error::{Error, Result};
use crate::sequences::StreamTable;

/// Hard cap on the number of binomial terms.
pub const MAX_SHIFT_TERMS: usize = 400;

const MIN_TERM_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftSign {
    /// weights `(−q)^m`, for `Σ a_{n+q} n^{-s}`
    Backward,
    /// weights `q^m`, for `Σ a_{n−q} n^{-s}`
    Forward,
}

/// `C(−s, m)` by the multiplicative recurrence.
pub fn binom_neg_s(s: Complex64, m: usize) -> Complex64 {
    let mut c = Complex64::new(1.0, 0.0);
    for k in 1..=m {
        c = c * (-s - (k as f64) + 1.0) / k as f64;
    }
    c
}

/// `‖ω‖∞ (q+1)^{m0+|s|} ζ(σ+m0)`.
pub fn shift_truncation_bound(norm: f64, q: usize, m0: usize, s: Complex64, sigma: f64) -> Result<f64> {
    if sigma + m0 as f64 <= 1.0 {
        return Err(Error::OutOfDomain(format!(
            "bound needs sigma + m0 > 1, got {}",
            sigma + m0 as f64
        )));
    }
    if norm == 0.0 {
        return Ok(0.0);
    }
    let z = riemann_zeta(Complex64::new(sigma + m0 as f64, 0.0), 1e-12)?;
    Ok(norm * ((q + 1) as f64).powf(m0 as f64 + s.norm()) * z.value.re)
}

/// Upper bound for `Σ_{n≥q+1} n^{-x}`, `x > 1`.
fn tail_zeta_bound(q: usize, x: f64) -> f64 {
    let a = (q + 1) as f64;
    a.powf(-x) * (1.0 + a / (x - 1.0))
}

/// `Σ_{m≥m_start} (±q)^m C(−s,m) φ_{q,m}(s)` with
/// `φ_{q,m}(s) = Σ_{n>q} a_n n^{-s-m}`.
///
/// `φ_{q,m}` is summed directly from the table when `Re(s)+m` clears the
/// direct-summation margin, otherwise obtained as `base_eval(s+m)` minus the
/// head `Σ_{n≤q} a_n n^{-s-m}`. The series is cut once the geometric bound
/// on the remaining terms falls below half the tolerance.
pub fn binomial_shift_series(
    table: &StreamTable,
    q: usize,
    sign: ShiftSign,
    m_start: usize,
    s: Complex64,
    tol: f64,
    base_eval: Option<&Evaluator<'_>>,
) -> Result<EvalResult> {
    let out = binomial_shift_lenient(table, q, sign, m_start, s, tol, base_eval)?;
    if out.err > tol {
        return Err(Error::DidNotConverge { err: out.err, tol });
    }
    Ok(out)
}

/// As [`binomial_shift_series`], returning the estimate even when the
/// accumulated error exceeds `tol`.
pub(crate) fn binomial_shift_lenient(
    table: &StreamTable,
    q: usize,
    sign: ShiftSign,
    m_start: usize,
    s: Complex64,
    tol: f64,
    base_eval: Option<&Evaluator<'_>>,
) -> Result<EvalResult> {
    check_finite(s)?;
    if q == 0 {
        return Err(Error::OutOfDomain("shift amount must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfDomain("tolerance must be positive".into()));
    }
    let qf = q as f64;
    let norm = table.bound();
    let sigma = s.re;
    let ratio_q = qf / (qf + 1.0);
    let dist = (s - 1.0).norm();

    let mut out = EvalResult::new(Complex64::new(0.0, 0.0), 0.0, Method::Shift);
    let mut binom = binom_neg_s(s, m_start);
    let mut qpow = match sign {
        ShiftSign::Backward => (-qf).powi(m_start as i32),
        ShiftSign::Forward => qf.powi(m_start as i32),
    };
    let step = match sign {
        ShiftSign::Backward => -qf,
        ShiftSign::Forward => qf,
    };
    let mut m = m_start;
    loop {
        let w = binom * qpow;
        if w != Complex64::new(0.0, 0.0) {
            let sm = s + m as f64;
            let term_tol = tol / (4.0 * ((m + 1) as f64).powi(2) * w.norm());
            let phi = if sm.re > 1.0 + DEFAULT_MARGIN {
                direct_sum_lenient(table, q + 1, sm, term_tol.max(f64::MIN_POSITIVE))?
            } else {
                let base = base_eval.ok_or_else(|| {
                    Error::OutOfDomain(format!(
                        "no continuation available for the shifted argument {}",
                        sm
                    ))
                })?;
                let b = base(sm, (term_tol / 2.0).max(MIN_TERM_TOL))?;
                let head: Complex64 = (1..=q.min(table.len()))
                    .map(|n| table.coeff(n) * pow_neg(n as f64, sm))
                    .sum();
                b.add_const(-head, 4.0 * EPS * qf * norm)
            };
            out.value += w * phi.value;
            out.err += w.norm() * phi.err;
            out.absorb_warnings(&phi);
        }

        let x = sigma + m as f64;
        if m >= m_start && x > 1.0 {
            let r = ratio_q * (1.0 + dist / (m + 1) as f64);
            if r < 1.0 {
                let t_m = norm * w.norm() * tail_zeta_bound(q, x);
                let rest = t_m * r / (1.0 - r);
                if rest <= tol / 2.0 {
                    out.err += rest;
                    break;
                }
            }
        }
        if m - m_start >= MAX_SHIFT_TERMS {
            return Err(Error::DidNotConverge { err: f64::INFINITY, tol });
        }
        binom = binom * (-s - m as f64) / (m + 1) as f64;
        qpow *= step;
        m += 1;
    }
    Ok(out)
}

/// `B^q f(s) = Σ_{n≥1} a_{n+q} n^{-s}`.
pub fn shift_backward_eval(
    table: &StreamTable,
    q: usize,
    s: Complex64,
    tol: f64,
    base_eval: Option<&Evaluator<'_>>,
) -> Result<EvalResult> {
    binomial_shift_series(table, q, ShiftSign::Backward, 0, s, tol, base_eval)
}

/// `F^p f(s) = Σ_{n>p} a_{n−p} n^{-s}`: finite head over `p < n ≤ 2p` plus
/// the binomial series.
pub fn shift_forward_eval(
    table: &StreamTable,
    p: usize,
    s: Complex64,
    tol: f64,
    base_eval: Option<&Evaluator<'_>>,
) -> Result<EvalResult> {
    let head: Complex64 = (p + 1..=2 * p)
        .map(|n| table.coeff(n - p) * pow_neg(n as f64, s))
        .sum();
    let series = binomial_shift_series(table, p, ShiftSign::Forward, 0, s, tol / 2.0, base_eval)?;
    let mut out = series.add_const(head, 4.0 * EPS * p as f64 * table.bound());
    out.method = Method::Shift;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{abel_continuation, abel_full_table, direct_sum};
    use crate::realspec::RealSpec;
    use crate::sequences::{CoefficientStream, ErrorModel};
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_neg_s(re(2.0), 2), re(3.0));
        assert_eq!(binom_neg_s(re(2.0), 1), re(-2.0));
        assert_eq!(binom_neg_s(Complex64::new(0.3, 7.0), 0), re(1.0));
        let s = Complex64::new(0.7, -3.2);
        for m in 1..40 {
            let lhs = binom_neg_s(s, m) * m as f64;
            let rhs = binom_neg_s(s, m - 1) * (-s - m as f64 + 1.0);
            assert!((lhs - rhs).norm() <= 4.0 * EPS * lhs.norm() * m as f64);
        }
    }

    #[test]
    fn truncation_bound_values() {
        let b = shift_truncation_bound(1.0, 1, 3, re(0.5), 0.5).unwrap();
        assert!((b - 12.75).abs() < 0.01, "{}", b);
        assert_eq!(shift_truncation_bound(0.0, 1, 3, re(0.5), 0.5).unwrap(), 0.0);
        assert!(matches!(
            shift_truncation_bound(1.0, 1, 1, re(0.0), 0.0),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn sawtooth_backward_matches_shifted_table() {
        let phi = RealSpec::phi();
        let t = CoefficientStream::sawtooth(&phi).materialize(1 << 20).unwrap();
        for (q, s) in [(1usize, re(2.0)), (2, re(1.5)), (3, Complex64::new(2.5, 4.0))] {
            let r = shift_backward_eval(&t, q, s, 1e-8, None).unwrap();
            let d = direct_sum(&t.shifted_backward(q), s, 1e-8).unwrap();
            assert!((r.value - d.value).norm() <= r.err + d.err, "q={} s={}", q, s);
        }
    }

    #[test]
    fn constant_stream_shifts() {
        let t = StreamTable::from_fn("one", 1 << 14, 1.0, 1.0, ErrorModel::Logarithmic, |_| 1.0);
        let b = shift_backward_eval(&t, 1, re(2.0), 1e-9, None).unwrap();
        assert!((b.value.re - PI * PI / 6.0).abs() < 1e-8);
        let f = shift_forward_eval(&t, 1, re(2.0), 1e-9, None).unwrap();
        assert!((f.value.re - (PI * PI / 6.0 - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn beatty_forward_against_brute_force() {
        let phi = RealSpec::phi();
        let t = CoefficientStream::beatty(&phi).materialize(1 << 18).unwrap();
        let r = shift_forward_eval(&t, 1, re(2.0), 1e-9, None).unwrap();
        let p = phi.to_f64();
        let brute: f64 = (1..=3_000_000u64)
            .rev()
            .map(|n| ((p * n as f64).floor() + 1.0).powi(-2))
            .sum::<f64>()
            + 1.0 / (p * p * 3e6);
        assert!((r.value.re - brute).abs() < 1e-8, "{} vs {}", r.value.re, brute);
    }

    #[test]
    fn continuation_through_base_eval() {
        let phi = RealSpec::phi();
        let t = CoefficientStream::sawtooth(&phi).materialize(1 << 18).unwrap();
        let base = |s: Complex64, tol: f64| abel_full_table(&t, s, tol.max(1e-12));
        let s = re(1.5);
        let via = shift_forward_eval(&t, 1, s, 1e-7, Some(&base)).unwrap();
        let d = direct_sum(&t.shifted_forward(1), s, 1e-8).unwrap();
        assert!((via.value - d.value).norm() <= via.err + d.err);
        // below the direct region only the base evaluator can supply φ_{q,0}
        assert!(shift_backward_eval(&t, 1, re(0.5), 1e-6, None).is_err());
        let r = shift_backward_eval(&t, 1, re(0.5), 1e-2, Some(&base)).unwrap();
        let tb = t.shifted_backward(1);
        let a = abel_continuation(&tb, re(0.5), 1e-2).unwrap();
        assert!((r.value - a.value).norm() <= r.err + a.err);
    }
}
