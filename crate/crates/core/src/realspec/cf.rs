use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::quad::{QuadNumber, QuadraticSurd};
use super::{floor_ratio, Repr, RealSpec};
use crate::error::{Error, Result};

/// Quadratic expansions are periodic after a short preperiod; this caps the
/// search for pathological radicands.
const MAX_PERIOD_SEARCH: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Period {
    /// Index of the first partial quotient of the repeating block.
    pub preperiod: usize,
    pub length: usize,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct ContinuedFractionExpansion {
    pub a0: BigInt,
    /// `a_1, a_2, …`
    pub partial_quotients: Vec<BigInt>,
    pub finite: bool,
    pub period: Option<Period>,
    /// Certified prefix length (counting `a_0`) for decimal inputs.
    pub reliable_terms: Option<usize>,
    source: RealSpec,
}

impl ContinuedFractionExpansion {
    /// Number of available quotients including `a_0`.
    pub fn len(&self) -> usize {
        1 + self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn term(&self, k: usize) -> Option<&BigInt> {
        if k == 0 {
            Some(&self.a0)
        } else {
            self.partial_quotients.get(k - 1)
        }
    }

    pub fn source(&self) -> &RealSpec {
        &self.source
    }

    pub fn quotients(&self) -> impl Iterator<Item = &BigInt> {
        std::iter::once(&self.a0).chain(self.partial_quotients.iter())
    }
}

/// Expands α to at most `max_terms` quotients (counting `a_0`).
///
/// Rationals stop at the end of the Euclidean algorithm; quadratic
/// irrationals are scanned until a complete quotient repeats, which fixes the
/// period exactly; decimal inputs are expanded by exact interval arithmetic
/// and stop at the first quotient the enclosure cannot certify.
pub fn cf_expand(spec: &RealSpec, max_terms: usize) -> Result<ContinuedFractionExpansion> {
    if max_terms == 0 {
        return Err(Error::InvalidSpec("max_terms must be at least 1".into()));
    }
    let mut quotients: Vec<BigInt> = Vec::new();
    let mut finite = false;
    let mut period = None;
    let mut reliable = None;
    match &spec.repr {
        Repr::Rational(r) => {
            let mut x = r.clone();
            loop {
                let a = floor_ratio(&x);
                let rest = &x - BigRational::from_integer(a.clone());
                quotients.push(a);
                if rest.is_zero() {
                    finite = true;
                    break;
                }
                if quotients.len() == max_terms {
                    break;
                }
                x = rest.recip();
            }
        }
        Repr::Quadratic { surd, .. } => {
            let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
            let mut theta = surd.clone();
            let mut i = 0usize;
            loop {
                if period.is_none() {
                    let key = (theta.p().clone(), theta.q().clone());
                    if let Some(&j) = seen.get(&key) {
                        period = Some(Period {
                            preperiod: j,
                            length: i - j,
                            exact: true,
                        });
                    } else {
                        seen.insert(key, i);
                    }
                }
                if quotients.len() >= max_terms && period.is_some() {
                    break;
                }
                if i > MAX_PERIOD_SEARCH {
                    return Err(Error::InvalidSpec("period search exceeded its cap".into()));
                }
                let (a, next) = theta.step();
                if quotients.len() < max_terms {
                    quotients.push(a);
                }
                theta = next;
                i += 1;
            }
        }
        Repr::Decimal(d) => {
            let (mut lo, mut hi) = (d.lo.clone(), d.hi.clone());
            while quotients.len() < max_terms {
                let a = floor_ratio(&lo);
                let ar = BigRational::from_integer(a.clone());
                if floor_ratio(&hi) != a || lo == ar {
                    break;
                }
                quotients.push(a);
                let (l, h) = (&hi - &ar, &lo - &ar);
                lo = l.recip();
                hi = h.recip();
            }
            if quotients.is_empty() {
                return Err(Error::PrecisionExhausted(
                    "decimal enclosure does not certify the integer part".into(),
                ));
            }
            reliable = Some(quotients.len());
        }
    }
    let a0 = quotients.remove(0);
    Ok(ContinuedFractionExpansion {
        a0,
        partial_quotients: quotients,
        finite,
        period,
        reliable_terms: reliable,
        source: spec.clone(),
    })
}

/// The first `n` convergents `p_k/q_k`, `k = 0..n`.
pub fn convergents(cf: &ContinuedFractionExpansion, n: usize) -> Result<Vec<(BigInt, BigInt)>> {
    if n > cf.len() {
        return Err(Error::NotEnoughTerms {
            requested: n,
            available: cf.len(),
        });
    }
    let mut out = Vec::with_capacity(n);
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (cf.a0.clone(), BigInt::one());
    for k in 0..n {
        if k > 0 {
            let a = &cf.partial_quotients[k - 1];
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
        }
        out.push((p.clone(), q.clone()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompleteQuotient {
    Surd(QuadraticSurd),
    Rational(BigRational),
    /// Certified enclosure for decimal inputs.
    Interval { lo: BigRational, hi: BigRational },
}

impl CompleteQuotient {
    pub fn to_f64(&self) -> f64 {
        match self {
            CompleteQuotient::Surd(s) => s.to_f64(),
            CompleteQuotient::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            CompleteQuotient::Interval { lo, hi } => {
                ((lo + hi) / BigRational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
            }
        }
    }
}

/// `θ_n = [a_n; a_{n+1}, …]`, with `θ_0 = α`.
pub fn complete_quotient(cf: &ContinuedFractionExpansion, n: usize) -> Result<CompleteQuotient> {
    match &cf.source.repr {
        Repr::Quadratic { surd, .. } => {
            let mut theta = surd.clone();
            for _ in 0..n {
                theta = theta.step().1;
            }
            Ok(CompleteQuotient::Surd(theta))
        }
        Repr::Rational(r) => {
            let mut x = r.clone();
            for k in 0..n {
                let rest = &x - BigRational::from_integer(floor_ratio(&x));
                if rest.is_zero() {
                    return Err(Error::NotEnoughTerms {
                        requested: n + 1,
                        available: k + 1,
                    });
                }
                x = rest.recip();
            }
            Ok(CompleteQuotient::Rational(x))
        }
        Repr::Decimal(d) => {
            let reliable = cf.reliable_terms.unwrap_or(0);
            if n >= reliable {
                return Err(Error::PrecisionExhausted(format!(
                    "complete quotient {} lies beyond the {} certified terms",
                    n, reliable
                )));
            }
            let (mut lo, mut hi) = (d.lo.clone(), d.hi.clone());
            for _ in 0..n {
                let ar = BigRational::from_integer(floor_ratio(&lo));
                let (l, h) = (&hi - &ar, &lo - &ar);
                lo = l.recip();
                hi = h.recip();
            }
            Ok(CompleteQuotient::Interval { lo, hi })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeEstimate {
    pub tau_hat: f64,
    /// `(k, log q_{k+1} / log q_k)` for every `k ≥ 1` with `q_k > 1`.
    pub trace: Vec<(usize, f64)>,
    /// Indices `k` entering the fit.
    pub window: (usize, usize),
}

fn ln_big(x: &BigInt) -> f64 {
    match x.to_f64() {
        Some(v) if v.is_finite() => v.ln(),
        _ => {
            let bits = x.bits();
            let shift = bits.saturating_sub(64);
            let top: BigInt = x >> shift;
            top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// Estimates the Diophantine type from the first `n` convergent denominators.
///
/// The trace of `log q_{k+1}/log q_k` is returned as-is. The point estimate
/// is the least-squares slope of `log q_{k+1}` against `log q_k` over the
/// second half of the trace (at least two points), floored at 1. Bounded
/// partial quotients give `log q_{k+1} = log q_k + O(1)` and a slope of 1
/// even at small `k`, where the raw ratios still carry an `O(1/k)` bias.
/// This is an estimate of a limsup, never a certificate.
pub fn type_estimate(cf: &ContinuedFractionExpansion, n: usize) -> Result<TypeEstimate> {
    if n < 3 {
        return Err(Error::InvalidSpec("type_estimate needs n >= 3".into()));
    }
    let conv = convergents(cf, n)?;
    let logs: Vec<f64> = conv.iter().map(|(_, q)| ln_big(q)).collect();
    let trace: Vec<(usize, f64)> = (1..n - 1)
        .filter(|&k| conv[k].1 > BigInt::one())
        .map(|k| (k, logs[k + 1] / logs[k]))
        .collect();
    if trace.is_empty() {
        return Err(Error::NotEnoughTerms {
            requested: n + 1,
            available: cf.len(),
        });
    }
    let start = (trace.len() / 2).min(trace.len().saturating_sub(2));
    let tail = &trace[start..];
    let tau_hat = if tail.len() < 2 {
        tail[0].1
    } else {
        let xs: Vec<f64> = tail.iter().map(|&(k, _)| logs[k]).collect();
        let ys: Vec<f64> = tail.iter().map(|&(k, _)| logs[k + 1]).collect();
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            tail[tail.len() - 1].1
        }
    };
    Ok(TypeEstimate {
        tau_hat: tau_hat.max(1.0),
        window: (tail[0].0, tail[tail.len() - 1].0),
        trace,
    })
}

#[derive(Clone, Debug)]
pub struct Eta {
    /// `η⁻¹ = θ_{p+1} ⋯ θ_{p+q}`, exact.
    pub inverse: QuadNumber,
    /// `log η`, negative.
    pub log_eta: f64,
}

/// `η_α⁻¹` as the product of the complete quotients over one period window
/// starting after the preperiod.
pub fn eta(cf: &ContinuedFractionExpansion) -> Result<Eta> {
    let period = cf.period.as_ref().ok_or(Error::NotPeriodic)?;
    eta_over_window(cf, period.preperiod + 1, period.length)
}

pub(crate) fn eta_over_window(
    cf: &ContinuedFractionExpansion,
    first: usize,
    length: usize,
) -> Result<Eta> {
    let surd = cf.source.surd().ok_or(Error::NotPeriodic)?;
    let mut theta = surd.clone();
    for _ in 0..first {
        theta = theta.step().1;
    }
    let mut prod = theta.to_number();
    for _ in 1..length {
        theta = theta.step().1;
        prod = prod.mul(&theta.to_number());
    }
    debug_assert!(prod.b().is_positive() || prod.a().is_positive());
    let log_eta = -prod.to_f64().ln();
    Ok(Eta {
        inverse: prod,
        log_eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn euclid(mut p: i64, mut q: i64) -> Vec<i64> {
        let mut out = vec![];
        while q != 0 {
            out.push(p.div_euclid(q));
            let r = p.rem_euclid(q);
            p = q;
            q = r;
        }
        out
    }

    #[test]
    fn phi_is_all_ones_with_period_one() {
        let cf = cf_expand(&RealSpec::phi(), 10).unwrap();
        assert_eq!(cf.a0, BigInt::one());
        assert!(cf.partial_quotients.iter().all(|a| a.is_one()));
        assert_eq!(cf.period, Some(Period { preperiod: 0, length: 1, exact: true }));
    }

    #[test]
    fn rational_matches_euclid() {
        let cf = cf_expand(&RealSpec::rational(355, 113).unwrap(), 50).unwrap();
        let got: Vec<BigInt> = cf.quotients().cloned().collect();
        assert_eq!(got, ints(&euclid(355, 113)));
        assert_eq!(got, ints(&[3, 7, 16]));
        assert!(cf.finite);
        assert!(cf.period.is_none());
    }

    #[test]
    fn sqrt2_period() {
        let cf = cf_expand(&RealSpec::sqrt(2).unwrap(), 5).unwrap();
        let got: Vec<BigInt> = cf.quotients().cloned().collect();
        assert_eq!(got, ints(&[1, 2, 2, 2, 2]));
        assert_eq!(cf.period, Some(Period { preperiod: 1, length: 1, exact: true }));
    }

    #[test]
    fn convergent_examples() {
        let cf = cf_expand(&RealSpec::phi(), 5).unwrap();
        let c = convergents(&cf, 5).unwrap();
        let want = [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)];
        for (got, w) in c.iter().zip(want) {
            assert_eq!(got, &(BigInt::from(w.0), BigInt::from(w.1)));
        }
        let r = cf_expand(&RealSpec::rational(355, 113).unwrap(), 10).unwrap();
        let c = convergents(&r, 3).unwrap();
        assert_eq!(c[1], (BigInt::from(22), BigInt::from(7)));
        assert_eq!(c[2], (BigInt::from(355), BigInt::from(113)));
        assert!(matches!(convergents(&r, 4), Err(Error::NotEnoughTerms { .. })));
        let s = cf_expand(&RealSpec::sqrt(2).unwrap(), 4).unwrap();
        let c = convergents(&s, 4).unwrap();
        assert_eq!(c[3], (BigInt::from(17), BigInt::from(12)));
    }

    #[test]
    fn complete_quotient_examples() {
        let s = cf_expand(&RealSpec::sqrt(2).unwrap(), 4).unwrap();
        let t1 = complete_quotient(&s, 1).unwrap();
        let want = RealSpec::quadratic(1, 1, 2, 1).unwrap();
        match t1 {
            CompleteQuotient::Surd(x) => assert_eq!(&x.to_number(), want.as_quadratic().unwrap()),
            other => panic!("{:?}", other),
        }
        let p = cf_expand(&RealSpec::phi(), 4).unwrap();
        match complete_quotient(&p, 3).unwrap() {
            CompleteQuotient::Surd(x) => {
                assert_eq!(&x.to_number(), RealSpec::phi().as_quadratic().unwrap())
            }
            other => panic!("{:?}", other),
        }
        let r = cf_expand(&RealSpec::rational(355, 113).unwrap(), 4).unwrap();
        assert_eq!(
            complete_quotient(&r, 2).unwrap(),
            CompleteQuotient::Rational(BigRational::from_i64(16).unwrap())
        );
    }

    #[test]
    fn eta_examples() {
        let p = cf_expand(&RealSpec::phi(), 4).unwrap();
        let e = eta(&p).unwrap();
        assert_eq!(&e.inverse, RealSpec::phi().as_quadratic().unwrap());
        assert!((e.log_eta + 0.481_211_825_059_603_4).abs() < 1e-12);
        let s = cf_expand(&RealSpec::sqrt(2).unwrap(), 4).unwrap();
        let e = eta(&s).unwrap();
        assert_eq!(&e.inverse, RealSpec::quadratic(1, 1, 2, 1).unwrap().as_quadratic().unwrap());
        assert!((e.log_eta + 0.881_373_587_019_543).abs() < 1e-12);
        let r = cf_expand(&RealSpec::rational(3, 2).unwrap(), 4).unwrap();
        assert!(matches!(eta(&r), Err(Error::NotPeriodic)));
    }

    #[test]
    fn eta_is_window_independent() {
        let a: RealSpec = "quadratic:(3+1*sqrt(13))/2".parse().unwrap();
        for spec in [a, RealSpec::sqrt(7).unwrap(), RealSpec::sqrt(19).unwrap()] {
            let cf = cf_expand(&spec, 40).unwrap();
            let per = cf.period.clone().unwrap();
            let e1 = eta_over_window(&cf, per.preperiod + 1, per.length).unwrap();
            let e2 = eta_over_window(&cf, per.preperiod + 2, per.length).unwrap();
            assert_eq!(e1.inverse, e2.inverse);
            assert!(e1.inverse.to_f64() > 1.0);
        }
    }

    #[test]
    fn decimal_expansion_of_sqrt2_agrees_with_exact() {
        let d = RealSpec::decimal("1.414213562373095048801688724209698078569671875376948", 40)
            .unwrap();
        let cf = cf_expand(&d, 200).unwrap();
        let reliable = cf.reliable_terms.unwrap();
        assert!(reliable > 20 && reliable < 200, "reliable = {}", reliable);
        let exact = cf_expand(&RealSpec::sqrt(2).unwrap(), reliable).unwrap();
        assert!(cf.quotients().eq(exact.quotients()));
        assert!(matches!(
            complete_quotient(&cf, reliable),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn type_estimates_for_bounded_quotients() {
        for spec in [RealSpec::phi(), RealSpec::sqrt(2).unwrap()] {
            let cf = cf_expand(&spec, 30).unwrap();
            let t = type_estimate(&cf, 30).unwrap();
            assert!((t.tau_hat - 1.0).abs() < 0.02, "{}", t.tau_hat);
        }
    }
}
