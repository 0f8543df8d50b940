use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{check_finite, pow_neg, Complex64, EvalResult, Method, EPS};
use crate::error::{Error, Result};
use crate::realspec::ratio_to_f64;

/// Number of Bernoulli correction terms.
pub const BERNOULLI_ORDER: usize = 15;

/// Tolerances below this are refused outright.
const TOL_FLOOR: f64 = 1e-15;

const MAX_CUTOFF: usize = 1 << 22;

/// `B_{2k}/(2k)!` for `k = 1..=K+1`, the last one feeding the error estimate.
fn em_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let top = 2 * (BERNOULLI_ORDER + 1);
        // Σ_{j=0}^{m} C(m+1, j) B_j = 0
        let mut b: Vec<BigRational> = vec![BigRational::one()];
        for m in 1..=top {
            let mut acc = BigRational::zero();
            let mut binom = BigInt::one();
            for (j, bj) in b.iter().enumerate() {
                acc += bj * BigRational::from_integer(binom.clone());
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        let mut fact = BigInt::one();
        let mut out = Vec::with_capacity(BERNOULLI_ORDER + 1);
        for j in 1..=top {
            fact *= BigInt::from(j);
            if j % 2 == 0 {
                let r = &b[j] / BigRational::from_integer(fact.clone());
                out.push(ratio_to_f64(r.numer(), r.denom()));
            }
        }
        out
    })
}

/// With order 15 the Bernoulli tail already sits far below binary64 at
/// `M ≈ max(|s|, 20)`; a larger start only feeds rounding when `Re(s) < 1`.
fn initial_cutoff(s: Complex64) -> usize {
    (s.norm().ceil() as usize).max(20)
}

/// Euler–Maclaurin at cutoff `m`: (value, truncation bound, rounding estimate).
fn em_at(s: Complex64, gamma: f64, m: usize) -> (Complex64, f64, f64) {
    let mut head = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for n in (0..m).rev() {
        let term = pow_neg(n as f64 + gamma, s);
        abs_sum += term.norm();
        head += term;
    }
    let x = m as f64 + gamma;
    let xs = pow_neg(x, s);
    let integral = xs * x / (s - 1.0);
    let mut value = head + integral + 0.5 * xs;
    abs_sum += integral.norm();

    let coeffs = em_coefficients();
    // rising factorial (s)_{2k−1} times x^{−s−2k+1}
    let mut rising = s;
    let mut xpow = xs / x;
    let inv_x2 = 1.0 / (x * x);
    for (k, c) in coeffs.iter().take(BERNOULLI_ORDER).enumerate() {
        value += *c * rising * xpow;
        let j = (2 * k + 1) as f64;
        rising *= (s + j) * (s + j + 1.0);
        xpow *= inv_x2;
    }
    let next = coeffs[BERNOULLI_ORDER] * rising * xpow;
    let edge = s + (2 * BERNOULLI_ORDER + 1) as f64;
    let trunc = next.norm() * edge.norm() / edge.re;
    // each term carries a relative error of about ε(1 + |t| log n)
    let phase = 1.0 + s.im.abs() * x.ln();
    (value, trunc, 2.0 * EPS * abs_sum * phase)
}

/// `ζ(s; γ) = Σ_{n≥0} (n+γ)^{-s}`, `γ > 0`.
pub fn hurwitz_zeta(s: Complex64, gamma: f64, tol: f64) -> Result<EvalResult> {
    check_finite(s)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::OutOfDomain(format!("Hurwitz shift must be positive, got {}", gamma)));
    }
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::PoleAt1);
    }
    if !(tol > 0.0) {
        return Err(Error::OutOfDomain("tolerance must be positive".into()));
    }
    if tol < TOL_FLOOR {
        return Err(Error::ToleranceUnreachable { tol });
    }
    if s.re <= -(BERNOULLI_ORDER as f64) {
        return Err(Error::OutOfDomain(format!(
            "Euler-Maclaurin with order {} needs Re(s) > -{}",
            BERNOULLI_ORDER, BERNOULLI_ORDER
        )));
    }
    let mut m = initial_cutoff(s);
    loop {
        let (value, trunc, round) = em_at(s, gamma, m);
        let err = trunc + round;
        if err <= tol {
            return Ok(EvalResult::new(value, err, Method::HurwitzEm));
        }
        if round > tol && trunc <= tol {
            return Err(Error::ToleranceUnreachable { tol });
        }
        if m >= MAX_CUTOFF {
            return Err(Error::DidNotConverge { err, tol });
        }
        m *= 2;
    }
}

/// `ζ(s) = ζ(s; 1)`.
pub fn riemann_zeta(s: Complex64, tol: f64) -> Result<EvalResult> {
    hurwitz_zeta(s, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(s: f64) -> Complex64 {
        Complex64::new(s, 0.0)
    }

    #[test]
    fn bernoulli_ratios() {
        let c = em_coefficients();
        assert!((c[0] - 1.0 / 12.0).abs() < 1e-17);
        assert!((c[1] + 1.0 / 720.0).abs() < 1e-18);
        assert!((c[2] - 1.0 / 30240.0).abs() < 1e-19);
        assert_eq!(c.len(), BERNOULLI_ORDER + 1);
    }

    #[test]
    fn known_values() {
        let z2 = riemann_zeta(re(2.0), 1e-12).unwrap();
        assert!((z2.value.re - PI * PI / 6.0).abs() < 1e-12);
        assert!(z2.err <= 1e-12);
        let h = hurwitz_zeta(re(2.0), 0.5, 1e-12).unwrap();
        assert!((h.value.re - PI * PI / 2.0).abs() < 1e-11);
        let m1 = riemann_zeta(re(-1.0), 1e-12).unwrap();
        assert!((m1.value.re + 1.0 / 12.0).abs() < 1e-12);
        // mpmath zeta(0.5)
        let half = riemann_zeta(re(0.5), 1e-12).unwrap();
        assert!((half.value.re + 1.460_354_508_809_586_8).abs() < 1e-12);
        // mpmath zeta(0.5 + 14.134725141734693j) ~ 0
        let rho = riemann_zeta(Complex64::new(0.5, 14.134_725_141_734_693), 1e-10).unwrap();
        assert!(rho.value.norm() < 1e-9);
        assert!(riemann_zeta(re(0.0), 1e-12).unwrap().value.re + 0.5 < 1e-12);
    }

    #[test]
    fn complex_value_against_mpmath() {
        // mpmath.zeta(2+3j)
        let z = riemann_zeta(Complex64::new(2.0, 3.0), 1e-12).unwrap().value;
        assert!((z - Complex64::new(0.798_021_985_146_275_7, -0.113_744_308_052_938_5)).norm() < 1e-12);
        // mpmath.zeta(-3.5, 0.3)
        let h = hurwitz_zeta(re(-3.5), 0.3, 1e-9).unwrap().value.re;
        assert!((h - 0.002_457_328_237_722_088_6).abs() < 1e-10, "{}", h);
    }

    #[test]
    fn duplication_identity() {
        for &(a, b) in &[(2.5, 0.0), (0.3, 4.0), (-0.7, -2.0), (1.5, 10.0), (3.0, 0.5)] {
            let s = Complex64::new(a, b);
            let h = hurwitz_zeta(s, 0.5, 1e-11).unwrap().value;
            let z = riemann_zeta(s, 1e-11).unwrap().value;
            let rhs = (Complex64::new(2.0, 0.0).powc(s) - 1.0) * z;
            assert!((h - rhs).norm() < 1e-9, "s = {}", s);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(riemann_zeta(re(1.0), 1e-10), Err(Error::PoleAt1));
        assert!(matches!(riemann_zeta(re(2.0), 1e-17), Err(Error::ToleranceUnreachable { .. })));
        assert!(matches!(hurwitz_zeta(re(2.0), 0.0, 1e-10), Err(Error::OutOfDomain(_))));
    }
}
