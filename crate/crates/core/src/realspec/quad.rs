//! Exact arithmetic in real quadratic fields.
//!
//! [`QuadNumber`] is a general element `(a + b√d)/c` of ℚ(√d); it is what
//! products, reciprocals and Diophantine error terms are computed in.
//! [`QuadraticSurd`] is the continued-fraction normal form `(P + √D)/Q` with
//! `Q | D − P²`, which makes one expansion step a handful of integer ops and
//! lets period detection compare `(P, Q)` pairs exactly.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sign of `x + y√d` for integers `x, y` and non-square `d > 0`.
pub(crate) fn sign_of(x: &BigInt, y: &BigInt, d: &BigInt) -> Ordering {
    let sx = x.sign_cmp();
    let sy = y.sign_cmp();
    if sy == Ordering::Equal {
        return sx;
    }
    if sx == Ordering::Equal || sx == sy {
        return sy;
    }
    // opposite signs: the larger magnitude wins
    let xx = x * x;
    let yyd = y * y * d;
    if xx > yyd {
        sx
    } else {
        sy
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        self.cmp(&BigInt::zero())
    }
}

/// `⌊y√d⌋` for integer `y` and non-square `d` (or `y = 0`).
fn floor_scaled_root(y: &BigInt, d: &BigInt) -> BigInt {
    if y.is_zero() {
        return BigInt::zero();
    }
    let r = (y * y * d).sqrt();
    if y.is_positive() {
        r
    } else {
        -r - 1
    }
}

/// Splits `d = k² · core` with `core` square-free over primes below a trial
/// bound. Radicands in this crate are small, so trial division is complete in
/// practice; any square factor above the bound is simply left in `core`.
pub(crate) fn square_free_split(d: &BigInt) -> (BigInt, BigInt) {
    let mut core = d.clone();
    let mut k = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(1_000_000u32);
    while &p * &p <= core && p < limit {
        let pp = &p * &p;
        while (&core % &pp).is_zero() {
            core /= &pp;
            k *= &p;
        }
        p += 1;
    }
    (k, core)
}

/// Exact element `(a + b√d)/c` of ℚ(√d), `c > 0`, `gcd(a, b, c) = 1`,
/// `d > 1` not a perfect square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadNumber {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl QuadNumber {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        let (mut a, mut b, mut c) = (a, b, c);
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadNumber { a, b, c, d }
    }

    pub fn from_integer(k: BigInt, d: BigInt) -> Self {
        QuadNumber::new(k, BigInt::zero(), BigInt::one(), d)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, &self.d)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn floor(&self) -> BigInt {
        let t = floor_scaled_root(&self.b, &self.d);
        (&self.a + t).div_floor(&self.c)
    }

    pub fn recip(&self) -> Self {
        // c / (a + b√d) = c (a − b√d) / (a² − b² d)
        let den = &self.a * &self.a - &self.b * &self.b * &self.d;
        assert!(!den.is_zero(), "reciprocal of zero");
        QuadNumber::new(&self.c * &self.a, -(&self.c * &self.b), den, self.d.clone())
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(self.d, other.d, "mixing quadratic fields");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_field(o);
        QuadNumber::new(
            &self.a * &o.c + &o.a * &self.c,
            &self.b * &o.c + &o.b * &self.c,
            &self.c * &o.c,
            self.d.clone(),
        )
    }

    pub fn neg(&self) -> Self {
        QuadNumber::new(-&self.a, -&self.b, self.c.clone(), self.d.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_field(o);
        QuadNumber::new(
            &self.a * &o.a + &self.b * &o.b * &self.d,
            &self.a * &o.b + &self.b * &o.a,
            &self.c * &o.c,
            self.d.clone(),
        )
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn add_int(&self, k: &BigInt) -> Self {
        QuadNumber::new(&self.a + k * &self.c, self.b.clone(), self.c.clone(), self.d.clone())
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        QuadNumber::new(&self.a * k, &self.b * k, self.c.clone(), self.d.clone())
    }

    /// Nearest binary64, without cancellation when `a` and `b√d` nearly cancel.
    pub fn to_f64(&self) -> f64 {
        let c = big_to_f64(&self.c);
        let root = big_to_f64(&self.d).sqrt();
        if self.b.is_zero() {
            return ratio_to_f64(&self.a, &self.c);
        }
        if self.a.is_zero() || self.a.sign() == self.b.sign() {
            return (big_to_f64(&self.a) + big_to_f64(&self.b) * root) / c;
        }
        // a + b√d = (a² − b²d) / (a − b√d), denominator free of cancellation
        let num = &self.a * &self.a - &self.b * &self.b * &self.d;
        let den = big_to_f64(&self.a) - big_to_f64(&self.b) * root;
        big_to_f64(&num) / den / c
    }

    /// Writes `√d` with a square-free radicand for display.
    pub fn display_reduced(&self) -> String {
        let (k, core) = square_free_split(&self.d);
        let b = &self.b * k;
        format_surd(&self.a, &b, &self.c, &core)
    }
}

impl fmt::Display for QuadNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_reduced())
    }
}

fn format_surd(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> String {
    let sign = if b.is_negative() { '-' } else { '+' };
    let inner = format!("({}{}{}*sqrt({}))", a, sign, b.abs(), d);
    if c.is_one() {
        inner
    } else {
        format!("{}/{}", inner, c)
    }
}

pub(crate) fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    num_rational::BigRational::new(n.clone(), d.clone())
        .to_f64()
        .unwrap_or(f64::NAN)
}

/// Continued-fraction normal form `(P + √D)/Q`, `Q ≠ 0`, `Q | D − P²`.
///
/// `core` is the square-free part of `D`, kept so the value can be turned back
/// into a [`QuadNumber`] over the original field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    core: BigInt,
    scale: BigInt,
}

impl QuadraticSurd {
    /// Normal form of an irrational field element.
    pub fn from_number(x: &QuadNumber) -> Self {
        assert!(!x.b.is_zero(), "rational value has no surd normal form");
        let (p0, q0) = if x.b.is_positive() {
            (x.a.clone(), x.c.clone())
        } else {
            (-&x.a, -&x.c)
        };
        let bb = x.b.abs();
        let d0 = &bb * &bb * &x.d;
        let (p, q, d, scale) = if ((&d0 - &p0 * &p0) % &q0).is_zero() {
            (p0, q0, d0, bb)
        } else {
            let qa = q0.abs();
            (&p0 * &qa, &q0 * &qa, &d0 * &qa * &qa, bb * &qa)
        };
        QuadraticSurd {
            p,
            q,
            d,
            core: x.d.clone(),
            scale,
        }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    /// Same value as a field element `(P + k√core)/Q` with `k² core = D`.
    pub fn to_number(&self) -> QuadNumber {
        QuadNumber::new(
            self.p.clone(),
            self.scale.clone(),
            self.q.clone(),
            self.core.clone(),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.to_number().to_f64()
    }

    pub fn floor(&self) -> BigInt {
        let r = self.d.sqrt();
        if self.q.is_positive() {
            (&self.p + r).div_floor(&self.q)
        } else {
            (-&self.p - r - 1u32).div_floor(&(-&self.q))
        }
    }

    /// One expansion step: returns `(a, 1/(θ − a))`.
    pub fn step(&self) -> (BigInt, QuadraticSurd) {
        let a = self.floor();
        let p1 = &a * &self.q - &self.p;
        let q1 = (&self.d - &p1 * &p1) / &self.q;
        (
            a,
            QuadraticSurd {
                p: p1,
                q: q1,
                d: self.d.clone(),
                core: self.core.clone(),
                scale: self.scale.clone(),
            },
        )
    }

    /// `⌊nθ⌋` exactly.
    pub fn floor_mul(&self, n: &BigInt) -> BigInt {
        let r = (n * n * &self.d).sqrt();
        let np = n * &self.p;
        if n.is_negative() {
            // nθ = (nP − |n|√D)/Q
            let t = -&r - 1u32;
            return if self.q.is_positive() {
                (np + t).div_floor(&self.q)
            } else {
                (-np + r).div_floor(&(-&self.q))
            };
        }
        if n.is_zero() {
            return BigInt::zero();
        }
        if self.q.is_positive() {
            (np + r).div_floor(&self.q)
        } else {
            (-np - r - 1u32).div_floor(&(-&self.q))
        }
    }

    /// Sign of `mθ − k`.
    pub fn cmp_mul_int(&self, m: &BigInt, k: &BigInt) -> Ordering {
        // mθ − k = (mP − kQ + m√D)/Q
        let u = m * &self.p - k * &self.q;
        let s = sign_of(&u, m, &self.d);
        if self.q.is_negative() {
            s.reverse()
        } else {
            s
        }
    }

    /// `{nθ}` in binary64, accurate to a few ulps of the fractional part.
    pub fn frac_mul_f64(&self, n: &BigInt) -> f64 {
        let x = self.to_number().mul_int(n);
        let fl = x.floor();
        x.add_int(&-fl).to_f64()
    }

    pub fn fast(&self) -> Option<FastSurd> {
        Some(FastSurd {
            p: self.p.to_i128()?,
            q: self.q.to_i128()?,
            d: self.d.to_u128()?,
        })
        .filter(|f| f.p.unsigned_abs() < 1 << 60 && f.q.unsigned_abs() < 1 << 60 && f.d < 1 << 60)
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+sqrt({}))/{}", self.p, self.d, self.q)
    }
}

/// Machine-integer copy of a small [`QuadraticSurd`] for hot loops over `n`.
/// Every method returns `None` on overflow so callers fall back to `BigInt`.
#[derive(Clone, Copy, Debug)]
pub struct FastSurd {
    p: i128,
    q: i128,
    d: u128,
}

impl FastSurd {
    fn root_of_n2d(&self, n: u64) -> Option<u128> {
        let n = n as u128;
        let v = n.checked_mul(n)?.checked_mul(self.d)?;
        if v >= 1 << 124 {
            return None;
        }
        Some(num_integer::sqrt(v))
    }

    /// `(M, f, Q')` with `nθ = (M + f)/Q'`, `Q' > 0`, `0 < f < 1`.
    fn split(&self, n: u64) -> Option<(i128, f64, i128)> {
        let r = self.root_of_n2d(n)?;
        let n2d = (n as u128) * (n as u128) * self.d;
        let rem = (n2d - r * r) as f64;
        // √(n²D) − r without cancellation
        let f = rem / ((n2d as f64).sqrt() + r as f64);
        let np = (n as i128).checked_mul(self.p)?;
        let r = r as i128;
        if self.q > 0 {
            Some((np.checked_add(r)?, f, self.q))
        } else {
            Some(((-np).checked_sub(r)?.checked_sub(1)?, 1.0 - f, -self.q))
        }
    }

    pub fn floor_mul(&self, n: u64) -> Option<i128> {
        let (m, _, q) = self.split(n)?;
        Some(m.div_euclid(q))
    }

    pub fn frac_mul_f64(&self, n: u64) -> Option<f64> {
        let (m, f, q) = self.split(n)?;
        let rem = m.rem_euclid(q);
        Some((rem as f64 + f) / q as f64)
    }

    /// Sign of `mθ − k`.
    pub fn cmp_mul_int(&self, m: i128, k: i128) -> Option<Ordering> {
        let u = m.checked_mul(self.p)?.checked_sub(k.checked_mul(self.q)?)?;
        let s = if m == 0 {
            u.cmp(&0)
        } else if u == 0 || (u > 0) == (m > 0) {
            m.cmp(&0)
        } else {
            let uu = u.checked_mul(u)? as u128;
            let mmd = (m.checked_mul(m)? as u128).checked_mul(self.d)?;
            if uu > mmd {
                u.cmp(&0)
            } else {
                m.cmp(&0)
            }
        };
        Some(if self.q < 0 { s.reverse() } else { s })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn phi() -> QuadNumber {
        QuadNumber::new(big(1), big(1), big(2), big(5))
    }

    #[test]
    fn phi_satisfies_its_minimal_polynomial() {
        let p = phi();
        let lhs = p.mul(&p);
        let rhs = p.add_int(&big(1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn recip_and_floor() {
        let p = phi();
        let inv = p.recip();
        assert_eq!(inv, p.add_int(&big(-1)));
        assert_eq!(p.floor(), big(1));
        assert_eq!(inv.floor(), big(0));
        assert_eq!(p.neg().floor(), big(-2));
    }

    #[test]
    fn to_f64_survives_cancellation() {
        // F_31 φ − F_32 = φ^{-31}; reference value from 40-digit arithmetic
        let x = phi().mul_int(&big(1346269)).add_int(&big(-2178309));
        let exact = 3.321_873_975_409_129e-7;
        assert!((x.to_f64() / exact - 1.0).abs() < 1e-14);
    }

    #[test]
    fn surd_floor_and_fast_path_agree() {
        let s = QuadraticSurd::from_number(&phi());
        let fast = s.fast().unwrap();
        for n in 1..2000u64 {
            let slow = s.floor_mul(&BigInt::from(n));
            assert_eq!(BigInt::from(fast.floor_mul(n).unwrap()), slow);
            let fr = fast.frac_mul_f64(n).unwrap();
            assert!((fr - s.frac_mul_f64(&BigInt::from(n))).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_q_normal_form() {
        // (3 − √13)/(−2) = (√13 − 3)/2 ≈ 0.3028
        let x = QuadNumber::new(big(-3), big(1), big(2), big(13));
        let s = QuadraticSurd::from_number(&x.neg().neg());
        assert_eq!(s.floor(), big(0));
        let y = QuadNumber::new(big(3), big(-1), big(-2), big(13));
        let t = QuadraticSurd::from_number(&y);
        assert_eq!(t.floor(), big(0));
        assert_eq!(t.floor_mul(&big(10)), big(3));
        let f = t.fast().unwrap();
        assert_eq!(f.floor_mul(10), Some(3));
        assert_eq!(f.cmp_mul_int(10, 3), Some(Ordering::Greater));
        assert_eq!(t.cmp_mul_int(&big(10), &big(4)), Ordering::Less);
    }

    #[test]
    fn square_free_split_extracts_squares() {
        let (k, core) = square_free_split(&big(72));
        assert_eq!((k, core), (big(6), big(2)));
    }
}
