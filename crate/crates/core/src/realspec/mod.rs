//! Exact and certified representations of the real parameter α.
//!
//! Three representations are supported: reduced rationals, quadratic
//! irrationals `(a + b√d)/c`, and decimal strings carrying a precision budget.
//! Decimal inputs are held as a rational interval; every floor, ceiling or
//! fractional-part comparison is decided on both interval endpoints and fails
//! with [`Error::PrecisionExhausted`] when the endpoints disagree.

mod cf;
mod quad;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use regex::Regex;

use crate::error::{Error, Result};

pub use cf::{
    cf_expand, complete_quotient, convergents, eta, type_estimate, CompleteQuotient,
    ContinuedFractionExpansion, Eta, Period, TypeEstimate,
};
pub use quad::{FastSurd, QuadNumber, QuadraticSurd};
#[cfg(test)]
pub(crate) use cf::eta_over_window;
pub(crate) use quad::ratio_to_f64;

/// Smallest accepted decimal precision budget, in significant digits.
pub const MIN_DECIMAL_PRECISION: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecKind {
    Rational,
    Quadratic,
    Decimal,
}

/// A decimal input: the truncated value `mid` and a certified enclosure
/// `[lo, hi]` one unit of the last kept digit either side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecimalInterval {
    pub mid: BigRational,
    pub lo: BigRational,
    pub hi: BigRational,
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Rational(BigRational),
    Quadratic {
        value: QuadNumber,
        surd: QuadraticSurd,
    },
    Decimal(DecimalInterval),
}

/// The parameter α. Always positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealSpec {
    repr: Repr,
    label: Option<String>,
}

fn precision_exhausted(what: &str, n: impl fmt::Display) -> Error {
    Error::PrecisionExhausted(format!("{} undecided at n = {}", what, n))
}

fn floor_ratio(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

fn ceil_ratio(x: &BigRational) -> BigInt {
    -floor_ratio(&-x)
}

impl RealSpec {
    pub fn rational(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let (p, q) = (p.into(), q.into());
        if q.is_zero() {
            return Err(Error::InvalidSpec("zero denominator".into()));
        }
        let r = BigRational::new(p, q);
        if !r.is_positive() {
            return Err(Error::InvalidSpec(format!("alpha must be positive, got {}", r)));
        }
        Ok(RealSpec {
            repr: Repr::Rational(r),
            label: None,
        })
    }

    /// `(a + b√d)/c`; square factors of `d` are moved into `b`, and a perfect
    /// square radicand collapses to a rational.
    pub fn quadratic(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        d: impl Into<BigInt>,
        c: impl Into<BigInt>,
    ) -> Result<Self> {
        let (a, b, d, c) = (a.into(), b.into(), d.into(), c.into());
        if c.is_zero() {
            return Err(Error::InvalidSpec("zero denominator".into()));
        }
        if !d.is_positive() {
            return Err(Error::InvalidSpec("radicand must be positive".into()));
        }
        let (k, core) = quad::square_free_split(&d);
        let b = b * k;
        if core.is_one() || b.is_zero() {
            return RealSpec::rational(a + b * core, c);
        }
        let value = QuadNumber::new(a, b, c, core);
        RealSpec::from_quad(value)
    }

    pub(crate) fn from_quad(value: QuadNumber) -> Result<Self> {
        if value.is_rational() {
            return RealSpec::rational(value.a().clone(), value.c().clone());
        }
        if !value.is_positive() {
            return Err(Error::InvalidSpec(format!("alpha must be positive, got {}", value)));
        }
        let surd = QuadraticSurd::from_number(&value);
        Ok(RealSpec {
            repr: Repr::Quadratic { value, surd },
            label: None,
        })
    }

    pub fn phi() -> Self {
        let mut s = RealSpec::quadratic(1, 1, 5, 2).expect("phi");
        s.label = Some("phi".into());
        s
    }

    pub fn sqrt(d: u64) -> Result<Self> {
        let mut s = RealSpec::quadratic(0, 1, d, 1)?;
        if s.kind() == SpecKind::Quadratic {
            s.label = Some(format!("sqrt:{}", d));
        }
        Ok(s)
    }

    /// Parses `<digits>[e<exp>]` and keeps at most `precision` significant
    /// digits.
    pub fn decimal(text: &str, precision: u32) -> Result<Self> {
        if precision < MIN_DECIMAL_PRECISION {
            return Err(Error::InvalidSpec(format!(
                "decimal precision budget must be at least {} digits",
                MIN_DECIMAL_PRECISION
            )));
        }
        let (mantissa, exp) = match text.split_once(['e', 'E']) {
            Some((m, e)) => (
                m,
                e.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad exponent in {:?}", text)))?,
            ),
            None => (text, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty()
            || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
        {
            return Err(Error::Parse(format!("bad decimal digits {:?}", text)));
        }
        let mut digits: String = format!("{}{}", int_part, frac_part);
        let mut scale = frac_part.len() as i64 - exp;
        let lead = digits.len() - digits.trim_start_matches('0').len();
        let significant = digits.len() - lead;
        if significant == 0 {
            return Err(Error::InvalidSpec("alpha must be positive".into()));
        }
        if significant > precision as usize {
            let drop = significant - precision as usize;
            digits.truncate(digits.len() - drop);
            scale -= drop as i64;
        }
        let n: BigInt = digits.parse().map_err(|_| Error::Parse(text.into()))?;
        let ten = BigInt::from(10u32);
        let pow = |e: i64| -> BigRational {
            let p = num_traits::pow(ten.clone(), e.unsigned_abs() as usize);
            if e >= 0 {
                BigRational::from_integer(p)
            } else {
                BigRational::new(BigInt::one(), p)
            }
        };
        let ulp = pow(-scale);
        let mid = BigRational::from_integer(n) * &ulp;
        let lo = &mid - &ulp;
        if !lo.is_positive() {
            return Err(Error::PrecisionExhausted(
                "decimal enclosure reaches zero".into(),
            ));
        }
        let hi = &mid + &ulp;
        Ok(RealSpec {
            repr: Repr::Decimal(DecimalInterval {
                mid,
                lo,
                hi,
                precision,
            }),
            label: Some(format!("decimal:{}@{}", text, precision)),
        })
    }

    pub fn kind(&self) -> SpecKind {
        match self.repr {
            Repr::Rational(_) => SpecKind::Rational,
            Repr::Quadratic { .. } => SpecKind::Quadratic,
            Repr::Decimal(_) => SpecKind::Decimal,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.kind() == SpecKind::Rational
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_quadratic(&self) -> Option<&QuadNumber> {
        match &self.repr {
            Repr::Quadratic { value, .. } => Some(value),
            _ => None,
        }
    }

    pub(crate) fn surd(&self) -> Option<&QuadraticSurd> {
        match &self.repr {
            Repr::Quadratic { surd, .. } => Some(surd),
            _ => None,
        }
    }

    pub fn as_decimal(&self) -> Option<&DecimalInterval> {
        match &self.repr {
            Repr::Decimal(d) => Some(d),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.repr {
            Repr::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Repr::Quadratic { value, .. } => value.to_f64(),
            Repr::Decimal(d) => d.mid.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn unlabeled(repr: Repr) -> Self {
        RealSpec { repr, label: None }
    }

    /// `1/α`, exact for rational and quadratic inputs.
    pub fn reciprocal(&self) -> RealSpec {
        match &self.repr {
            Repr::Rational(r) => RealSpec::unlabeled(Repr::Rational(r.recip())),
            Repr::Quadratic { value, .. } => RealSpec::from_quad(value.recip()).expect("positive"),
            Repr::Decimal(d) => RealSpec::unlabeled(Repr::Decimal(DecimalInterval {
                mid: d.mid.recip(),
                lo: d.hi.recip(),
                hi: d.lo.recip(),
                precision: d.precision,
            })),
        }
    }

    /// `α + k` for an integer `k`; the result must stay positive.
    pub fn add_int(&self, k: i64) -> Result<RealSpec> {
        let kb = BigInt::from(k);
        let kr = BigRational::from_integer(kb.clone());
        let out = match &self.repr {
            Repr::Rational(r) => RealSpec::unlabeled(Repr::Rational(r + kr)),
            Repr::Quadratic { value, .. } => return RealSpec::from_quad(value.add_int(&kb)),
            Repr::Decimal(d) => RealSpec::unlabeled(Repr::Decimal(DecimalInterval {
                mid: &d.mid + &kr,
                lo: &d.lo + &kr,
                hi: &d.hi + &kr,
                precision: d.precision,
            })),
        };
        match &out.repr {
            Repr::Rational(r) if !r.is_positive() => {
                Err(Error::InvalidSpec("result is not positive".into()))
            }
            Repr::Decimal(d) if !d.lo.is_positive() => Err(Error::PrecisionExhausted(
                "decimal enclosure reaches zero".into(),
            )),
            _ => Ok(out),
        }
    }

    /// `α′` with `1/α + 1/α′ = 1`; requires `α > 1`.
    pub fn rayleigh_conjugate(&self) -> Result<RealSpec> {
        if self.floor()? < BigInt::one() || self.is_exactly_one() {
            return Err(Error::InvalidSpec("Rayleigh conjugate requires alpha > 1".into()));
        }
        // α′ = 1 / (1 − 1/α)
        let beta = self.reciprocal();
        let one_minus = match &beta.repr {
            Repr::Rational(r) => RealSpec::unlabeled(Repr::Rational(BigRational::one() - r)),
            Repr::Quadratic { value, .. } => {
                let one = QuadNumber::from_integer(BigInt::one(), value.d().clone());
                RealSpec::from_quad(one.sub(value))?
            }
            Repr::Decimal(d) => {
                let one = BigRational::one();
                RealSpec::unlabeled(Repr::Decimal(DecimalInterval {
                    mid: &one - &d.mid,
                    lo: &one - &d.hi,
                    hi: &one - &d.lo,
                    precision: d.precision,
                }))
            }
        };
        Ok(one_minus.reciprocal())
    }

    fn is_exactly_one(&self) -> bool {
        matches!(&self.repr, Repr::Rational(r) if r.is_one())
    }

    /// Splits `α = ⌊α⌋ + {α}`, returning `{α}` as a spec when it is nonzero.
    pub fn split_integer_part(&self) -> Result<(BigInt, Option<RealSpec>)> {
        let fl = self.floor()?;
        let k = fl.to_i64().ok_or_else(|| Error::InvalidSpec("alpha too large".into()))?;
        if let Repr::Rational(r) = &self.repr {
            if r.is_integer() {
                return Ok((fl, None));
            }
        }
        Ok((fl, Some(self.add_int(-k)?)))
    }

    pub fn floor(&self) -> Result<BigInt> {
        self.floor_mul(1)
    }

    /// `⌊αn⌋` exactly.
    pub fn floor_mul(&self, n: i64) -> Result<BigInt> {
        match &self.repr {
            Repr::Rational(r) => Ok((r.numer() * n).div_floor(r.denom())),
            Repr::Quadratic { surd, .. } => {
                if n > 0 {
                    if let Some(v) = surd.fast().and_then(|f| f.floor_mul(n as u64)) {
                        return Ok(BigInt::from(v));
                    }
                }
                Ok(surd.floor_mul(&BigInt::from(n)))
            }
            Repr::Decimal(d) => {
                let nb = BigRational::from_integer(BigInt::from(n));
                let a = floor_ratio(&(&d.lo * &nb));
                let b = floor_ratio(&(&d.hi * &nb));
                if a == b {
                    Ok(a)
                } else {
                    Err(precision_exhausted("floor(alpha n)", n))
                }
            }
        }
    }

    /// `⌈αn⌉` exactly.
    pub fn ceil_mul(&self, n: i64) -> Result<BigInt> {
        match &self.repr {
            Repr::Rational(r) => Ok(-(-(r.numer() * n)).div_floor(r.denom())),
            Repr::Quadratic { .. } => {
                if n == 0 {
                    Ok(BigInt::zero())
                } else {
                    Ok(self.floor_mul(n)? + 1)
                }
            }
            Repr::Decimal(d) => {
                let nb = BigRational::from_integer(BigInt::from(n));
                let a = ceil_ratio(&(&d.lo * &nb));
                let b = ceil_ratio(&(&d.hi * &nb));
                if a == b {
                    Ok(a)
                } else {
                    Err(precision_exhausted("ceil(alpha n)", n))
                }
            }
        }
    }

    /// `{αn}` as a binary64, together with whether `αn` is an integer.
    pub fn frac_mul(&self, n: i64) -> Result<(f64, bool)> {
        match &self.repr {
            Repr::Rational(r) => {
                let x = r * BigRational::from_integer(BigInt::from(n));
                let f = x.fract();
                let f = if f.is_negative() { f + BigRational::one() } else { f };
                Ok((f.to_f64().unwrap_or(f64::NAN), f.is_zero()))
            }
            Repr::Quadratic { surd, .. } => {
                if n == 0 {
                    return Ok((0.0, true));
                }
                if n > 0 {
                    if let Some(v) = surd.fast().and_then(|f| f.frac_mul_f64(n as u64)) {
                        return Ok((v, false));
                    }
                }
                Ok((surd.frac_mul_f64(&BigInt::from(n)), false))
            }
            Repr::Decimal(d) => {
                let fl = self.floor_mul(n)?;
                let nb = BigRational::from_integer(BigInt::from(n));
                let lo = &d.lo * &nb;
                // both endpoints share the floor; integrality needs the
                // enclosure to avoid the integer exactly
                if lo == BigRational::from_integer(fl.clone()) && n != 0 {
                    return Err(precision_exhausted("integrality of alpha n", n));
                }
                let f = &d.mid * &nb - BigRational::from_integer(fl);
                Ok((f.to_f64().unwrap_or(f64::NAN), n == 0))
            }
        }
    }

    /// Decides `{αn} < {αq}` for `n ≠ q`. Needs irrational α.
    pub fn frac_less(&self, n: i64, q: i64) -> Result<bool> {
        let k = self.floor_mul(n)? - self.floor_mul(q)?;
        let m = n - q;
        // {αn} − {αq} = αm − k
        match &self.repr {
            Repr::Rational(_) => Err(Error::RationalAlpha),
            Repr::Quadratic { surd, .. } => {
                if let (Some(f), Some(ki)) = (surd.fast(), k.to_i128()) {
                    if let Some(o) = f.cmp_mul_int(m as i128, ki) {
                        return Ok(o == Ordering::Less);
                    }
                }
                Ok(surd.cmp_mul_int(&BigInt::from(m), &k) == Ordering::Less)
            }
            Repr::Decimal(d) => {
                let mb = BigRational::from_integer(BigInt::from(m));
                let kr = BigRational::from_integer(k);
                let a = &d.lo * &mb < kr;
                let b = &d.hi * &mb < kr;
                if a == b {
                    Ok(a)
                } else {
                    Err(precision_exhausted("fractional-part comparison", n))
                }
            }
        }
    }
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            return f.write_str(l);
        }
        match &self.repr {
            Repr::Rational(r) => write!(f, "rational:{}/{}", r.numer(), r.denom()),
            Repr::Quadratic { value, .. } => write!(f, "quadratic:{}", value.display_reduced()),
            Repr::Decimal(d) => write!(
                f,
                "decimal:{}@{}",
                d.mid.to_f64().unwrap_or(f64::NAN),
                d.precision
            ),
        }
    }
}

fn quadratic_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\((-?\d+)\s*([+-])\s*(\d+)\*sqrt\((\d+)\)\)(?:/(-?\d+))?$").unwrap()
    })
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("bad integer {:?}", s)))
}

impl FromStr for RealSpec {
    type Err = Error;

    /// `rational:<p>/<q>` | `quadratic:(<a>+<b>*sqrt(<d>))/<c>` |
    /// `decimal:<digits>[e<exp>]@<precision>` | `phi` | `sqrt:<d>`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "phi" {
            return Ok(RealSpec::phi());
        }
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("unrecognised alpha spec {:?}", s)))?;
        match kind {
            "rational" => {
                let (p, q) = body.split_once('/').unwrap_or((body, "1"));
                RealSpec::rational(parse_int(p)?, parse_int(q)?)
            }
            "sqrt" => {
                let d: u64 = body
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad radicand {:?}", body)))?;
                RealSpec::sqrt(d)
            }
            "quadratic" => {
                let caps = quadratic_re()
                    .captures(body.trim())
                    .ok_or_else(|| Error::Parse(format!("bad quadratic form {:?}", body)))?;
                let a = parse_int(&caps[1])?;
                let mut b = parse_int(&caps[3])?;
                if &caps[2] == "-" {
                    b = -b;
                }
                let d = parse_int(&caps[4])?;
                let c = caps.get(5).map_or(Ok(BigInt::one()), |m| parse_int(m.as_str()))?;
                RealSpec::quadratic(a, b, d, c)
            }
            "decimal" => {
                let (digits, prec) = body
                    .split_once('@')
                    .ok_or_else(|| Error::Parse("decimal spec needs @<precision>".into()))?;
                let prec: u32 = prec
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad precision {:?}", prec)))?;
                RealSpec::decimal(digits, prec)
            }
            _ => Err(Error::Parse(format!("unknown alpha kind {:?}", kind))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_grammar() {
        assert_eq!("phi".parse::<RealSpec>().unwrap(), RealSpec::phi());
        let r: RealSpec = "rational:710/226".parse().unwrap();
        assert_eq!(r.to_string(), "rational:355/113");
        let q: RealSpec = "quadratic:(3+1*sqrt(13))/2".parse().unwrap();
        assert!((q.to_f64() - 3.302_775_637_731_995).abs() < 1e-14);
        let s: RealSpec = "sqrt:8".parse().unwrap();
        assert!((s.to_f64() - 8f64.sqrt()).abs() < 1e-14);
        assert_eq!(s.as_quadratic().unwrap().d(), &BigInt::from(2));
        let four: RealSpec = "sqrt:4".parse().unwrap();
        assert!(four.is_rational());
        let d: RealSpec = "decimal:1.4142135623730950488@20".parse().unwrap();
        assert_eq!(d.kind(), SpecKind::Decimal);
        let e: RealSpec = "decimal:14142135623730950488e-19@20".parse().unwrap();
        assert_eq!(d.as_decimal().unwrap().mid, e.as_decimal().unwrap().mid);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("bogus".parse::<RealSpec>(), Err(Error::Parse(_))));
        assert!(matches!("rational:-1/2".parse::<RealSpec>(), Err(Error::InvalidSpec(_))));
        assert!(matches!(
            "decimal:1.5@8".parse::<RealSpec>(),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            "quadratic:(1-1*sqrt(5))/2".parse::<RealSpec>(),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn reciprocal_and_conjugate_of_phi() {
        let phi = RealSpec::phi();
        let beta = phi.reciprocal();
        assert_eq!(beta, phi.add_int(-1).unwrap());
        let conj = phi.rayleigh_conjugate().unwrap();
        assert_eq!(conj, phi.add_int(1).unwrap()); // φ² = φ + 1
        assert!(RealSpec::rational(1, 2).unwrap().rayleigh_conjugate().is_err());
    }

    #[test]
    fn decimal_floor_is_certified_or_fails() {
        let d = RealSpec::decimal("1.6180339887498948482", 20).unwrap();
        assert_eq!(d.floor_mul(1000).unwrap(), BigInt::from(1618));
        // the enclosure is ~2e-19 wide, so n ~ 1e19 cannot be decided
        let big = 10_i64.pow(18) * 9;
        let mut failed = false;
        for n in big..big + 200 {
            if d.floor_mul(n).is_err() {
                failed = true;
                break;
            }
        }
        assert!(failed);
    }

    #[test]
    fn frac_less_rejects_rational() {
        let r = RealSpec::rational(3, 2).unwrap();
        assert_eq!(r.frac_less(2, 1), Err(Error::RationalAlpha));
    }
}
