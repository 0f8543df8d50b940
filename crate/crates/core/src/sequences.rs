//! Beatty terms, Sturmian coefficients, Hecke-set indicators, the sawtooth
//! function and their summatory functions, all decided exactly.
//!
//! [`CoefficientStream`] names a coefficient sequence lazily;
//! [`StreamTable`] is its materialized prefix in binary64 with running
//! summatory and discrepancy sums, which is what the numerical engine reads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::realspec::{RealSpec, SpecKind};

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::InvalidSpec("integer overflow in sequence term".into()))
}

/// `⌊αn⌋`.
pub fn beatty_term(alpha: &RealSpec, n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidSpec("Beatty terms are indexed from n = 1".into()));
    }
    alpha.floor_mul(n as i64)
}

/// `⌈βn⌉ − ⌈β(n−1)⌉`.
pub fn sturmian_coefficient(beta: &RealSpec, n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidSpec("Sturmian coefficients are indexed from n = 1".into()));
    }
    Ok(beta.ceil_mul(n as i64)? - beta.ceil_mul(n as i64 - 1)?)
}

/// `R(x) = {x} − 1/2` off the integers, `0` on them.
pub fn sawtooth(x: f64) -> f64 {
    let f = x - x.floor();
    if f == 0.0 {
        0.0
    } else {
        f - 0.5
    }
}

pub fn sawtooth_exact(x: &BigRational) -> BigRational {
    if x.is_integer() {
        return BigRational::zero();
    }
    let f = x - BigRational::from_integer(x.numer().div_floor(x.denom()));
    f - BigRational::new(BigInt::one(), BigInt::from(2))
}

/// `R(αn)`, exact integrality decision, binary64 value.
pub fn sawtooth_at(alpha: &RealSpec, n: i64) -> Result<f64> {
    let (f, is_int) = alpha.frac_mul(n)?;
    Ok(if is_int { 0.0 } else { f - 0.5 })
}

/// `1` iff `{αn} < {αq}`. For negative `q` the threshold is `1 − {α|q|}`.
pub fn hecke_indicator(alpha: &RealSpec, q: i64, n: u64) -> Result<bool> {
    if alpha.is_rational() {
        return Err(Error::RationalAlpha);
    }
    if q == 0 {
        return Err(Error::InvalidSpec("Hecke parameter q must be nonzero".into()));
    }
    if n == 0 {
        return Err(Error::InvalidSpec("Hecke indicators are indexed from n = 1".into()));
    }
    if n as i64 == q {
        return Ok(false);
    }
    alpha.frac_less(n as i64, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SummatoryKind {
    /// `#{n ∈ B(α) : n ≤ x}`
    BeattyCount,
    /// `Σ_{n≤x}` Sturmian coefficients of `β`
    SturmianSum,
    /// `Σ_{n≤x} R(αn)`
    SawtoothSum,
    /// `#{n ≤ x : n ∈ A_{αq}}`
    HeckeCount { q: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SummatoryValue {
    Integer(BigInt),
    Real(f64),
}

impl SummatoryValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            SummatoryValue::Integer(k) => k.to_f64().unwrap_or(f64::NAN),
            SummatoryValue::Real(x) => *x,
        }
    }
}

/// Summatory functions evaluated by direct enumeration.
pub fn summatory(kind: SummatoryKind, spec: &RealSpec, x: f64) -> Result<SummatoryValue> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::OutOfDomain("summatory functions need x >= 1".into()));
    }
    let n_top = x.floor() as u64;
    match kind {
        SummatoryKind::BeattyCount => {
            let mut count = 0u64;
            let mut m = 1u64;
            loop {
                let t = beatty_term(spec, m)?;
                if t > BigInt::from(n_top) {
                    break;
                }
                if t >= BigInt::one() {
                    count += 1;
                }
                m += 1;
            }
            Ok(SummatoryValue::Integer(count.into()))
        }
        SummatoryKind::SturmianSum => {
            let mut acc = BigInt::zero();
            for n in 1..=n_top {
                acc += sturmian_coefficient(spec, n)?;
            }
            Ok(SummatoryValue::Integer(acc))
        }
        SummatoryKind::SawtoothSum => {
            let mut acc = 0.0;
            for n in 1..=n_top {
                acc += sawtooth_at(spec, n as i64)?;
            }
            Ok(SummatoryValue::Real(acc))
        }
        SummatoryKind::HeckeCount { q } => {
            let mut count = 0u64;
            for n in 1..=n_top {
                if hecke_indicator(spec, q, n)? {
                    count += 1;
                }
            }
            Ok(SummatoryValue::Integer(count.into()))
        }
    }
}

/// `⌊(⌊x⌋ + 1)β⌋`, the closed form of the Beatty counting function for
/// irrational `α > 1`.
pub fn beatty_count_closed(alpha: &RealSpec, x: f64) -> Result<BigInt> {
    alpha.reciprocal().floor_mul(x.floor() as i64 + 1)
}

/// `⌈β⌊x⌋⌉`, the telescoped Sturmian sum.
pub fn sturmian_sum_closed(beta: &RealSpec, x: f64) -> Result<BigInt> {
    beta.ceil_mul(x.floor() as i64)
}

/// Growth shape of `|A(N) − δN|` assumed for tail estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorModel {
    /// `O(log N)`: bounded-type parameters (rational, quadratic).
    Logarithmic,
    /// `O(N^e)`, generic fallback.
    Power(f64),
}

impl ErrorModel {
    pub fn exponent(&self) -> f64 {
        match self {
            ErrorModel::Logarithmic => 0.0,
            ErrorModel::Power(e) => *e,
        }
    }

    /// Shape function `w(n)` with `|F(n)| ≲ c·w(n)`.
    pub fn shape(&self, n: f64) -> f64 {
        match self {
            ErrorModel::Logarithmic => 1.0 + n.ln(),
            ErrorModel::Power(e) => n.powf(*e),
        }
    }

    fn for_spec(alpha: &RealSpec) -> Self {
        match alpha.kind() {
            SpecKind::Rational | SpecKind::Quadratic => ErrorModel::Logarithmic,
            SpecKind::Decimal => ErrorModel::Power(0.5),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StreamKind {
    /// `a_n = ⌈β(n+1)⌉ − ⌈βn⌉ = #{m : ⌊αm⌋ = n}`, the coefficients of `ζ_α`.
    BeattyIndicator(RealSpec),
    /// `a_n = ⌈βn⌉ − ⌈β(n−1)⌉`, `β = 1/α`, the coefficients of `S_α`.
    Sturmian(RealSpec),
    /// `a_n = R(αn)`, the coefficients of `J_α`.
    Sawtooth(RealSpec),
    /// `a_n = χ_{A_{αq}}(n)`.
    Hecke(RealSpec, i64),
}

/// A lazily indexed Dirichlet coefficient sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoefficientStream {
    kind: StreamKind,
    beta: Option<RealSpec>,
}

impl CoefficientStream {
    pub fn new(kind: StreamKind) -> Result<Self> {
        if let StreamKind::Hecke(alpha, q) = &kind {
            if alpha.is_rational() {
                return Err(Error::RationalAlpha);
            }
            if *q == 0 {
                return Err(Error::InvalidSpec("Hecke parameter q must be nonzero".into()));
            }
        }
        let beta = match &kind {
            StreamKind::BeattyIndicator(a) | StreamKind::Sturmian(a) => Some(a.reciprocal()),
            _ => None,
        };
        Ok(CoefficientStream { kind, beta })
    }

    pub fn beatty(alpha: &RealSpec) -> Self {
        Self::new(StreamKind::BeattyIndicator(alpha.clone())).expect("infallible")
    }

    pub fn sturmian(alpha: &RealSpec) -> Self {
        Self::new(StreamKind::Sturmian(alpha.clone())).expect("infallible")
    }

    pub fn sawtooth(alpha: &RealSpec) -> Self {
        Self::new(StreamKind::Sawtooth(alpha.clone())).expect("infallible")
    }

    pub fn hecke(alpha: &RealSpec, q: i64) -> Result<Self> {
        Self::new(StreamKind::Hecke(alpha.clone(), q))
    }

    pub fn kind(&self) -> &StreamKind {
        &self.kind
    }

    fn alpha(&self) -> &RealSpec {
        match &self.kind {
            StreamKind::BeattyIndicator(a)
            | StreamKind::Sturmian(a)
            | StreamKind::Sawtooth(a)
            | StreamKind::Hecke(a, _) => a,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            StreamKind::BeattyIndicator(a) => format!("beatty[{}]", a),
            StreamKind::Sturmian(a) => format!("sturmian[{}]", a),
            StreamKind::Sawtooth(a) => format!("sawtooth[{}]", a),
            StreamKind::Hecke(a, q) => format!("hecke[{};q={}]", a, q),
        }
    }

    /// `a_n` for `n ≥ 1`.
    pub fn coefficient(&self, n: u64) -> Result<f64> {
        let n_i = n as i64;
        match &self.kind {
            StreamKind::BeattyIndicator(_) => {
                let b = self.beta.as_ref().expect("beta");
                Ok(to_i64(&(b.ceil_mul(n_i + 1)? - b.ceil_mul(n_i)?))? as f64)
            }
            StreamKind::Sturmian(_) => {
                let b = self.beta.as_ref().expect("beta");
                Ok(to_i64(&sturmian_coefficient(b, n)?)? as f64)
            }
            StreamKind::Sawtooth(a) => sawtooth_at(a, n_i),
            StreamKind::Hecke(a, q) => Ok(if hecke_indicator(a, *q, n)? { 1.0 } else { 0.0 }),
        }
    }

    /// Mean value `δ`.
    pub fn density(&self) -> f64 {
        match &self.kind {
            StreamKind::BeattyIndicator(_) | StreamKind::Sturmian(_) => {
                self.beta.as_ref().expect("beta").to_f64()
            }
            StreamKind::Sawtooth(_) => 0.0,
            StreamKind::Hecke(a, q) => a.frac_mul(*q).map(|(f, _)| f).unwrap_or(f64::NAN),
        }
    }

    /// Declared `‖ω‖∞`.
    pub fn bound(&self) -> f64 {
        match &self.kind {
            StreamKind::BeattyIndicator(_) | StreamKind::Sturmian(_) => {
                let b = self.beta.as_ref().expect("beta");
                b.ceil_mul(1).ok().and_then(|c| c.to_f64()).unwrap_or(f64::INFINITY)
            }
            StreamKind::Sawtooth(_) => 0.5,
            StreamKind::Hecke(..) => 1.0,
        }
    }

    pub fn error_model(&self) -> ErrorModel {
        ErrorModel::for_spec(self.alpha())
    }

    /// Exact `A(N)` for the integer-valued kinds via closed forms; the
    /// sawtooth kind sums directly.
    pub fn summatory(&self, n: u64) -> Result<SummatoryValue> {
        let n_i = n as i64;
        match &self.kind {
            StreamKind::BeattyIndicator(_) => {
                let b = self.beta.as_ref().expect("beta");
                // telescopes to ⌈β(N+1)⌉ − ⌈β⌉
                Ok(SummatoryValue::Integer(b.ceil_mul(n_i + 1)? - b.ceil_mul(1)?))
            }
            StreamKind::Sturmian(_) => {
                let b = self.beta.as_ref().expect("beta");
                Ok(SummatoryValue::Integer(b.ceil_mul(n_i)?))
            }
            StreamKind::Sawtooth(a) => summatory(SummatoryKind::SawtoothSum, a, n as f64),
            StreamKind::Hecke(a, q) => summatory(SummatoryKind::HeckeCount { q: *q }, a, n as f64),
        }
    }

    /// Materializes `a_1..a_n`.
    pub fn materialize(&self, n: usize) -> Result<StreamTable> {
        let coeffs: Vec<f64> = (1..n + 1)
            .into_par_iter()
            .with_min_len(4096)
            .map(|k| self.coefficient(k as u64))
            .collect::<Result<_>>()?;
        Ok(StreamTable::new(
            self.label(),
            coeffs,
            self.density(),
            self.bound(),
            self.error_model(),
        ))
    }
}

type Cache = Mutex<HashMap<(CoefficientStream, usize), Arc<StreamTable>>>;

/// Process-wide memo of materialized tables; values are immutable.
pub fn materialize_cached(stream: &CoefficientStream, n: usize) -> Result<Arc<StreamTable>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (stream.clone(), n);
    if let Some(t) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(stream.materialize(n)?);
    cache
        .lock()
        .expect("cache poisoned")
        .insert(key, table.clone());
    Ok(table)
}

/// Materialized prefix `a_1..a_N` with running sums.
///
/// `summatory(n) = A(n)`, `discrepancy(n) = E(n) = A(n) − δn` and
/// `discrepancy_sum(n) = Σ_{k≤n} E(k)`.
#[derive(Clone, Debug)]
pub struct StreamTable {
    label: String,
    coeffs: Vec<f64>,
    density: f64,
    bound: f64,
    model: ErrorModel,
    cum: Vec<f64>,
    cum_e: Vec<f64>,
}

impl StreamTable {
    /// `coeffs[k]` is `a_{k+1}`.
    pub fn new(
        label: impl Into<String>,
        coeffs: Vec<f64>,
        density: f64,
        bound: f64,
        model: ErrorModel,
    ) -> Self {
        let n = coeffs.len();
        let mut cum = Vec::with_capacity(n + 1);
        let mut cum_e = Vec::with_capacity(n + 1);
        cum.push(0.0);
        cum_e.push(0.0);
        let (mut a, mut se, mut comp) = (0.0f64, 0.0f64, 0.0f64);
        for (i, c) in coeffs.iter().enumerate() {
            a += c;
            cum.push(a);
            let e = a - density * (i + 1) as f64;
            // compensated: the running sum reaches ~N while terms stay O(1)
            let y = e - comp;
            let t = se + y;
            comp = (t - se) - y;
            se = t;
            cum_e.push(se);
        }
        StreamTable {
            label: label.into(),
            coeffs,
            density,
            bound,
            model,
            cum,
            cum_e,
        }
    }

    pub fn from_fn(
        label: impl Into<String>,
        n: usize,
        density: f64,
        bound: f64,
        model: ErrorModel,
        f: impl Fn(u64) -> f64,
    ) -> Self {
        let coeffs = (1..=n as u64).map(f).collect();
        Self::new(label, coeffs, density, bound, model)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `a_n`, `1 ≤ n ≤ len`.
    #[inline]
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs[n - 1]
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn error_model(&self) -> ErrorModel {
        self.model
    }

    pub fn summatory(&self, n: usize) -> f64 {
        self.cum[n]
    }

    #[inline]
    pub fn discrepancy(&self, n: usize) -> f64 {
        self.cum[n] - self.density * n as f64
    }

    pub fn discrepancy_sum(&self, n: usize) -> f64 {
        self.cum_e[n]
    }

    /// `(a_{n+q})_n`, truncated to what the table holds.
    pub fn shifted_backward(&self, q: usize) -> StreamTable {
        let coeffs = self.coeffs.iter().skip(q).copied().collect();
        StreamTable::new(
            format!("B^{}{}", q, self.label),
            coeffs,
            self.density,
            self.bound,
            self.model,
        )
    }

    /// `(0,…,0, a_1, a_2, …)` with `p` leading zeros, same length.
    pub fn shifted_forward(&self, p: usize) -> StreamTable {
        let n = self.len();
        let coeffs = std::iter::repeat(0.0)
            .take(p.min(n))
            .chain(self.coeffs.iter().copied())
            .take(n)
            .collect();
        StreamTable::new(
            format!("F^{}{}", p, self.label),
            coeffs,
            self.density,
            self.bound,
            self.model,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Independent floor: ⌊nφ⌋ = ⌊(n + √(5n²))/2⌋ with an exact u128 isqrt.
    fn floor_phi(n: u64) -> u64 {
        let v = 5u128 * (n as u128) * (n as u128);
        let mut r = (v as f64).sqrt() as u128;
        while r * r > v {
            r -= 1;
        }
        while (r + 1) * (r + 1) <= v {
            r += 1;
        }
        ((n as u128 + r) / 2) as u64
    }

    #[test]
    fn beatty_terms_of_phi() {
        let phi = RealSpec::phi();
        let got: Vec<BigInt> = (1..=8).map(|n| beatty_term(&phi, n).unwrap()).collect();
        assert_eq!(got, ints(&[1, 3, 4, 6, 8, 9, 11, 12]));
        for n in 1..5000 {
            assert_eq!(beatty_term(&phi, n).unwrap(), BigInt::from(floor_phi(n)));
        }
        let two = RealSpec::rational(2, 1).unwrap();
        assert_eq!(beatty_term(&two, 5).unwrap(), BigInt::from(10));
        let phi2 = phi.rayleigh_conjugate().unwrap();
        let got: Vec<BigInt> = (1..=4).map(|n| beatty_term(&phi2, n).unwrap()).collect();
        assert_eq!(got, ints(&[2, 5, 7, 10]));
    }

    #[test]
    fn sturmian_examples() {
        let beta = RealSpec::phi().reciprocal();
        let got: Vec<BigInt> = (1..=8).map(|n| sturmian_coefficient(&beta, n).unwrap()).collect();
        assert_eq!(got, ints(&[1, 1, 0, 1, 1, 0, 1, 0]));
        let one = RealSpec::rational(1, 1).unwrap();
        assert!((1..50).all(|n| sturmian_coefficient(&one, n).unwrap() == BigInt::one()));
        let beta_plus = beta.add_int(1).unwrap();
        for n in 1..200 {
            assert_eq!(
                sturmian_coefficient(&beta_plus, n).unwrap(),
                sturmian_coefficient(&beta, n).unwrap() + 1
            );
        }
    }

    #[test]
    fn sawtooth_examples() {
        assert!((sawtooth(0.3) + 0.2).abs() < 1e-15);
        assert_eq!(sawtooth(7.0), 0.0);
        assert!((sawtooth(-0.318) - 0.182).abs() < 1e-15);
        let x = BigRational::new(BigInt::from(-318), BigInt::from(1000));
        assert_eq!(sawtooth_exact(&x), BigRational::new(BigInt::from(182), BigInt::from(1000)));
        assert_eq!(sawtooth_exact(&BigRational::from_integer(7.into())), BigRational::zero());
    }

    #[test]
    fn hecke_examples() {
        let phi = RealSpec::phi();
        let set: Vec<u64> = (1..=10).filter(|&n| hecke_indicator(&phi, 1, n).unwrap()).collect();
        assert_eq!(set, vec![2, 4, 5, 7, 9, 10]);
        assert!(!hecke_indicator(&phi, 1, 1).unwrap());
        assert!(hecke_indicator(&phi, -1, 5).unwrap());
        // brute-force threshold check against binary64 fractional parts
        let f = |x: f64| x - x.floor();
        let p = phi.to_f64();
        for n in 1..400u64 {
            let want = f(p * n as f64) < 1.0 - f(p);
            assert_eq!(hecke_indicator(&phi, -1, n).unwrap(), want, "n = {}", n);
        }
        assert_eq!(
            hecke_indicator(&RealSpec::rational(3, 2).unwrap(), 1, 2),
            Err(Error::RationalAlpha)
        );
    }

    #[test]
    fn summatory_examples() {
        let phi = RealSpec::phi();
        let c = summatory(SummatoryKind::BeattyCount, &phi, 10.0).unwrap();
        assert_eq!(c, SummatoryValue::Integer(6.into()));
        assert_eq!(beatty_count_closed(&phi, 10.0).unwrap(), BigInt::from(6));
        let beta = phi.reciprocal();
        let s = summatory(SummatoryKind::SturmianSum, &beta, 10.0).unwrap();
        assert_eq!(s, SummatoryValue::Integer(7.into()));
        assert_eq!(sturmian_sum_closed(&beta, 10.0).unwrap(), BigInt::from(7));
        let j = summatory(SummatoryKind::SawtoothSum, &phi, 3.0).unwrap().to_f64();
        let p = phi.to_f64();
        let want: f64 = (1..=3).map(|n| sawtooth(p * n as f64)).sum();
        assert!((j - want).abs() < 1e-12);
        assert!((j - 0.208).abs() < 1e-3);
    }

    #[test]
    fn stream_table_running_sums() {
        let phi = RealSpec::phi();
        let s = CoefficientStream::beatty(&phi);
        let t = s.materialize(2000).unwrap();
        for n in [1usize, 10, 999, 2000] {
            let exact = s.summatory(n as u64).unwrap().to_f64();
            assert_eq!(t.summatory(n), exact);
        }
        assert!((t.discrepancy(2000)).abs() < 2.0);
        let b = t.shifted_backward(3);
        assert_eq!(b.coeff(1), t.coeff(4));
        let f = t.shifted_forward(2);
        assert_eq!(f.coeff(1), 0.0);
        assert_eq!(f.coeff(3), t.coeff(1));
    }

    #[test]
    fn stream_metadata() {
        let phi = RealSpec::phi();
        let h = CoefficientStream::hecke(&phi, 1).unwrap();
        assert!((h.density() - 0.618_033_988_749_895).abs() < 1e-15);
        let hm = CoefficientStream::hecke(&phi, -1).unwrap();
        assert!((hm.density() - 0.381_966_011_250_105).abs() < 1e-15);
        assert_eq!(CoefficientStream::sawtooth(&phi).bound(), 0.5);
        assert_eq!(CoefficientStream::beatty(&phi).bound(), 1.0);
        let half = RealSpec::rational(1, 2).unwrap();
        assert_eq!(CoefficientStream::beatty(&half).bound(), 2.0);
        assert!(CoefficientStream::hecke(&RealSpec::rational(2, 1).unwrap(), 1).is_err());
    }
}
