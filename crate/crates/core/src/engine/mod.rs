//! Complex-analytic evaluators: Hurwitz zeta, Dirichlet series over
//! materialized coefficient tables, Abel-summation continuation, the
//! binomial shift expansion and a residue probe.

mod dirichlet;
mod hurwitz;
mod residue;
mod shift;

use std::fmt;

pub use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub(crate) use dirichlet::{abel_lenient, direct_sum_lenient};
pub(crate) use shift::binomial_shift_lenient;
pub use dirichlet::{abel_continuation, abel_full_table, direct_sum, direct_sum_from, DEFAULT_MARGIN};
pub use hurwitz::{hurwitz_zeta, riemann_zeta, BERNOULLI_ORDER};
pub use residue::{residue_probe, RESIDUE_STEPS};
pub use shift::{
    binom_neg_s, binomial_shift_series, shift_backward_eval, shift_forward_eval,
    shift_truncation_bound, ShiftSign, MAX_SHIFT_TERMS,
};

pub(crate) const EPS: f64 = f64::EPSILON;

/// `s = σ + it`.
pub fn point(sigma: f64, t: f64) -> Complex64 {
    Complex64::new(sigma, t)
}

/// `n^{-s}` for real `n > 0`.
#[inline]
pub fn pow_neg(n: f64, s: Complex64) -> Complex64 {
    (-s * n.ln()).exp()
}

/// `e^z − 1` without cancellation for small `|z|`.
pub(crate) fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let ex = x.exp();
    let half = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, ex * y.sin())
}

pub(crate) fn check_finite(s: Complex64) -> crate::Result<()> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::OutOfDomain(format!("non-finite point {}", s)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Abel,
    Shift,
    ClosedForm,
    HurwitzEm,
    Composite,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Direct => "direct",
            Method::Abel => "abel",
            Method::Shift => "shift",
            Method::ClosedForm => "closed_form",
            Method::HurwitzEm => "hurwitz_em",
            Method::Composite => "composite",
        };
        f.write_str(name)
    }
}

/// A value with its truncation/model error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub err: f64,
    pub method: Method,
    pub warnings: Vec<String>,
}

impl EvalResult {
    pub fn new(value: Complex64, err: f64, method: Method) -> Self {
        EvalResult {
            value,
            err,
            method,
            warnings: Vec::new(),
        }
    }

    pub fn with_warning(mut self, w: impl Into<String>) -> Self {
        self.push_warning(w);
        self
    }

    pub fn push_warning(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn absorb_warnings(&mut self, other: &EvalResult) {
        for w in &other.warnings {
            self.push_warning(w.clone());
        }
    }

    /// `a·self + b·other` with errors added.
    pub fn combine(&self, a: Complex64, other: &EvalResult, b: Complex64, method: Method) -> Self {
        let mut out = EvalResult::new(
            a * self.value + b * other.value,
            a.norm() * self.err + b.norm() * other.err,
            method,
        );
        out.absorb_warnings(self);
        out.absorb_warnings(other);
        out
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        self.value *= c;
        self.err *= c.norm();
        self
    }

    pub fn add_const(mut self, c: Complex64, c_err: f64) -> Self {
        self.value += c;
        self.err += c_err;
        self
    }

    pub fn tagged(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

impl Serialize for EvalResult {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct C {
            re: f64,
            im: f64,
        }
        let mut st = ser.serialize_struct("EvalResult", 4)?;
        st.serialize_field(
            "value",
            &C {
                re: self.value.re,
                im: self.value.im,
            },
        )?;
        st.serialize_field("err", &self.err)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("warnings", &self.warnings)?;
        st.end()
    }
}

/// Evaluator callback used where an algorithm needs a continuation of some
/// Dirichlet series at shifted arguments: `(s, tol) ↦ f(s)`.
pub type Evaluator<'a> = dyn Fn(Complex64, f64) -> crate::Result<EvalResult> + Sync + 'a;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_small_and_large() {
        let z = Complex64::new(1e-12, -3e-13);
        let got = expm1(z);
        assert!((got - z).norm() < 1e-24);
        let z = Complex64::new(0.7, 2.1);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_result_json_shape() {
        let r = EvalResult::new(Complex64::new(1.5, -2.0), 1e-9, Method::HurwitzEm)
            .with_warning("w");
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["value"]["re"], 1.5);
        assert_eq!(v["value"]["im"], -2.0);
        assert_eq!(v["method"], "hurwitz_em");
        assert_eq!(v["warnings"][0], "w");
    }
}
