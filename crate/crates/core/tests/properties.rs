use std::collections::BTreeSet;

use beatty_zeta::beatty::{rational_closed_form, ClosedFormKind};
use beatty_zeta::engine::{hurwitz_zeta, pow_neg, Complex64};
use beatty_zeta::realspec::{cf_expand, convergents};
use beatty_zeta::sequences::{
    beatty_count_closed, beatty_term, sawtooth_exact, sturmian_coefficient, sturmian_sum_closed, summatory,
    SummatoryKind, SummatoryValue,
};
use beatty_zeta::RealSpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

/// `(a + √d)/c` with `d` not a square and the value above 1.
fn quadratic() -> impl Strategy<Value = RealSpec> {
    (0i64..6, 2i64..60, 1i64..4)
        .prop_filter("square radicand", |(_, d, _)| {
            let r = (*d as f64).sqrt().round() as i64;
            r * r != *d
        })
        .prop_filter_map("alpha <= 1", |(a, d, c)| {
            let alpha = RealSpec::quadratic(a, 1, d, c).ok()?;
            (alpha.to_f64() > 1.0).then_some(alpha)
        })
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

fn beatty_set(alpha: &RealSpec, top: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for m in 1.. {
        let t = beatty_term(alpha, m).unwrap().to_u64().unwrap();
        if t > top {
            break;
        }
        out.push(t);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn rayleigh_partition(alpha in quadratic()) {
        let beta = alpha.rayleigh_conjugate().unwrap();
        let top = 600;
        let a = beatty_set(&alpha, top);
        let b = beatty_set(&beta, top);
        let union: BTreeSet<u64> = a.iter().chain(&b).copied().collect();
        prop_assert_eq!(union.len(), a.len() + b.len());
        prop_assert_eq!(union, (1..=top).collect::<BTreeSet<u64>>());
    }

    #[test]
    fn sturmian_coefficients_mark_shifted_beatty_terms(alpha in quadratic()) {
        // c_n = 1 iff n − 1 ∈ {0} ∪ B(α)
        let beta = alpha.reciprocal();
        let mut members: BTreeSet<u64> = beatty_set(&alpha, 400).into_iter().collect();
        members.insert(0);
        for n in 1..=400u64 {
            let c = sturmian_coefficient(&beta, n).unwrap();
            prop_assert_eq!(c == BigInt::one(), members.contains(&(n - 1)));
            prop_assert!(c.is_zero() || c.is_one());
        }
    }

    #[test]
    fn summatory_closed_forms(alpha in quadratic(), x in 1.0f64..1500.0) {
        let count = summatory(SummatoryKind::BeattyCount, &alpha, x).unwrap();
        prop_assert_eq!(count, SummatoryValue::Integer(beatty_count_closed(&alpha, x).unwrap()));
        let beta = alpha.reciprocal();
        let sum = summatory(SummatoryKind::SturmianSum, &beta, x).unwrap();
        prop_assert_eq!(sum, SummatoryValue::Integer(sturmian_sum_closed(&beta, x).unwrap()));
    }

    #[test]
    fn sawtooth_is_odd_and_periodic(p in -500i64..500, q in 1i64..40, k in -5i64..5) {
        let x = ratio(p, q);
        let r = sawtooth_exact(&x);
        prop_assert_eq!(sawtooth_exact(&-x.clone()), -r.clone());
        prop_assert_eq!(sawtooth_exact(&(x.clone() + BigRational::from_integer(k.into()))), r.clone());
        prop_assert!(r.abs() < ratio(1, 2) || r.is_zero());
    }

    #[test]
    fn sawtooth_interval_identity(p in -500i64..500, q in 1i64..40, ap in 1i64..40, aq in 2i64..41) {
        prop_assume!(ap < aq);
        let (x, a) = (ratio(p, q), ratio(ap, aq));
        let fx = frac(&x);
        prop_assume!(!fx.is_zero() && fx != a);
        let lhs = sawtooth_exact(&(x.clone() - a.clone())) - sawtooth_exact(&x) + a.clone();
        let chi = if fx < a { BigRational::one() } else { BigRational::zero() };
        prop_assert_eq!(lhs, chi);
    }

    #[test]
    fn convergent_determinants(alpha in quadratic()) {
        let cf = cf_expand(&alpha, 25).unwrap();
        let conv = convergents(&cf, 25).unwrap();
        let x = alpha.to_f64();
        for w in conv.windows(2) {
            let ((p0, q0), (p1, q1)) = (&w[0], &w[1]);
            prop_assert_eq!((p1 * q0 - p0 * q1).abs(), BigInt::one());
            let (p, q) = (p1.to_f64().unwrap(), q1.to_f64().unwrap());
            if q < 1e6 {
                prop_assert!((x - p / q).abs() <= 1.0 / (q * q));
            }
        }
    }

    #[test]
    fn hurwitz_recurrence(sigma in -2.0f64..4.0, t in -10.0f64..10.0, gamma in 0.05f64..2.0) {
        let s = Complex64::new(sigma, t);
        prop_assume!((s - 1.0).norm() > 0.1);
        let a = hurwitz_zeta(s, gamma, 1e-9).unwrap();
        let b = hurwitz_zeta(s, gamma + 1.0, 1e-9).unwrap();
        let diff = a.value - b.value - pow_neg(gamma, s);
        prop_assert!(diff.norm() <= 1e-8 * (1.0 + a.value.norm()), "diff {}", diff.norm());
    }

    #[test]
    fn rational_closed_form_matches_direct(q in 1u64..12, extra in 0u64..30, sigma in 2.5f64..4.0) {
        let p = q + extra;
        prop_assume!(num_integer::gcd(p, q) == 1);
        let s = Complex64::new(sigma, 0.0);
        let closed = rational_closed_form(ClosedFormKind::ZetaBeatty, p, q, s, 1e-10).unwrap();
        let alpha = p as f64 / q as f64;
        let n_max = 40_000u64;
        let mut direct = Complex64::new(0.0, 0.0);
        for n in (1..=n_max).rev() {
            direct += pow_neg((n * p / q) as f64, s);
        }
        // Σ_{n>N} (nα)^{-σ} to first order
        direct += alpha.powf(-sigma) * (n_max as f64 + 0.5).powf(1.0 - sigma) / (sigma - 1.0);
        prop_assert!((closed.value - direct).norm() < 1e-6, "{} vs {}", closed.value, direct);
    }

    #[test]
    fn display_round_trips(alpha in quadratic()) {
        let text = alpha.to_string();
        let back: RealSpec = text.parse().unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back.to_f64(), alpha.to_f64());
    }
}
