use cexcheck::scalar::{Dominance, Growth, Scalar};
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn leaf() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        Just(Scalar::x()),
        (-6i64..=6).prop_map(|k| Scalar::constant(k as f64 / 2.0)),
        (-8i64..=8).prop_map(|n| Scalar::gaussian_exp(r(n, 4))),
    ]
}

fn scalar() -> impl Strategy<Value = Scalar> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            inner.clone().prop_map(|a| a.abs()),
            (inner.clone(), 0i64..=3).prop_filter_map("power", |(a, k)| a.pow(r(k, 1)).ok()),
            (-4i64..=4).prop_map(|n| Scalar::gaussian_exp(r(n, 4)).sqrt().unwrap()),
        ]
    })
}

/// Gaussian-exponential family `c·e^{a x²}` used by every scenario multiplier.
fn gauss_exp() -> impl Strategy<Value = Scalar> {
    ((1i64..=4), (-8i64..=8)).prop_map(|(c, n)| Scalar::constant(c as f64) * Scalar::gaussian_exp(r(n, 4)))
}

fn probe_points() -> Vec<f64> {
    (0..=10).flat_map(|k| [2f64.powi(k), -(2f64.powi(k))]).collect()
}

/// Rounding scale of `phi` at `x`: the value with every cancellation
/// replaced by addition of magnitudes.
fn magnitude(phi: &Scalar, x: f64) -> f64 {
    match phi {
        Scalar::Var => x.abs(),
        Scalar::Const(c) => c.abs(),
        Scalar::Add(a, b) | Scalar::Sub(a, b) => magnitude(a, x) + magnitude(b, x),
        Scalar::Mul(a, b) => magnitude(a, x) * magnitude(b, x),
        Scalar::Div(a, b) => magnitude(a, x) / b.eval(x).map_or(f64::NAN, f64::abs),
        Scalar::Pow(a, p) => magnitude(a, x).powf(*p.numer() as f64 / *p.denom() as f64),
        Scalar::Exp(a) => a.eval(x).map_or(f64::NAN, f64::exp),
        Scalar::Sqrt(a) => magnitude(a, x).sqrt(),
        Scalar::Abs(a) | Scalar::Neg(a) => magnitude(a, x),
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    if a == b {
        return true;
    }
    if a.is_infinite() || b.is_infinite() {
        return false;
    }
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(scale).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplify_preserves_values(phi in scalar(), seed in 0u64..1000) {
        let s = phi.simplify();
        // 64 pseudo-random points in [-2.5, 2.5]
        let mut st = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        for _ in 0..64 {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((st >> 11) as f64 / (1u64 << 53) as f64) * 5.0 - 2.5;
            match (phi.eval(x), s.eval(x)) {
                (Ok(a), Ok(b)) => prop_assert!(close(a, b, magnitude(&phi, x).max(magnitude(&s, x))), "{phi} -> {s} at {x}: {a} vs {b}"),
                (Err(_), _) => {}
                (Ok(a), Err(e)) => prop_assert!(false, "{phi} = {a} at {x} but {s} fails: {e}"),
            }
        }
    }

    #[test]
    fn bounded_class_bounds_samples(phi in scalar()) {
        if let Growth::Bounded(m) = phi.growth_class() {
            for x in probe_points() {
                // intermediate overflow falls back to the canonical form
                let Ok(mut v) = phi.eval(x) else { continue };
                if !v.is_finite() {
                    v = phi.simplify().eval(x).unwrap_or(f64::NAN);
                }
                if !v.is_nan() {
                    prop_assert!(v.abs() <= m + 1e-9, "{phi} at {x}: {v} > {m}");
                }
            }
        }
    }

    #[test]
    fn growing_samples_are_never_bounded(phi in scalar()) {
        let vals: Vec<Option<f64>> = (0..=10).map(|k| phi.eval(2f64.powi(k)).ok().map(f64::abs)).collect();
        let grows = vals.windows(4).any(|w| {
            w.iter().all(Option::is_some)
                && w.windows(2).all(|p| p[1].unwrap() >= 2.0 * p[0].unwrap() && p[0].unwrap() > 0.0)
        });
        if grows {
            prop_assert!(!matches!(phi.growth_class(), Growth::Bounded(_)), "{phi}");
        }
    }

    #[test]
    fn dominance_is_reflexive(phi in gauss_exp()) {
        prop_assert_eq!(phi.dominates(&phi), Dominance::Yes);
    }

    #[test]
    fn dominance_is_transitive(a in gauss_exp(), b in gauss_exp(), c in gauss_exp()) {
        if a.dominates(&b) == Dominance::Yes && b.dominates(&c) == Dominance::Yes {
            prop_assert_eq!(a.dominates(&c), Dominance::Yes);
        }
    }
}

#[test]
fn corpus_multipliers_dominance() {
    let phi = Scalar::gaussian_exp(r(1, 1));
    let corpus = [
        Scalar::gaussian_exp(r(1, 4)),
        Scalar::gaussian_exp(r(1, 2)),
        phi.clone(),
        Scalar::gaussian_exp(r(2, 1)),
        phi.clone().pow(r(2, 1)).unwrap() - phi.clone().sqrt().unwrap(),
        phi.clone().sqrt().unwrap(),
    ];
    for a in &corpus {
        assert_eq!(a.dominates(a), Dominance::Yes, "{a}");
        for b in &corpus {
            for c in &corpus {
                if a.dominates(b) == Dominance::Yes && b.dominates(c) == Dominance::Yes {
                    assert_eq!(a.dominates(c), Dominance::Yes, "{a} {b} {c}");
                }
            }
        }
    }
}

#[test]
fn dominance_witness_is_checked_at_sample_points() {
    let big = Scalar::gaussian_exp(r(1, 1));
    let small = Scalar::gaussian_exp(r(1, 4));
    assert_eq!(small.dominates(&big), Dominance::Yes);
    let Dominance::No { witness } = big.dominates(&small) else {
        panic!("expected a witness");
    };
    let q: Vec<f64> = witness
        .iter()
        .map(|&x| big.eval(x).unwrap() / (1.0 + small.eval(x).unwrap()))
        .collect();
    assert!(q.windows(2).all(|w| w[1] > w[0]), "{q:?}");
    // sqrt(phi) is dominated by phi^2 for phi = e^{x^2}
    let sq = big.clone().sqrt().unwrap();
    let p2 = big.clone().pow(r(2, 1)).unwrap();
    assert_eq!(sq.dominates(&p2), Dominance::Yes);
    for k in 0..5 {
        let x = 2f64.powi(k) / 2.0;
        assert!(sq.eval(x).unwrap() <= p2.eval(x).unwrap() + 1.0);
    }
}
