use biharm::catalog::{CaseId, CaseParams};
use biharm::map::RadialMap;
use biharm::stability::{
    catalog_beta, closed_form_zeroth, duality_error, rayleigh_bottom, second_variation_form, StabilityCase,
    VariationField,
};
use proptest::prelude::*;

fn hyperbolic() -> (StabilityCase, RadialMap) {
    catalog_beta(CaseId::C1C, CaseParams::new(1.0, 1.0)).unwrap()
}

fn sphere() -> (StabilityCase, RadialMap) {
    catalog_beta(CaseId::C1B, CaseParams::new(1.0, 1.0)).unwrap()
}

/// `exp(-1 / (1 - x^2))` on `|x| < 1`, zero elsewhere.
fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Sum of two smooth bumps supported inside `[lo + span/20, hi - span/20]`.
fn two_bumps(lo: f64, hi: f64, nodes: usize, p: [f64; 6]) -> VariationField {
    let span = hi - lo;
    let (c1, c2) = (lo + span * p[0], lo + span * p[1]);
    let (w1, w2) = (span * p[2], span * p[3]);
    VariationField::from_fn(lo, hi, nodes, |t| {
        p[4] * bump((t - c1) / w1) + p[5] * bump((t - c2) / w2)
    })
    .unwrap()
}

fn bump_params() -> impl Strategy<Value = [f64; 6]> {
    (
        0.3f64..0.7,
        0.3f64..0.7,
        0.1f64..0.25,
        0.1f64..0.25,
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
        .prop_map(|(a, b, c, d, e, f)| [a, b, c, d, e, f])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn form_is_quadratic(p in bump_params(), s in -5.0f64..5.0) {
        let (case, beta) = hyperbolic();
        let v = two_bumps(-8.0, -0.1, 801, p);
        let base = second_variation_form(&case, &beta, &v).unwrap();
        let scaled = second_variation_form(&case, &beta, &v.scaled(s)).unwrap();
        prop_assert!((scaled - s * s * base).abs() <= 1e-12 * (s * s * base).abs().max(1e-300));
    }

    #[test]
    fn forms_are_positive_on_conformal_solutions(p in bump_params(), sphere_case in any::<bool>()) {
        let ((case, beta), hi) = if sphere_case { (sphere(), 0.0) } else { (hyperbolic(), -0.1) };
        let v = two_bumps(-8.0, hi, 801, p);
        prop_assume!(!v.is_zero());
        prop_assert!(second_variation_form(&case, &beta, &v).unwrap() > 0.0);
    }

    #[test]
    fn duality_holds_for_interior_bumps(p in bump_params()) {
        let (case, beta) = hyperbolic();
        let v = two_bumps(-8.0, -0.1, 2001, p);
        prop_assume!(!v.is_zero());
        let e = duality_error(&case, &beta, &v).unwrap();
        prop_assert!(e < 1e-4, "{e:e}");
    }
}

#[test]
fn zeroth_order_terms_are_nonnegative() {
    let n = 100_000;
    for i in 0..=n {
        let x = 12.0 * i as f64 / n as f64 - 6.0;
        let z = closed_form_zeroth(&StabilityCase::Hyperbolic { d: 1.0 }, x).unwrap();
        assert!(z >= 0.0, "hyperbolic at {x}: {z:e}");
    }
    for i in 1..=n {
        let y = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
        let z = closed_form_zeroth(&StabilityCase::Sphere { d: 1.0 }, y).unwrap();
        assert!(z >= 0.0, "sphere at {y}: {z:e}");
    }
}

/// Nodes for `[lo, hi]` at spacing `step`, so nested intervals share grid
/// lines.
fn nodes_for(lo: f64, hi: f64, step: f64) -> usize {
    ((hi - lo) / step).round() as usize + 1
}

#[test]
fn bottom_decreases_on_nested_intervals() {
    let step = 0.02;
    let cases = [
        (hyperbolic(), -0.1),
        (sphere(), 0.0),
        ((StabilityCase::Flat, hyperbolic().1), -0.1),
    ];
    for ((case, beta), hi) in cases {
        let mut last = f64::INFINITY;
        for lo in [-3.0, -5.0, -7.0] {
            let est = rayleigh_bottom(&case, &beta, (lo, hi), nodes_for(lo, hi, step)).unwrap();
            assert!(est.converged && !est.indefinite);
            assert!(
                est.value <= last * (1.0 + 1e-9),
                "{case} on [{lo}, {hi}]: {} after {last}",
                est.value
            );
            last = est.value;
        }
    }
}
