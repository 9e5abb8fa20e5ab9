use biharm::bvp::{
    integrate_ode, integrate_ode_rk4, shoot_dirichlet, solve_conformal, BoundaryCondition, PoleSeed, ShootingOptions,
    DEFAULT_EPS,
};
use biharm::catalog::{catalog_solution, CaseId, CaseParams};
use biharm::functionals::{conformality_defect, Orientation};
use biharm::map::Jet4;
use biharm::ode::Tolerances;
use biharm::profile::{MapSpec, WarpingProfile};
use proptest::prelude::*;

/// Sup-norm deviation of an integration started from the closed-form jet at
/// `eps`, against the closed form.
fn round_trip_error(id: CaseId, c: f64, r_end: f64, rtol: f64) -> f64 {
    let e = catalog_solution(id, CaseParams::new(c, 1.0)).unwrap();
    let map = e.map.unwrap();
    let jet = map.jet(DEFAULT_EPS);
    let traj = integrate_ode(&e.spec, &jet, r_end, &Tolerances::with_rtol(rtol)).unwrap();
    traj.r
        .iter()
        .zip(&traj.states)
        .map(|(r, s)| (s[0] - map.eval(*r, 0)).abs())
        .fold(0.0, f64::max)
}

/// Roundoff floor of an integration started at `DEFAULT_EPS`: errors below it
/// no longer track the tolerance.
const START_FLOOR: f64 = 5e-9;

#[test]
fn round_trip_error_shrinks_with_tolerance() {
    for (id, r_end) in [
        (CaseId::C1A, 5.0),
        (CaseId::C1B, 5.0),
        (CaseId::C1C, 0.5),
        (CaseId::C2B, 2.5),
        (CaseId::C3C, 3.0),
    ] {
        let errors: Vec<f64> = [1e-6, 1e-8, 1e-10]
            .iter()
            .map(|&t| round_trip_error(id, 1.0, r_end, t))
            .collect();
        assert!(errors[2] < START_FLOOR, "{id}: {errors:?}");
        assert!(
            errors.windows(2).all(|w| w[1] < w[0] || w[1] < START_FLOOR),
            "{id}: errors do not decrease {errors:?}"
        );
    }
}

/// Exact `(a1, a3)` of the three regular conformal families.
fn exact_seed(id: CaseId, c: f64) -> (f64, f64) {
    let k = c * c;
    match id {
        CaseId::C1A => (c, 0.0),
        CaseId::C1B => (2.0 * k, -2.0 * k.powi(3) / 3.0),
        CaseId::C1C => (2.0 * k, 2.0 * k.powi(3) / 3.0),
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shooting_converges_from_nearby_seeds(
        which in 0usize..3,
        c in 0.6f64..1.6,
        p1 in -0.05f64..0.05,
        p3 in -0.05f64..0.05,
    ) {
        let id = [CaseId::C1A, CaseId::C1B, CaseId::C1C][which];
        let e = catalog_solution(id, CaseParams::new(c, 1.0)).unwrap();
        let map = e.map.as_ref().unwrap();
        let b = if id == CaseId::C1C { 0.5 / (c * c) } else { 1.0 };
        let (a1, a3) = exact_seed(id, c);
        // a3 = 0 for the linear map; perturb on the scale of a1^3 there.
        let a3_scale = if a3 == 0.0 { a1.powi(3) } else { a3.abs() };
        let guess = PoleSeed::new(a1 * (1.0 + p1), a3 + p3 * a3_scale, DEFAULT_EPS).unwrap();
        let bc = BoundaryCondition::Clamped { alpha_b: map.eval(b, 0), dalpha_b: map.eval(b, 1) };
        let res = shoot_dirichlet(&e.spec, b, bc, guess, &ShootingOptions::default()).unwrap();
        prop_assert!(res.iterations <= 15, "{} iterations", res.iterations);
        prop_assert!((res.seed.a1 - a1).abs() <= 1e-6 * a1, "a1 {} vs {}", res.seed.a1, a1);
    }
}

#[test]
fn conformal_solutions_satisfy_the_conformal_relation() {
    let cases = [
        (WarpingProfile::euclidean(), WarpingProfile::sphere(1.0).unwrap(), 1.5),
        (
            WarpingProfile::hyperbolic(0.7).unwrap(),
            WarpingProfile::sphere(1.2).unwrap(),
            0.8,
        ),
        (
            WarpingProfile::sphere(1.0).unwrap(),
            WarpingProfile::hyperbolic(1.0).unwrap(),
            0.5,
        ),
    ];
    for (f, h, slope) in cases {
        let spec = MapSpec::new(4, f, h).unwrap();
        let sol = solve_conformal(&spec, slope, 1.0, 101, &Tolerances::default()).unwrap();
        assert!(!sol.truncated);
        for &r in &sol.nodes {
            let d = conformality_defect(&spec, &sol.map.jet(r), Orientation::Direct).unwrap();
            assert!(
                d.abs() < 1e-9,
                "{} -> {} at {r}: {d:e}",
                spec.f().label(),
                spec.h().label()
            );
        }
    }
}

#[test]
fn rk4_is_fourth_order_over_a_decade() {
    let e = catalog_solution(CaseId::C1B, CaseParams::new(1.0, 1.0)).unwrap();
    let map = e.map.unwrap();
    let jet = Jet4::new(0.5, map.derivs(0.5)).unwrap();
    let err = |n: usize| {
        let traj = integrate_ode_rk4(&e.spec, &jet, 1.5, n).unwrap();
        let (r, s) = traj.end();
        (s[0] - map.eval(r, 0)).abs()
    };
    let (coarse, fine) = (err(10), err(100));
    let order = (coarse / fine).log10();
    assert!((order - 4.0).abs() < 0.2, "order {order}");
}
