//! Tension field, reduced bienergy and biharmonicity residuals of a
//! rotationally symmetric map `(theta, r) -> (theta, alpha(r))` between two
//! models `f` (domain) and `h` (target).

use crate::error::{Error, Result};
use crate::map::{GridFunction, Jet4, RadialMap, UniformGrid};
use crate::profile::MapSpec;
use crate::quadrature::{simpson, simpson_converged, QuadratureResult};
use crate::series::Taylor;

/// Which scaling of the fourth-order residual to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// The full expression, including the `f^(m-5)` prefactor.
    #[default]
    Verbatim,
    /// Divided by `f^(m-5)`; finite at the pole for `m < 5`.
    Normalized,
}

/// Sign choice in the conformality relation `alpha' = sign * h(alpha) / f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `alpha' = h / f`, the pole-regular family.
    Direct,
    /// `alpha' = -h / f`, the inversion-type family singular at the pole.
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Direct => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

/// Scaling of the conformal biharmonicity condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConformalForm {
    /// `(m-2) f^(m-5) h(alpha) * B`, the left-hand side as derived.
    #[default]
    Verbatim,
    /// `2 B`: the verbatim form times `2 f^(5-m) / ((m-2) h)`. At `m = 4` this
    /// is the scaling of the closed-form identities of the constant-curvature
    /// cases.
    Reduced,
}

/// `[f, f', f'', f''']` at an interior point where `f != 0`.
pub(crate) fn domain_derivs(spec: &MapSpec, r: f64) -> Result<[f64; 4]> {
    if !spec.f().domain().interior_contains(r) {
        return Err(Error::Domain { what: "r", at: r });
    }
    let d = spec.f().derivs(r);
    if d[0] == 0.0 || !d[0].is_finite() {
        return Err(Error::Domain { what: "r", at: r });
    }
    Ok(d)
}

fn require_identity_eigenmap(spec: &MapSpec) -> Result<()> {
    if spec.is_identity_eigenmap() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "the fourth-order residual is only available for lambda = m - 1".into(),
        ))
    }
}

/// Coefficient of `d/d alpha` in the tension field:
/// `alpha'' + (m-1) f'/f alpha' - lambda h(alpha) h'(alpha) / f^2`.
pub fn tension(spec: &MapSpec, jet: &Jet4) -> Result<f64> {
    let [f, fp, _, _] = domain_derivs(spec, jet.x)?;
    let [h, hp, _, _] = spec.h().derivs(jet.a[0]);
    let k = (spec.m() - 1) as f64;
    Ok(jet.a[2] + k * fp / f * jet.a[1] - spec.lambda() * h * hp / (f * f))
}

/// The Euler-Lagrange expression of the reduced bienergy, expanded.
pub fn biharmonic_residual(spec: &MapSpec, jet: &Jet4, norm: Normalization) -> Result<f64> {
    require_identity_eigenmap(spec)?;
    let [f, f1, f2, f3] = domain_derivs(spec, jet.x)?;
    let [h0, h1, h2, h3] = spec.h().derivs(jet.a[0]);
    let [_, a1, a2, a3, a4] = jet.a;
    let m = spec.m() as f64;
    let k = m - 1.0;

    let target_part = k
        * h0
        * (2.0 * f * f2 * h1 - 2.0 * (m - 3.0) * f * f1 * a1 * h2 + 2.0 * (m - 4.0) * f1 * f1 * h1
            - f * f * (h3 * a1 * a1 + 2.0 * a2 * h2)
            + k * h1 * h1 * h1);
    let domain_part = f
        * ((m - 3.0) * k * f * f1 * f1 * a2 - (m - 3.0) * k * f1 * f1 * f1 * a1
            + k * f * (f * (f3 * a1 + 2.0 * f2 * a2) - 2.0 * a2 * h1 * h1 - 3.0 * a1 * a1 * h1 * h2)
            + k * f1 * (a1 * ((m - 4.0) * f * f2 - 2.0 * (m - 3.0) * h1 * h1) + 2.0 * f * f * a3)
            + f * f * f * a4);
    let bracket = target_part + domain_part + k * k * h0 * h0 * h1 * h2;
    Ok(match norm {
        Normalization::Verbatim => f.powi(spec.m() as i32 - 5) * bracket,
        Normalization::Normalized => bracket,
    })
}

/// Local Taylor expansion (order 2) of the tension coefficient `F` about
/// `jet.x`. Uses `f` through `f'''` and `h` through `h'''`.
fn tension_taylor(spec: &MapSpec, jet: &Jet4) -> Result<(Taylor<3>, [f64; 4], [f64; 4])> {
    let fd = domain_derivs(spec, jet.x)?;
    let hd = spec.h().derivs(jet.a[0]);
    let [a0, a1, a2, a3, a4] = jet.a;
    let alpha = Taylor::<3> { c: [a0, a1, a2 / 2.0] };
    let dalpha = Taylor::<3> { c: [a1, a2, a3 / 2.0] };
    let ddalpha = Taylor::<3> { c: [a2, a3, a4 / 2.0] };
    let f = Taylor::<3>::from_derivatives(&fd[..3]);
    let fp = Taylor::<3>::from_derivatives(&fd[1..]);
    let h = alpha.compose(&Taylor::from_derivatives(&hd[..3]));
    let hp = alpha.compose(&Taylor::from_derivatives(&hd[1..]));
    let k = (spec.m() - 1) as f64;
    let inv_f = f.recip();
    let big_f = ddalpha + fp * inv_f * dalpha * k - h * hp * inv_f * inv_f * k;
    Ok((big_f, fd, hd))
}

/// First line of the factored system,
/// `F'' + (m-1)(f f' F' - h'^2 F)/f^2 - (m-1) h h'' F / f^2`,
/// with `F` and its derivatives taken exactly from the jet. The expanded
/// residual equals `f^(m-1)` times this value.
pub fn f_system_pointwise(spec: &MapSpec, jet: &Jet4) -> Result<f64> {
    require_identity_eigenmap(spec)?;
    let (big_f, fd, hd) = tension_taylor(spec, jet)?;
    let k = (spec.m() - 1) as f64;
    let [f, fp, _, _] = fd;
    let [h, hp, hpp, _] = hd;
    let (v, d1, d2) = (big_f.c[0], big_f.c[1], 2.0 * big_f.c[2]);
    Ok(d2 + k * (f * fp * d1 - hp * hp * v) / (f * f) - k * h * hpp * v / (f * f))
}

/// `alpha''''` forced by the biharmonicity equation given the lower jet
/// (`jet.a[4]` is ignored).
pub fn solve_fourth_derivative(spec: &MapSpec, r: f64, lower: [f64; 4]) -> Result<f64> {
    let jet = Jet4 {
        x: r,
        a: [lower[0], lower[1], lower[2], lower[3], 0.0],
    };
    // The factored residual is affine in alpha'''' with unit coefficient.
    Ok(-f_system_pointwise(spec, &jet)?)
}

/// `F` on a grid and the factored residual at interior nodes, with `F'` and
/// `F''` from second-order central differences.
pub fn residual_f_system(spec: &MapSpec, map: &RadialMap, grid: UniformGrid) -> Result<(GridFunction, GridFunction)> {
    require_identity_eigenmap(spec)?;
    if grid.nodes < 5 {
        return Err(Error::InvalidParameter(format!(
            "the factored residual needs at least 5 grid points, got {}",
            grid.nodes
        )));
    }
    let h = grid.step();
    let k = (spec.m() - 1) as f64;
    let mut big_f = Vec::with_capacity(grid.nodes);
    for x in grid.points() {
        big_f.push(tension(spec, &map.jet(x))?);
    }
    let mut res = Vec::with_capacity(grid.nodes - 2);
    for i in 1..grid.nodes - 1 {
        let x = grid.a + i as f64 * h;
        let [f, fp, _, _] = domain_derivs(spec, x)?;
        let alpha = map.eval(x, 0);
        let [hv, hp, hpp, _] = spec.h().derivs(alpha);
        let d1 = (big_f[i + 1] - big_f[i - 1]) / (2.0 * h);
        let d2 = (big_f[i + 1] - 2.0 * big_f[i] + big_f[i - 1]) / (h * h);
        let v = big_f[i];
        res.push(d2 + k * (f * fp * d1 - hp * hp * v) / (f * f) - k * hv * hpp * v / (f * f));
    }
    Ok((
        GridFunction::new(grid.a, h, big_f)?,
        GridFunction::new(grid.a + h, h, res)?,
    ))
}

/// `alpha' - sign * h(alpha) / f(r)`.
pub fn conformality_defect(spec: &MapSpec, jet: &Jet4, orientation: Orientation) -> Result<f64> {
    let [f, _, _, _] = domain_derivs(spec, jet.x)?;
    Ok(jet.a[1] - orientation.sign() * spec.h().eval(jet.a[0], 0) / f)
}

/// Biharmonicity condition after substituting `alpha' = h(alpha)/f`. Needs no
/// derivative data for `alpha`.
pub fn conformal_residual(spec: &MapSpec, alpha: f64, r: f64, form: ConformalForm) -> Result<f64> {
    let [f, f1, f2, f3] = domain_derivs(spec, r)?;
    if !spec.h().domain().contains(alpha) {
        return Err(Error::Domain {
            what: "alpha",
            at: alpha,
        });
    }
    let [h0, h1, h2, h3] = spec.h().derivs(alpha);
    let m = spec.m() as f64;
    let b = f * f * f3 + h1 * (4.0 * f * f2 + (m - 5.0) * h0 * h2) + (3.0 * m - 14.0) * f1 * f1 * h1
        - 2.0 * (m - 4.0) * f1 * f1 * f1
        + f1 * ((m - 7.0) * f * f2 - 2.0 * (m - 4.0) * h0 * h2 - 2.0 * (m - 4.0) * h1 * h1)
        - h0 * h0 * h3
        + (m - 2.0) * h1 * h1 * h1;
    Ok(match form {
        ConformalForm::Verbatim => (m - 2.0) * f.powi(spec.m() as i32 - 5) * h0 * b,
        ConformalForm::Reduced => 2.0 * b,
    })
}

/// Integrand `(1/2) tau^2 f^(m-1)` of the reduced bienergy at `r`.
pub fn bienergy_density(spec: &MapSpec, map: &RadialMap, r: f64) -> Result<f64> {
    let tau = tension(spec, &map.jet(r))?;
    let f = spec.f().eval(r, 0);
    Ok(0.5 * tau * tau * f.powi(spec.m() as i32 - 1))
}

fn check_bienergy_interval(spec: &MapSpec, map: &RadialMap, a: f64, b: f64) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "quadrature interval [{a}, {b}] must be bounded and well ordered"
        )));
    }
    if !map.domain().covers(a, b) || !spec.f().domain().covers(a, b) {
        return Err(Error::InvalidArgument(format!(
            "[{a}, {b}] is not inside the map and profile domains"
        )));
    }
    for x in [a, b] {
        if spec.f().eval(x, 0) == 0.0 {
            return Err(Error::Improper(format!(
                "the interval touches a zero of f at r = {x}; truncate it"
            )));
        }
    }
    Ok(())
}

/// Composite Simpson approximation of the reduced bienergy over `[a, b]`,
/// modulo the constant volume factor of `S^{m-1}`.
pub fn bienergy(spec: &MapSpec, map: &RadialMap, a: f64, b: f64, panels: usize) -> Result<f64> {
    check_bienergy_interval(spec, map, a, b)?;
    let err = std::cell::RefCell::new(None);
    let v = simpson(
        |r| {
            bienergy_density(spec, map, r).unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        },
        a,
        b,
        panels,
    )?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// [`bienergy`] with panel doubling until the Richardson estimate is below
/// `rel_tol` (relative).
pub fn bienergy_converged(spec: &MapSpec, map: &RadialMap, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult> {
    check_bienergy_interval(spec, map, a, b)?;
    let density = |r: f64| bienergy_density(spec, map, r).unwrap_or(f64::NAN);
    let q = simpson_converged(density, a, b, 64, rel_tol, 1 << 22)?;
    if !q.value.is_finite() {
        return Err(Error::Domain { what: "r", at: a });
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::WarpingProfile;
    use std::f64::consts::PI;

    fn euclid_to(h: WarpingProfile, m: usize) -> MapSpec {
        MapSpec::new(m, WarpingProfile::euclidean(), h).unwrap()
    }

    /// Jet of `(2/d) arctan(k r)`, written out by hand.
    fn arctan_jet(k: f64, d: f64, r: f64) -> Jet4 {
        let u = k * r;
        let s = 1.0 + u * u;
        let a = [
            2.0 / d * u.atan(),
            2.0 / d * k / s,
            2.0 / d * -2.0 * k * k * u / (s * s),
            2.0 / d * k.powi(3) * (6.0 * u * u - 2.0) / s.powi(3),
            2.0 / d * k.powi(4) * 24.0 * u * (1.0 - u * u) / s.powi(4),
        ];
        Jet4::new(r, a).unwrap()
    }

    #[test]
    fn linear_map_is_harmonic() {
        let spec = euclid_to(WarpingProfile::euclidean(), 4);
        let jet = Jet4::new(1.0, [3.0, 3.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(tension(&spec, &jet).unwrap(), 0.0);
        assert_eq!(biharmonic_residual(&spec, &jet, Normalization::Verbatim).unwrap(), 0.0);
    }

    #[test]
    fn tension_of_stereographic_family() {
        let d = 1.3;
        let spec = euclid_to(WarpingProfile::sphere(d).unwrap(), 4);
        for r in [0.2, 0.9, 3.0] {
            let jet = arctan_jet(0.7, d, r);
            let alpha = jet.a[0];
            let h = (d * alpha).sin() / d;
            let want = 2.0 * h * (1.0 - (d * alpha).cos()) / (r * r);
            let got = tension(&spec, &jet).unwrap();
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
            assert!(got.abs() > 1e-3);
        }
    }

    #[test]
    fn cylinder_tension_at_quarter_pi() {
        let lambda = 3.0;
        let spec = MapSpec::cylinder(lambda, WarpingProfile::sphere(1.0).unwrap()).unwrap();
        let jet = Jet4::new(0.3, [PI / 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((tension(&spec, &jet).unwrap() + lambda / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stereographic_family_is_biharmonic() {
        let spec = euclid_to(WarpingProfile::sphere(1.0).unwrap(), 4);
        for r in [0.5, 1.0, 2.0] {
            let jet = arctan_jet(1.0, 1.0, r);
            let res = biharmonic_residual(&spec, &jet, Normalization::Verbatim).unwrap();
            assert!(res.abs() < 1e-9, "r={r}: {res}");
        }
    }

    #[test]
    fn m5_conformal_map_leaves_the_stated_residual() {
        // alpha = 2 arctan(k r) is conformal for f = r, h = sin in any dimension.
        let m = 5;
        let spec = euclid_to(WarpingProfile::sphere(1.0).unwrap(), m);
        let jet = arctan_jet(0.8, 1.0, 1.0);
        let a = jet.a[0];
        let mm = m as f64;
        let want = 4.0 * (mm - 2.0) * (mm - 4.0) * (2.0 * a).sin() * (a / 2.0).sin().powi(4);
        let got = biharmonic_residual(&spec, &jet, Normalization::Verbatim).unwrap();
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        let conf = conformal_residual(&spec, a, 1.0, ConformalForm::Verbatim).unwrap();
        assert!((conf - want).abs() < 1e-12);
    }

    #[test]
    fn conformality_defect_examples() {
        let spec = euclid_to(WarpingProfile::euclidean(), 4);
        // alpha = c r^2 at r = 1
        let c = 0.7;
        let jet = Jet4::new(1.0, [c, 2.0 * c, 2.0 * c, 0.0, 0.0]).unwrap();
        assert!((conformality_defect(&spec, &jet, Orientation::Direct).unwrap() - c).abs() < 1e-15);
        // inversion alpha = c / r
        let r: f64 = 1.7;
        let jet = Jet4::new(r, [c / r, -c / (r * r), 0.0, 0.0, 0.0]).unwrap();
        assert!(conformality_defect(&spec, &jet, Orientation::Reversed).unwrap().abs() < 1e-15);
    }

    #[test]
    fn conformal_residual_flat_and_sphere_domain() {
        let spec = euclid_to(WarpingProfile::euclidean(), 4);
        for (a, r) in [(0.3, 0.5), (2.0, 4.0)] {
            assert_eq!(conformal_residual(&spec, a, r, ConformalForm::Verbatim).unwrap(), 0.0);
        }
        let c = 0.9;
        let spec = MapSpec::new(4, WarpingProfile::sphere(c).unwrap(), WarpingProfile::euclidean()).unwrap();
        let (a, r) = (0.4, 1.1);
        let want = -8.0 * (c * r / 2.0).sin().powi(2) * (c * r).sin().powi(2);
        let got = conformal_residual(&spec, a, r, ConformalForm::Reduced).unwrap();
        assert!((got - want).abs() < 1e-12);
        let verbatim = conformal_residual(&spec, a, r, ConformalForm::Verbatim).unwrap();
        let f = (c * r).sin() / c;
        assert!((verbatim - want * a / f).abs() < 1e-12);
    }

    #[test]
    fn expanded_residual_is_f_power_times_factored_form() {
        // alpha = 0.3 + sin(r) + r^3/7, arbitrary non-solution.
        let jet_of = |r: f64| {
            Jet4::new(
                r,
                [
                    0.3 + r.sin() + r.powi(3) / 7.0,
                    r.cos() + 3.0 * r * r / 7.0,
                    -r.sin() + 6.0 * r / 7.0,
                    -r.cos() + 6.0 / 7.0,
                    r.sin(),
                ],
            )
            .unwrap()
        };
        for (m, h) in [
            (4, WarpingProfile::sphere(1.0).unwrap()),
            (5, WarpingProfile::hyperbolic(0.6).unwrap()),
            (3, WarpingProfile::euclidean()),
        ] {
            let spec = MapSpec::new(m, WarpingProfile::hyperbolic(0.8).unwrap(), h).unwrap();
            for r in [0.4, 1.0, 2.3] {
                let jet = jet_of(r);
                let full = biharmonic_residual(&spec, &jet, Normalization::Verbatim).unwrap();
                let fac = f_system_pointwise(&spec, &jet).unwrap();
                let f = spec.f().eval(r, 0);
                let scaled = f.powi(m as i32 - 1) * fac;
                assert!((full - scaled).abs() < 1e-11 * (1.0 + full.abs()), "m={m} r={r}");
            }
        }
    }

    #[test]
    fn bienergy_of_constant_cylinder_map() {
        let lambda = 3.0;
        let spec = MapSpec::cylinder(lambda, WarpingProfile::sphere(1.0).unwrap()).unwrap();
        let map = RadialMap::constant(PI / 4.0, crate::profile::Interval::real_line());
        let len = 2.5;
        let e = bienergy(&spec, &map, 0.0, len, 8).unwrap();
        assert!((e - 0.5 * (lambda / 2.0).powi(2) * len).abs() < 1e-13);
    }

    #[test]
    fn bienergy_rejects_zero_of_f() {
        let spec = MapSpec::new(4, WarpingProfile::sphere(1.0).unwrap(), WarpingProfile::euclidean()).unwrap();
        let map = RadialMap::new("id", crate::profile::Interval::closed(0.0, PI), true, |r| {
            [r, 1.0, 0.0, 0.0, 0.0]
        });
        assert!(matches!(bienergy(&spec, &map, 0.0, 1.0, 8), Err(Error::Improper(_))));
        assert!(bienergy(&spec, &map, 0.1, 1.0, 8).is_ok());
    }

    #[test]
    fn factored_residual_grid_too_coarse() {
        let spec = euclid_to(WarpingProfile::euclidean(), 4);
        let map = RadialMap::new(
            "lin",
            crate::profile::Interval::new(crate::profile::Bound::Closed(0.0), crate::profile::Bound::Unbounded),
            true,
            |r| [r, 1.0, 0.0, 0.0, 0.0],
        );
        let g = UniformGrid::new(1.0, 2.0, 4).unwrap();
        assert!(matches!(
            residual_f_system(&spec, &map, g),
            Err(Error::InvalidParameter(_))
        ));
        let g = UniformGrid::new(1.0, 2.0, 9).unwrap();
        let (f, res) = residual_f_system(&spec, &map, g).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        assert_eq!(res.max_abs(), 0.0);
    }

    #[test]
    fn non_identity_lambda_is_unsupported_for_residual() {
        let spec = MapSpec::cylinder(2.0, WarpingProfile::sphere(1.0).unwrap()).unwrap();
        let jet = Jet4::new(0.0, [0.1, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            biharmonic_residual(&spec, &jet, Normalization::Verbatim),
            Err(Error::Unsupported(_))
        ));
    }
}
