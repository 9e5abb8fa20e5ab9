//! Warping profiles of rotationally symmetric models.
//!
//! A model is `S^{m-1} x [0, b)` with metric `f(r)^2 g_sphere + dr^2`. The
//! warping function `f` carries analytic derivatives through order 3 because
//! the fourth-order Euler-Lagrange residual consumes `f'''` and `h'''`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::series::Taylor;

/// One end of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Closed(f64),
    Open(f64),
    /// `-inf` at the lower end, `+inf` at the upper end.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub const fn new(lo: Bound, hi: Bound) -> Self {
        Interval { lo, hi }
    }

    pub const fn real_line() -> Self {
        Interval::new(Bound::Unbounded, Bound::Unbounded)
    }

    pub const fn closed(a: f64, b: f64) -> Self {
        Interval::new(Bound::Closed(a), Bound::Closed(b))
    }

    pub const fn open(a: f64, b: f64) -> Self {
        Interval::new(Bound::Open(a), Bound::Open(b))
    }

    pub fn lo_value(&self) -> f64 {
        match self.lo {
            Bound::Closed(a) | Bound::Open(a) => a,
            Bound::Unbounded => f64::NEG_INFINITY,
        }
    }

    pub fn hi_value(&self) -> f64 {
        match self.hi {
            Bound::Closed(b) | Bound::Open(b) => b,
            Bound::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.lo, Bound::Unbounded) && !matches!(self.hi, Bound::Unbounded)
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = match self.lo {
            Bound::Closed(a) => x >= a,
            Bound::Open(a) => x > a,
            Bound::Unbounded => x.is_finite() || x == f64::NEG_INFINITY,
        };
        let hi_ok = match self.hi {
            Bound::Closed(b) => x <= b,
            Bound::Open(b) => x < b,
            Bound::Unbounded => x.is_finite() || x == f64::INFINITY,
        };
        lo_ok && hi_ok
    }

    /// Strictly between the endpoints.
    pub fn interior_contains(&self, x: f64) -> bool {
        x > self.lo_value() && x < self.hi_value() && x.is_finite()
    }

    /// `[a, b]` lies in the closure of the interval.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        a >= self.lo_value() && b <= self.hi_value() && a <= b
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Bound::Closed(a) => write!(f, "[{a}")?,
            Bound::Open(a) => write!(f, "({a}")?,
            Bound::Unbounded => write!(f, "(-inf")?,
        }
        write!(f, ", ")?;
        match self.hi {
            Bound::Closed(b) => write!(f, "{b}]"),
            Bound::Open(b) => write!(f, "{b})"),
            Bound::Unbounded => write!(f, "+inf)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Euclidean,
    /// `(1/d) sin(d r)` on `[0, pi/d]`, sectional curvature `d^2`.
    Sphere {
        d: f64,
    },
    /// `(1/c) sinh(c r)` on `[0, inf)`, sectional curvature `-c^2`.
    Hyperbolic {
        c: f64,
    },
    Custom,
}

/// Kind selector for [`make_space_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceForm {
    Euclidean,
    Sphere,
    Hyperbolic,
}

impl SpaceForm {
    pub fn name(self) -> &'static str {
        match self {
            SpaceForm::Euclidean => "euclidean",
            SpaceForm::Sphere => "sphere",
            SpaceForm::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::str::FromStr for SpaceForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "flat" | "r" => Ok(SpaceForm::Euclidean),
            "sphere" | "s" => Ok(SpaceForm::Sphere),
            "hyperbolic" | "h" => Ok(SpaceForm::Hyperbolic),
            other => Err(Error::InvalidParameter(format!("unknown space form `{other}`"))),
        }
    }
}

type AnalyticFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;
type SampledFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    SpaceForm,
    Analytic(AnalyticFn),
    Sampled(SampledFn),
}

/// Finite-difference steps used to wrap a profile given only by its values.
/// Step grows with derivative order to keep roundoff below truncation.
pub const SAMPLED_STEPS: [f64; 3] = [1e-5, 1e-4, 1e-3];

/// A warping function with derivatives through order 3 and its domain.
#[derive(Clone)]
pub struct WarpingProfile {
    kind: ProfileKind,
    domain: Interval,
    source: Source,
    label: String,
}

impl fmt::Debug for WarpingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingProfile")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Build `r`, `(1/c) sinh(c r)` or `(1/d) sin(d r)`.
pub fn make_space_form(kind: SpaceForm, curvature: f64) -> Result<WarpingProfile> {
    match kind {
        SpaceForm::Euclidean => Ok(WarpingProfile::euclidean()),
        SpaceForm::Sphere => WarpingProfile::sphere(curvature),
        SpaceForm::Hyperbolic => WarpingProfile::hyperbolic(curvature),
    }
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl WarpingProfile {
    pub fn euclidean() -> Self {
        WarpingProfile {
            kind: ProfileKind::Euclidean,
            domain: Interval::new(Bound::Closed(0.0), Bound::Unbounded),
            source: Source::SpaceForm,
            label: "r".into(),
        }
    }

    pub fn sphere(d: f64) -> Result<Self> {
        check_scale("sphere parameter d", d)?;
        Ok(WarpingProfile {
            kind: ProfileKind::Sphere { d },
            domain: Interval::closed(0.0, std::f64::consts::PI / d),
            source: Source::SpaceForm,
            label: format!("sin({d} r)/{d}"),
        })
    }

    pub fn hyperbolic(c: f64) -> Result<Self> {
        check_scale("hyperbolic parameter c", c)?;
        Ok(WarpingProfile {
            kind: ProfileKind::Hyperbolic { c },
            domain: Interval::new(Bound::Closed(0.0), Bound::Unbounded),
            source: Source::SpaceForm,
            label: format!("sinh({c} r)/{c}"),
        })
    }

    /// A profile with user-supplied analytic derivatives `eval(r, order)`,
    /// `order` in `0..=3`.
    pub fn custom_analytic<F>(label: impl Into<String>, domain: Interval, eval: F) -> Self
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        WarpingProfile {
            kind: ProfileKind::Custom,
            domain,
            source: Source::Analytic(Arc::new(eval)),
            label: label.into(),
        }
    }

    /// A profile known only by its values; derivatives come from central
    /// differences with [`SAMPLED_STEPS`]. The closure must accept arguments
    /// up to `2e-3` outside the domain.
    pub fn custom_sampled<F>(label: impl Into<String>, domain: Interval, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        WarpingProfile {
            kind: ProfileKind::Custom,
            domain,
            source: Source::Sampled(Arc::new(eval)),
            label: label.into(),
        }
    }

    /// `f = 1` on the whole line: the cylinder `R x S^{m-1}` as a domain.
    pub fn unit_cylinder() -> Self {
        WarpingProfile::custom_analytic("1", Interval::real_line(), |_, k| if k == 0 { 1.0 } else { 0.0 })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Derivatives were obtained by finite differences.
    pub fn is_lower_precision(&self) -> bool {
        matches!(self.source, Source::Sampled(_))
    }

    /// `f^(order)(r)` for `order` in `0..=3`.
    ///
    /// # Panics
    /// If `order > 3`.
    pub fn eval(&self, r: f64, order: usize) -> f64 {
        assert!(order <= 3, "warping profiles carry derivatives through order 3");
        match &self.source {
            Source::SpaceForm => space_form_derivative(self.kind, r, order),
            Source::Analytic(g) => g(r, order),
            Source::Sampled(g) => sampled_derivative(g.as_ref(), r, order),
        }
    }

    /// `[f, f', f'', f''']` at `r`.
    pub fn derivs(&self, r: f64) -> [f64; 4] {
        match &self.source {
            Source::SpaceForm => std::array::from_fn(|k| space_form_derivative(self.kind, r, k)),
            _ => std::array::from_fn(|k| self.eval(r, k)),
        }
    }

    /// Taylor coefficients about `x0`. Space forms are expanded to any order;
    /// custom profiles are truncated after the cubic term.
    pub fn taylor<const N: usize>(&self, x0: f64) -> Taylor<N> {
        match self.source {
            Source::SpaceForm => {
                let d: [f64; N] = std::array::from_fn(|k| space_form_derivative(self.kind, x0, k));
                Taylor::from_derivatives(&d)
            }
            _ => Taylor::from_derivatives(&self.derivs(x0)),
        }
    }

    /// Whether Taylor coefficients beyond order 3 are exact.
    pub fn has_full_taylor(&self) -> bool {
        matches!(self.source, Source::SpaceForm)
    }
}

/// Any-order derivative of the three closed-form profiles.
fn space_form_derivative(kind: ProfileKind, r: f64, order: usize) -> f64 {
    match kind {
        ProfileKind::Euclidean => match order {
            0 => r,
            1 => 1.0,
            _ => 0.0,
        },
        ProfileKind::Sphere { d } => {
            // d^k/dr^k sin(d r)/d = d^(k-1) sin(d r + k pi/2)
            let x = d * r;
            if order == 0 {
                return x.sin() / d;
            }
            let scale = d.powi(order as i32 - 1);
            scale
                * match order % 4 {
                    0 => x.sin(),
                    1 => x.cos(),
                    2 => -x.sin(),
                    _ => -x.cos(),
                }
        }
        ProfileKind::Hyperbolic { c } => {
            let x = c * r;
            if order == 0 {
                return x.sinh() / c;
            }
            let scale = c.powi(order as i32 - 1);
            scale * if order % 2 == 0 { x.sinh() } else { x.cosh() }
        }
        ProfileKind::Custom => unreachable!("custom profiles are not space forms"),
    }
}

fn sampled_derivative(g: &(dyn Fn(f64) -> f64 + Send + Sync), r: f64, order: usize) -> f64 {
    match order {
        0 => g(r),
        1 => {
            let h = SAMPLED_STEPS[0];
            (g(r + h) - g(r - h)) / (2.0 * h)
        }
        2 => {
            let h = SAMPLED_STEPS[1];
            (g(r + h) - 2.0 * g(r) + g(r - h)) / (h * h)
        }
        _ => {
            let h = SAMPLED_STEPS[2];
            (g(r + 2.0 * h) - 2.0 * g(r + h) + 2.0 * g(r - h) - g(r - 2.0 * h)) / (2.0 * h * h * h)
        }
    }
}

/// `K(r) = -f''(r) / f(r)`, from the Jacobi equation `f'' + K f = 0`.
pub fn radial_curvature(profile: &WarpingProfile, r: f64) -> Result<f64> {
    if !profile.domain.interior_contains(r) {
        return Err(Error::Domain { what: "r", at: r });
    }
    let f = profile.eval(r, 0);
    if f == 0.0 {
        return Err(Error::Domain { what: "r", at: r });
    }
    Ok(-profile.eval(r, 2) / f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed violation (zero when the check holds exactly).
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tolerances used by [`validate_profile`].
const POLE_TOL: f64 = 1e-10;
const CONSISTENCY_STEP: f64 = 1e-4;
const CONSISTENCY_TOL: f64 = 1e-6;
/// Sampling span used for unbounded domains.
pub const UNBOUNDED_SPAN: f64 = 10.0;

/// Check the model axioms on `sample_count` interior points. Violations are
/// reported, never returned as errors.
pub fn validate_profile(profile: &WarpingProfile, sample_count: usize) -> Result<ValidationReport> {
    if sample_count < 8 {
        return Err(Error::InvalidParameter(format!(
            "sample_count must be at least 8, got {sample_count}"
        )));
    }
    let dom = profile.domain();
    let lo = if dom.lo_value().is_finite() {
        dom.lo_value()
    } else {
        -UNBOUNDED_SPAN
    };
    let hi = if dom.hi_value().is_finite() {
        dom.hi_value()
    } else {
        lo.max(0.0) + UNBOUNDED_SPAN
    };
    let samples: Vec<f64> = (0..sample_count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / sample_count as f64)
        .collect();

    let mut checks = Vec::new();
    let v0 = profile.eval(0.0, 0).abs();
    checks.push(Check {
        name: "pole_value",
        passed: v0 <= POLE_TOL,
        worst: v0,
    });
    let v1 = (profile.eval(0.0, 1) - 1.0).abs();
    checks.push(Check {
        name: "pole_slope",
        passed: v1 <= POLE_TOL,
        worst: v1,
    });

    let worst_pos = samples
        .iter()
        .map(|&r| (-profile.eval(r, 0)).max(0.0))
        .fold(0.0_f64, f64::max);
    let positive_ok = samples.iter().all(|&r| profile.eval(r, 0) > 0.0);
    checks.push(Check {
        name: "interior_positive",
        passed: positive_ok,
        worst: worst_pos,
    });

    if let Bound::Closed(b) = dom.hi {
        let vb = profile.eval(b, 0).abs();
        checks.push(Check {
            name: "end_value",
            passed: vb <= POLE_TOL,
            worst: vb,
        });
        let sb = (profile.eval(b, 1) + 1.0).abs();
        checks.push(Check {
            name: "end_slope",
            passed: sb <= POLE_TOL,
            worst: sb,
        });
    }

    const NAMES: [&str; 3] = ["consistency_0_1", "consistency_1_2", "consistency_2_3"];
    let h = CONSISTENCY_STEP;
    for k in 0..3 {
        let mut worst = 0.0_f64;
        let mut ok = true;
        for &r in &samples {
            if !dom.interior_contains(r - h) || !dom.interior_contains(r + h) {
                continue;
            }
            let fd = (profile.eval(r + h, k) - profile.eval(r - h, k)) / (2.0 * h);
            let exact = profile.eval(r, k + 1);
            let err = (fd - exact).abs();
            worst = worst.max(err);
            if err > CONSISTENCY_TOL * (1.0 + exact.abs()) {
                ok = false;
            }
        }
        checks.push(Check {
            name: NAMES[k],
            passed: ok,
            worst,
        });
    }
    Ok(ValidationReport { checks })
}

/// Domain profile, target profile and dimension: everything that fixes the
/// reduced functional.
#[derive(Debug, Clone)]
pub struct MapSpec {
    m: usize,
    f: WarpingProfile,
    h: WarpingProfile,
    lambda: Option<f64>,
}

impl MapSpec {
    pub fn new(m: usize, f: WarpingProfile, h: WarpingProfile) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension m must be at least 3, got {m}"
            )));
        }
        Ok(MapSpec { m, f, h, lambda: None })
    }

    /// Override the eigenvalue weighting the angular term (default `m - 1`).
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        check_scale("lambda", lambda)?;
        self.lambda = Some(lambda);
        Ok(self)
    }

    /// `f = 1` domain with eigenvalue `lambda`; `m` is nominal here.
    pub fn cylinder(lambda: f64, h: WarpingProfile) -> Result<Self> {
        MapSpec::new(4, WarpingProfile::unit_cylinder(), h)?.with_lambda(lambda)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn f(&self) -> &WarpingProfile {
        &self.f
    }

    pub fn h(&self) -> &WarpingProfile {
        &self.h
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or((self.m - 1) as f64)
    }

    /// True when the angular eigenvalue is the identity-map value `m - 1`.
    pub fn is_identity_eigenmap(&self) -> bool {
        self.lambda.map_or(true, |l| l == (self.m - 1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn map_spec_dimension_and_lambda() {
        let e = WarpingProfile::euclidean();
        assert!(MapSpec::new(2, e.clone(), e.clone()).is_err());
        let s = MapSpec::new(4, e.clone(), e.clone()).unwrap();
        assert_eq!(s.lambda(), 3.0);
        assert!(s.is_identity_eigenmap());
        let c = MapSpec::cylinder(5.0, e).unwrap();
        assert_eq!(c.lambda(), 5.0);
        assert!(!c.is_identity_eigenmap());
    }

    #[test]
    fn euclidean_values() {
        let f = make_space_form(SpaceForm::Euclidean, 0.0).unwrap();
        assert_eq!(f.eval(2.0, 0), 2.0);
        assert_eq!(f.eval(2.0, 1), 1.0);
        assert_eq!(f.eval(2.0, 2), 0.0);
    }

    #[test]
    fn sphere_antipode() {
        let f = make_space_form(SpaceForm::Sphere, 1.0).unwrap();
        assert!(f.eval(PI, 0).abs() < 1e-15);
        assert!((f.eval(PI, 1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_derivatives_match_differences() {
        let f = make_space_form(SpaceForm::Hyperbolic, 2.0).unwrap();
        assert!((f.eval(1.0, 0) - 2f64.sinh() / 2.0).abs() < 1e-15);
        assert!((f.eval(1.0, 3) - 4.0 * 2f64.cosh()).abs() < 1e-13);
        let h = 1e-4;
        for k in 0..3 {
            let fd = (f.eval(1.0 + h, k) - f.eval(1.0 - h, k)) / (2.0 * h);
            let exact = f.eval(1.0, k + 1);
            assert!((fd - exact).abs() < 1e-7 * (1.0 + exact.abs()), "k={k}");
        }
    }

    #[test]
    fn non_positive_curvature_is_rejected() {
        assert!(matches!(
            make_space_form(SpaceForm::Sphere, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(make_space_form(SpaceForm::Hyperbolic, -1.0).is_err());
    }

    #[test]
    fn curvature_of_space_forms() {
        assert_eq!(radial_curvature(&WarpingProfile::euclidean(), 1.0).unwrap(), 0.0);
        let s = WarpingProfile::sphere(1.5).unwrap();
        assert!((radial_curvature(&s, 0.7).unwrap() - 2.25).abs() < 1e-14);
        let h = WarpingProfile::hyperbolic(0.5).unwrap();
        assert!((radial_curvature(&h, 3.0).unwrap() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn curvature_at_a_zero_is_a_domain_error() {
        let s = WarpingProfile::sphere(1.0).unwrap();
        assert!(matches!(radial_curvature(&s, PI), Err(Error::Domain { .. })));
        assert!(radial_curvature(&s, 0.0).is_err());
    }

    #[test]
    fn validation_of_space_forms_passes() {
        let report = validate_profile(&WarpingProfile::euclidean(), 64).unwrap();
        assert!(report.all_passed(), "{report:?}");
        let report = validate_profile(&WarpingProfile::sphere(1.0).unwrap(), 64).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert!(report.check("end_value").unwrap().passed);
        assert!(report.check("end_slope").unwrap().passed);
        let report = validate_profile(&WarpingProfile::hyperbolic(1.0).unwrap(), 64).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn shifted_pole_is_flagged() {
        let f = WarpingProfile::custom_analytic(
            "r + 0.1",
            Interval::new(Bound::Closed(0.0), Bound::Unbounded),
            |r, k| match k {
                0 => r + 0.1,
                1 => 1.0,
                _ => 0.0,
            },
        );
        let report = validate_profile(&f, 16).unwrap();
        let pole = report.check("pole_value").unwrap();
        assert!(!pole.passed);
        assert!((pole.worst - 0.1).abs() < 1e-15);
        assert!(report.check("pole_slope").unwrap().passed);
    }

    #[test]
    fn too_few_samples() {
        assert!(validate_profile(&WarpingProfile::euclidean(), 7).is_err());
    }

    #[test]
    fn sampled_profile_is_flagged_and_close() {
        let f = WarpingProfile::custom_sampled("sinh", Interval::new(Bound::Closed(0.0), Bound::Unbounded), f64::sinh);
        assert!(f.is_lower_precision());
        let x: f64 = 0.8;
        assert!((f.eval(x, 1) - x.cosh()).abs() < 1e-9);
        assert!((f.eval(x, 2) - x.sinh()).abs() < 1e-7);
        assert!((f.eval(x, 3) - x.cosh()).abs() < 1e-5);
    }

    #[test]
    fn taylor_of_sphere_profile() {
        let f = WarpingProfile::sphere(2.0).unwrap();
        let t: Taylor<6> = f.taylor(0.0);
        // sin(2r)/2 = r - 4 r^3/6 + 16 r^5/120
        let want = [0.0, 1.0, 0.0, -4.0 / 6.0, 0.0, 16.0 / 120.0];
        for k in 0..6 {
            assert!((t.c[k] - want[k]).abs() < 1e-15);
        }
    }
}
