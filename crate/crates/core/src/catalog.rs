//! Closed-form solutions for constant-curvature models in dimension 4, their
//! singular-at-the-pole counterparts, the constant cylinder solutions, and the
//! identities that rule out the remaining pairs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::functionals::Orientation;
use crate::map::{log_spaced, RadialMap};
use crate::profile::{Bound, Interval, MapSpec, SpaceForm, WarpingProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    C1A,
    C1B,
    C1C,
    C2B,
    C3C,
    Inv1A,
    Inv1B,
    Inv1C,
    CylQuarterPi,
    CylThreeQuarterPi,
    NX2A,
    NX2C,
    NX3A,
    NX3B,
}

impl CaseId {
    pub const ALL: [CaseId; 14] = [
        CaseId::C1A,
        CaseId::C1B,
        CaseId::C1C,
        CaseId::C2B,
        CaseId::C3C,
        CaseId::Inv1A,
        CaseId::Inv1B,
        CaseId::Inv1C,
        CaseId::CylQuarterPi,
        CaseId::CylThreeQuarterPi,
        CaseId::NX2A,
        CaseId::NX2C,
        CaseId::NX3A,
        CaseId::NX3B,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::C1A => "C1A",
            CaseId::C1B => "C1B",
            CaseId::C1C => "C1C",
            CaseId::C2B => "C2B",
            CaseId::C3C => "C3C",
            CaseId::Inv1A => "Inv1A",
            CaseId::Inv1B => "Inv1B",
            CaseId::Inv1C => "Inv1C",
            CaseId::CylQuarterPi => "CylQuarterPi",
            CaseId::CylThreeQuarterPi => "CylThreeQuarterPi",
            CaseId::NX2A => "NX2A",
            CaseId::NX2C => "NX2C",
            CaseId::NX3A => "NX3A",
            CaseId::NX3B => "NX3B",
        }
    }

    pub fn nature(self) -> Nature {
        match self {
            CaseId::C1A | CaseId::C2B | CaseId::C3C => Nature::Harmonic,
            CaseId::NX2A | CaseId::NX2C | CaseId::NX3A | CaseId::NX3B => Nature::NonexistenceIdentity,
            _ => Nature::ProperBiharmonic,
        }
    }

    pub fn is_identity(self) -> bool {
        self.nature() == Nature::NonexistenceIdentity
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown case id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nature {
    Harmonic,
    ProperBiharmonic,
    NonexistenceIdentity,
}

impl fmt::Display for Nature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nature::Harmonic => "Harmonic",
            Nature::ProperBiharmonic => "ProperBiharmonic",
            Nature::NonexistenceIdentity => "NonexistenceIdentity",
        })
    }
}

/// `c` scales the domain (or the dilation for maps out of `R^4`), `d` the
/// target, `lambda` the eigenmap of the cylinder cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        CaseParams {
            c: 1.0,
            d: 1.0,
            lambda: 3.0,
        }
    }
}

impl CaseParams {
    pub fn new(c: f64, d: f64) -> Self {
        CaseParams {
            c,
            d,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("d", self.d), ("lambda", self.lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub case_id: CaseId,
    pub params: CaseParams,
    pub nature: Nature,
    /// Dimension 4 with the case's profiles; `f = 1` for the cylinder.
    pub spec: MapSpec,
    pub map: Option<RadialMap>,
    pub domain: Interval,
    /// Sign in the conformality relation satisfied by `map`.
    pub orientation: Option<Orientation>,
}

fn half_line(lo: Bound) -> Interval {
    Interval::new(lo, Bound::Unbounded)
}

/// `[atan(u), d/du, ..., d^4/du^4]`.
fn atan_jet(u: f64) -> [f64; 5] {
    let s = 1.0 + u * u;
    [
        u.atan(),
        1.0 / s,
        -2.0 * u / (s * s),
        (6.0 * u * u - 2.0) / s.powi(3),
        24.0 * u * (1.0 - u * u) / s.powi(4),
    ]
}

/// Derivatives of `artanh`, valid for `|u| != 1`; the value slot holds
/// `artanh(u)` for `|u| < 1` and `artanh(1/u)` otherwise (the two share all
/// derivatives).
fn atanh_jet(u: f64) -> [f64; 5] {
    let s = 1.0 - u * u;
    let v = if u.abs() < 1.0 { u.atanh() } else { (1.0 / u).atanh() };
    [
        v,
        1.0 / s,
        2.0 * u / (s * s),
        (2.0 + 6.0 * u * u) / s.powi(3),
        24.0 * u * (1.0 + u * u) / s.powi(4),
    ]
}

/// `scale * g(k x)` from the jet of `g` at `k x`.
fn chain_scaled(g: [f64; 5], k: f64, scale: f64) -> [f64; 5] {
    let mut out = [0.0; 5];
    let mut kp = 1.0;
    for i in 0..5 {
        out[i] = scale * kp * g[i];
        kp *= k;
    }
    out
}

/// Closed-form entry for a case. Identity entries carry profiles but no map.
pub fn catalog_solution(case_id: CaseId, params: CaseParams) -> Result<CatalogEntry> {
    params.validate()?;
    let CaseParams { c, d, lambda } = params;
    let k = c * c;
    let euclid = WarpingProfile::euclidean;
    let sphere = |x: f64| WarpingProfile::sphere(x);
    let hyper = |x: f64| WarpingProfile::hyperbolic(x);
    let zero_closed = Bound::Closed(0.0);

    let (spec, map, domain, orientation): (MapSpec, Option<RadialMap>, Interval, Option<Orientation>) = match case_id {
        CaseId::C1A => {
            let dom = half_line(zero_closed);
            let map = RadialMap::new("c r", dom, true, move |r| [c * r, c, 0.0, 0.0, 0.0]);
            (
                MapSpec::new(4, euclid(), euclid())?,
                Some(map),
                dom,
                Some(Orientation::Direct),
            )
        }
        CaseId::C1B => {
            let dom = half_line(zero_closed);
            let map = RadialMap::new("(2/d) atan(c^2 r)", dom, true, move |r| {
                chain_scaled(atan_jet(k * r), k, 2.0 / d)
            });
            (
                MapSpec::new(4, euclid(), sphere(d)?)?,
                Some(map),
                dom,
                Some(Orientation::Direct),
            )
        }
        CaseId::C1C => {
            let dom = Interval::new(zero_closed, Bound::Open(1.0 / k));
            let map = RadialMap::new("(2/d) artanh(c^2 r)", dom, true, move |r| {
                chain_scaled(atanh_jet(k * r), k, 2.0 / d)
            });
            (
                MapSpec::new(4, euclid(), hyper(d)?)?,
                Some(map),
                dom,
                Some(Orientation::Direct),
            )
        }
        CaseId::C2B => {
            let dom = Interval::closed(0.0, PI / c);
            let s = c / d;
            let map = RadialMap::new("(c/d) r", dom, true, move |r| [s * r, s, 0.0, 0.0, 0.0]);
            (
                MapSpec::new(4, sphere(c)?, sphere(d)?)?,
                Some(map),
                dom,
                Some(Orientation::Direct),
            )
        }
        CaseId::C3C => {
            let dom = half_line(zero_closed);
            let s = c / d;
            let map = RadialMap::new("(c/d) r", dom, true, move |r| [s * r, s, 0.0, 0.0, 0.0]);
            (
                MapSpec::new(4, hyper(c)?, hyper(d)?)?,
                Some(map),
                dom,
                Some(Orientation::Direct),
            )
        }
        CaseId::Inv1A => {
            let dom = half_line(Bound::Open(0.0));
            let map = RadialMap::new("c / r", dom, false, move |r| {
                let u = 1.0 / r;
                let (u2, u3) = (u * u, u * u * u);
                [c * u, -c * u2, 2.0 * c * u3, -6.0 * c * u2 * u2, 24.0 * c * u3 * u2]
            });
            (
                MapSpec::new(4, euclid(), euclid())?,
                Some(map),
                dom,
                Some(Orientation::Reversed),
            )
        }
        CaseId::Inv1B => {
            let dom = half_line(Bound::Open(0.0));
            // atan(k / r) = pi/2 - atan(r / k) for r > 0.
            let map = RadialMap::new("(2/d) atan(c^2 / r)", dom, false, move |r| {
                let mut j = chain_scaled(atan_jet(r / k), 1.0 / k, -2.0 / d);
                j[0] += PI / d;
                j
            });
            (
                MapSpec::new(4, euclid(), sphere(d)?)?,
                Some(map),
                dom,
                Some(Orientation::Reversed),
            )
        }
        CaseId::Inv1C => {
            let dom = half_line(Bound::Open(k));
            // artanh(k / r) = arcoth(r / k), whose derivatives match artanh's.
            let map = RadialMap::new("(2/d) artanh(c^2 / r)", dom, false, move |r| {
                chain_scaled(atanh_jet(r / k), 1.0 / k, 2.0 / d)
            });
            (
                MapSpec::new(4, euclid(), hyper(d)?)?,
                Some(map),
                dom,
                Some(Orientation::Reversed),
            )
        }
        CaseId::CylQuarterPi | CaseId::CylThreeQuarterPi => {
            let a = if case_id == CaseId::CylQuarterPi {
                PI / 4.0
            } else {
                3.0 * PI / 4.0
            };
            let dom = Interval::real_line();
            let map = RadialMap::constant(a, dom);
            (MapSpec::cylinder(lambda, sphere(1.0)?)?, Some(map), dom, None)
        }
        CaseId::NX2A => {
            let spec = MapSpec::new(4, sphere(c)?, euclid())?;
            let dom = spec.f().domain();
            (spec, None, dom, None)
        }
        CaseId::NX2C => {
            let spec = MapSpec::new(4, sphere(c)?, hyper(d)?)?;
            let dom = spec.f().domain();
            (spec, None, dom, None)
        }
        CaseId::NX3A => (
            MapSpec::new(4, hyper(c)?, euclid())?,
            None,
            half_line(zero_closed),
            None,
        ),
        CaseId::NX3B => (
            MapSpec::new(4, hyper(c)?, sphere(d)?)?,
            None,
            half_line(zero_closed),
            None,
        ),
    };
    Ok(CatalogEntry {
        case_id,
        params,
        nature: case_id.nature(),
        spec,
        map,
        domain,
        orientation,
    })
}

/// Closed-form value of the conformal biharmonicity condition (reduced
/// scaling) for the constant-curvature pairs without conformal solutions.
pub fn nonexistence_identity(id: CaseId, c: f64, d: f64, r: f64, alpha: f64) -> Result<f64> {
    let (cr, da) = (c * r, d * alpha);
    match id {
        CaseId::NX2A => Ok(-8.0 * (cr / 2.0).sin().powi(2) * cr.sin().powi(2)),
        CaseId::NX2C => Ok(4.0 * cr.sin().powi(2) * (cr.cos() - da.cosh())),
        CaseId::NX3A => Ok(-8.0 * (cr / 2.0).sinh().powi(2) * cr.sinh().powi(2)),
        CaseId::NX3B => Ok(4.0 * cr.sinh().powi(2) * (da.cos() - cr.cosh())),
        other => Err(Error::InvalidParameter(format!(
            "{other} is not a nonexistence identity"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    HarmonicOnly(CaseId),
    ProperBiharmonicFamily(CaseId),
    NoSolution(CaseId),
}

impl Classification {
    pub fn case(self) -> CaseId {
        match self {
            Classification::HarmonicOnly(c)
            | Classification::ProperBiharmonicFamily(c)
            | Classification::NoSolution(c) => c,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::HarmonicOnly(c) => write!(f, "HarmonicOnly {c}"),
            Classification::ProperBiharmonicFamily(c) => write!(f, "ProperBiharmonicFamily {c}"),
            Classification::NoSolution(c) => write!(f, "NoSolution {c}"),
        }
    }
}

/// Conformal biharmonic maps between 4-dimensional space forms, with
/// `alpha(0) = 0`.
pub fn classify_constant_curvature(domain: SpaceForm, target: SpaceForm) -> Classification {
    use Classification::*;
    use SpaceForm::*;
    match (domain, target) {
        (Euclidean, Euclidean) => HarmonicOnly(CaseId::C1A),
        (Euclidean, Sphere) => ProperBiharmonicFamily(CaseId::C1B),
        (Euclidean, Hyperbolic) => ProperBiharmonicFamily(CaseId::C1C),
        (Sphere, Euclidean) => NoSolution(CaseId::NX2A),
        (Sphere, Sphere) => HarmonicOnly(CaseId::C2B),
        (Sphere, Hyperbolic) => NoSolution(CaseId::NX2C),
        (Hyperbolic, Euclidean) => NoSolution(CaseId::NX3A),
        (Hyperbolic, Sphere) => NoSolution(CaseId::NX3B),
        (Hyperbolic, Hyperbolic) => HarmonicOnly(CaseId::C3C),
    }
}

/// Largest radius used to sample an unbounded domain.
pub const SAMPLE_R_MAX: f64 = 1e3;
/// Distance kept from finite domain endpoints when sampling.
pub const ENDPOINT_MARGIN: f64 = 1e-3;

/// `n` log-spaced radii inside the entry's domain, `ENDPOINT_MARGIN` away from
/// finite endpoints and capped at `SAMPLE_R_MAX`.
pub fn sample_radii(entry: &CatalogEntry, n: usize) -> Result<Vec<f64>> {
    let lo = entry.domain.lo_value().max(0.0) + ENDPOINT_MARGIN;
    let hi = if entry.domain.hi_value().is_finite() {
        entry.domain.hi_value() - ENDPOINT_MARGIN
    } else {
        SAMPLE_R_MAX
    };
    if !(lo < hi) || entry.domain.lo_value() == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!(
            "cannot log-sample the domain {} of {}",
            entry.domain, entry.case_id
        )));
    }
    Ok(log_spaced(lo, hi, n))
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CATALOG_CSV_HEADER: &str = "case_id,c,d,lambda,nature,domain";

/// One CSV row per entry, preceded by [`CATALOG_CSV_HEADER`].
pub fn catalog_csv(entries: &[CatalogEntry]) -> String {
    let mut out = String::from(CATALOG_CSV_HEADER);
    out.push('\n');
    for e in entries {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{}\n",
            e.case_id,
            e.params.c,
            e.params.d,
            e.params.lambda,
            e.nature,
            csv_quote(&e.domain.to_string())
        ));
    }
    out
}
