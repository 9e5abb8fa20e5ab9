//! The substitution `t = ln r` for maps out of Euclidean space, where the
//! reduced bienergy becomes autonomous.

use crate::error::{Error, Result};
use crate::map::RadialMap;
use crate::profile::{Bound, Interval, ProfileKind, WarpingProfile};

/// `t`-jet from an `r`-jet at `r = e^t`. Coefficients are the Stirling
/// numbers of the second kind.
pub fn jet_r_to_t(r: f64, a: [f64; 5]) -> [f64; 5] {
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    [
        a[0],
        r * a[1],
        r * a[1] + r2 * a[2],
        r * a[1] + 3.0 * r2 * a[2] + r3 * a[3],
        r * a[1] + 7.0 * r2 * a[2] + 6.0 * r3 * a[3] + r4 * a[4],
    ]
}

/// Inverse of [`jet_r_to_t`]; signed Stirling numbers of the first kind.
pub fn jet_t_to_r(r: f64, b: [f64; 5]) -> [f64; 5] {
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    [
        b[0],
        b[1] / r,
        (b[2] - b[1]) / r2,
        (b[3] - 3.0 * b[2] + 2.0 * b[1]) / r3,
        (b[4] - 6.0 * b[3] + 11.0 * b[2] - 6.0 * b[1]) / r4,
    ]
}

fn map_bound(b: Bound, g: impl Fn(f64) -> f64, at_zero: Bound) -> Bound {
    match b {
        Bound::Closed(0.0) | Bound::Open(0.0) => at_zero,
        Bound::Closed(x) => Bound::Closed(g(x)),
        Bound::Open(x) => Bound::Open(g(x)),
        Bound::Unbounded => Bound::Unbounded,
    }
}

fn require_euclidean(f: &WarpingProfile) -> Result<()> {
    if matches!(f.kind(), ProfileKind::Euclidean) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "the log variable needs a Euclidean domain profile, got {}",
            f.label()
        )))
    }
}

/// `beta(t) = alpha(e^t)` with chain-rule jets.
pub fn to_log_variable(f: &WarpingProfile, map: &RadialMap) -> Result<RadialMap> {
    require_euclidean(f)?;
    let d = map.domain();
    if d.lo_value() < 0.0 || !(d.hi_value() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "map domain {d} must lie in [0, inf) to take logarithms"
        )));
    }
    let domain = Interval::new(
        map_bound(d.lo, f64::ln, Bound::Unbounded),
        map_bound(d.hi, f64::ln, Bound::Unbounded),
    );
    let inner = map.clone();
    Ok(RadialMap::new(
        format!("{} in t", map.label()),
        domain,
        false,
        move |t| {
            let r = t.exp();
            jet_r_to_t(r, inner.derivs(r))
        },
    ))
}

/// `alpha(r) = beta(ln r)`; inverse of [`to_log_variable`].
pub fn from_log_variable(f: &WarpingProfile, beta: &RadialMap) -> Result<RadialMap> {
    require_euclidean(f)?;
    let d = beta.domain();
    let lo = match d.lo {
        Bound::Unbounded => Bound::Open(0.0),
        Bound::Closed(t) => Bound::Closed(t.exp()),
        Bound::Open(t) => Bound::Open(t.exp()),
    };
    let hi = match d.hi {
        Bound::Unbounded => Bound::Unbounded,
        Bound::Closed(t) => Bound::Closed(t.exp()),
        Bound::Open(t) => Bound::Open(t.exp()),
    };
    let inner = beta.clone();
    Ok(RadialMap::new(
        format!("{} in r", beta.label()),
        Interval::new(lo, hi),
        false,
        move |r| jet_t_to_r(r, inner.derivs(r.ln())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(c: f64) -> RadialMap {
        RadialMap::new(
            "cr",
            Interval::new(Bound::Closed(0.0), Bound::Unbounded),
            true,
            move |r| [c * r, c, 0.0, 0.0, 0.0],
        )
    }

    #[test]
    fn linear_map_becomes_exponential() {
        let c = 1.7;
        let beta = to_log_variable(&WarpingProfile::euclidean(), &linear(c)).unwrap();
        for t in [-2.0, 0.0, 1.5] {
            let b = beta.derivs(t);
            let want = c * f64::exp(t);
            for v in b {
                assert!((v - want).abs() < 1e-12 * want.max(1.0));
            }
        }
        assert_eq!(beta.domain().lo, Bound::Unbounded);
    }

    #[test]
    fn round_trip_of_cubic() {
        let f = WarpingProfile::euclidean();
        let map = RadialMap::new("cubic", Interval::open(0.0, 3.0), false, |r| {
            [r * r * r - r, 3.0 * r * r - 1.0, 6.0 * r, 6.0, 0.0]
        });
        let back = from_log_variable(&f, &to_log_variable(&f, &map).unwrap()).unwrap();
        for r in [0.1, 1.0, 2.9] {
            let (a, b) = (map.derivs(r), back.derivs(r));
            for k in 0..5 {
                assert!((a[k] - b[k]).abs() < 1e-12, "r={r} k={k}");
            }
        }
        assert!((back.domain().hi_value() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_euclidean_is_unsupported() {
        let f = WarpingProfile::sphere(1.0).unwrap();
        assert!(matches!(to_log_variable(&f, &linear(1.0)), Err(Error::Unsupported(_))));
    }
}
