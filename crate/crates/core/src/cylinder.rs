//! Maps from the cylinder `R x S^{m-1}` (warping `f = 1`) into a model `h`,
//! composed with an eigenmap of eigenvalue `lambda`.

use crate::error::{Error, Result};
use crate::map::{Jet4, RadialMap};
use crate::profile::WarpingProfile;
use crate::quadrature::simpson;

/// `q = h h'` and its first two derivatives in `alpha`.
pub(crate) fn q_derivs(h: &WarpingProfile, alpha: f64) -> [f64; 3] {
    let [h0, h1, h2, h3] = h.derivs(alpha);
    [h0 * h1, h1 * h1 + h0 * h2, 3.0 * h1 * h2 + h0 * h3]
}

/// `tau = alpha'' - lambda h(alpha) h'(alpha)`.
pub fn cylinder_tension(lambda: f64, h: &WarpingProfile, jet: &Jet4) -> f64 {
    jet.a[2] - lambda * q_derivs(h, jet.a[0])[0]
}

/// Derivative of [`cylinder_tension`] along the curve.
pub fn cylinder_tension_rate(lambda: f64, h: &WarpingProfile, jet: &Jet4) -> f64 {
    jet.a[3] - lambda * q_derivs(h, jet.a[0])[1] * jet.a[1]
}

/// `-alpha' tau' + (1/2) tau (2 alpha'' - tau)`.
pub fn cylinder_hamiltonian(lambda: f64, h: &WarpingProfile, jet: &Jet4) -> f64 {
    let tau = cylinder_tension(lambda, h, jet);
    let dtau = cylinder_tension_rate(lambda, h, jet);
    -jet.a[1] * dtau + 0.5 * tau * (2.0 * jet.a[2] - tau)
}

/// Euler-Lagrange expression `tau'' - lambda q'(alpha) tau`; vanishes exactly
/// on critical points of [`cylinder_bienergy`].
pub fn cylinder_residual(lambda: f64, h: &WarpingProfile, jet: &Jet4) -> f64 {
    let [a, a1, a2, _, a4] = jet.a;
    let [q, q1, q2] = q_derivs(h, a);
    let tau = a2 - lambda * q;
    let ddtau = a4 - lambda * (q2 * a1 * a1 + q1 * a2);
    ddtau - lambda * q1 * tau
}

/// `(1/2) int_a^b tau^2 dr` by composite Simpson.
pub fn cylinder_bienergy(
    lambda: f64,
    h: &WarpingProfile,
    map: &RadialMap,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("interval [{a}, {b}] must be bounded")));
    }
    if !map.domain().covers(a, b) {
        return Err(Error::InvalidArgument(format!("[{a}, {b}] is outside the map domain")));
    }
    simpson(
        |r| {
            let tau = cylinder_tension(lambda, h, &map.jet(r));
            0.5 * tau * tau
        },
        a,
        b,
        panels,
    )
}

/// Spreads (max - min) of the quantities entering the rigidity argument for
/// solutions with `|tau|` constant: when `tau` and `H` are constant,
/// `alpha'' = H / tau + tau / 2` and `q = (alpha'' - tau) / lambda` are forced
/// to be constant as well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityReport {
    pub tau_spread: f64,
    pub hamiltonian_spread: f64,
    pub ddalpha_spread: f64,
    pub q_spread: f64,
    pub reconstruction_error: f64,
}

impl RigidityReport {
    /// The implication holds on these samples at the given tolerances.
    pub fn holds(&self, premise_tol: f64, conclusion_tol: f64) -> bool {
        let premise = self.tau_spread < premise_tol && self.hamiltonian_spread < premise_tol;
        !premise || (self.ddalpha_spread < conclusion_tol && self.q_spread < conclusion_tol)
    }
}

fn spread(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Evaluate the rigidity quantities on a sampled trajectory. Requires
/// `tau != 0` at every sample.
pub fn cylinder_rigidity(lambda: f64, h: &WarpingProfile, jets: &[Jet4]) -> Result<RigidityReport> {
    if jets.is_empty() {
        return Err(Error::InvalidParameter("rigidity check needs samples".into()));
    }
    let mut taus = Vec::with_capacity(jets.len());
    let mut hams = Vec::with_capacity(jets.len());
    let mut rebuilt = Vec::with_capacity(jets.len());
    let mut qs = Vec::with_capacity(jets.len());
    let mut reconstruction_error: f64 = 0.0;
    for jet in jets {
        let tau = cylinder_tension(lambda, h, jet);
        if tau == 0.0 {
            return Err(Error::Domain { what: "tau", at: jet.x });
        }
        let ham = cylinder_hamiltonian(lambda, h, jet);
        let dda = ham / tau + tau / 2.0;
        if cylinder_tension_rate(lambda, h, jet) == 0.0 || jet.a[1] == 0.0 {
            reconstruction_error = reconstruction_error.max((dda - jet.a[2]).abs());
        }
        taus.push(tau);
        hams.push(ham);
        rebuilt.push(dda);
        qs.push((dda - tau) / lambda);
    }
    Ok(RigidityReport {
        tau_spread: spread(taus.into_iter()),
        hamiltonian_spread: spread(hams.into_iter()),
        ddalpha_spread: spread(rebuilt.into_iter()),
        q_spread: spread(qs.into_iter()),
        reconstruction_error,
    })
}

/// The fourth-order residual of a constant map: `lambda^2 q(alpha) q'(alpha)`.
pub fn constant_map_residual(lambda: f64, h: &WarpingProfile, alpha: f64) -> f64 {
    let [q, q1, _] = q_derivs(h, alpha);
    lambda * lambda * q * q1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Interval;
    use std::f64::consts::PI;

    fn sine() -> WarpingProfile {
        WarpingProfile::sphere(1.0).unwrap()
    }

    #[test]
    fn quarter_pi_constants_are_proper_critical_points() {
        let lambda = 3.0;
        for alpha in [PI / 4.0, 3.0 * PI / 4.0] {
            let jet = Jet4::new(0.0, [alpha, 0.0, 0.0, 0.0, 0.0]).unwrap();
            assert!((cylinder_tension(lambda, &sine(), &jet).abs() - lambda / 2.0).abs() < 1e-15);
            assert!(cylinder_residual(lambda, &sine(), &jet).abs() < 1e-15);
            let ham = cylinder_hamiltonian(lambda, &sine(), &jet);
            assert!((ham + lambda * lambda / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_of_constants_matches_closed_form() {
        let lambda = 2.5;
        for alpha in [0.3, 1.0, 2.0] {
            let jet = Jet4::new(0.0, [alpha, 0.0, 0.0, 0.0, 0.0]).unwrap();
            let want = lambda * lambda * alpha.sin() * alpha.cos() * (2.0 * alpha).cos();
            assert!((cylinder_residual(lambda, &sine(), &jet) - want).abs() < 1e-14);
            assert!((constant_map_residual(lambda, &sine(), alpha) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_map_has_zero_bienergy() {
        let map = RadialMap::constant(0.0, Interval::real_line());
        assert_eq!(cylinder_bienergy(2.0, &sine(), &map, -1.0, 1.0, 4).unwrap(), 0.0);
    }

    #[test]
    fn rigidity_on_exponential_family() {
        // h = identity: tau = alpha'' - lambda alpha. The family
        // alpha = A e^{k r} - C / lambda (k^2 = lambda) has tau = C constant and
        // H constant only when A = 0.
        let lambda: f64 = 2.0;
        let k = lambda.sqrt();
        let h = WarpingProfile::euclidean();
        let sample = |a: f64, c: f64| -> Vec<Jet4> {
            (0..50)
                .map(|i| {
                    let r = -1.0 + i as f64 * 0.04;
                    let e = a * (k * r).exp();
                    Jet4::new(r, [e - c / lambda, k * e, k * k * e, k.powi(3) * e, k.powi(4) * e]).unwrap()
                })
                .collect()
        };
        let flat = cylinder_rigidity(lambda, &h, &sample(0.0, 0.7)).unwrap();
        assert!(flat.tau_spread < 1e-14 && flat.hamiltonian_spread < 1e-14);
        assert!(flat.q_spread < 1e-14 && flat.holds(1e-10, 1e-8));
        let curved = cylinder_rigidity(lambda, &h, &sample(0.3, 0.7)).unwrap();
        assert!(curved.tau_spread < 1e-13);
        assert!(curved.hamiltonian_spread > 1e-3);
        assert!(curved.holds(1e-10, 1e-8));
    }
}
