//! Hamiltonian of a second-order Lagrangian `L(t, b, b', b'')`:
//! `H = b' (dL/db' - d/dt dL/db'') + b'' dL/db'' - L`,
//! which is conserved along solutions when `L` does not depend on `t`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::RadialMap;
use crate::profile::WarpingProfile;

pub trait Lagrangian {
    fn value(&self, t: f64, b: f64, db: f64, ddb: f64) -> f64;

    /// Whether `value` ignores its first argument.
    fn is_autonomous(&self) -> bool;
}

/// Reduced bienergy density in the log variable for a map out of `R^m`:
/// `(1/2) [b'' + (m-2) b' - (m-1) h(b) h'(b)]^2 e^{(m-4) t}`.
#[derive(Debug, Clone)]
pub struct LogLagrangian {
    pub m: usize,
    pub h: WarpingProfile,
}

impl LogLagrangian {
    pub fn new(m: usize, h: WarpingProfile) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!("dimension m must be >= 3, got {m}")));
        }
        Ok(LogLagrangian { m, h })
    }
}

impl Lagrangian for LogLagrangian {
    fn value(&self, t: f64, b: f64, db: f64, ddb: f64) -> f64 {
        let m = self.m as f64;
        let q = self.h.eval(b, 0) * self.h.eval(b, 1);
        let bracket = ddb + (m - 2.0) * db - (m - 1.0) * q;
        let weight = if self.m == 4 { 1.0 } else { ((m - 4.0) * t).exp() };
        0.5 * bracket * bracket * weight
    }

    fn is_autonomous(&self) -> bool {
        self.m == 4
    }
}

/// `(1/2) [a'' - lambda h(a) h'(a)]^2`, maps out of a cylinder.
#[derive(Debug, Clone)]
pub struct CylinderLagrangian {
    pub lambda: f64,
    pub h: WarpingProfile,
}

impl Lagrangian for CylinderLagrangian {
    fn value(&self, _t: f64, a: f64, _da: f64, dda: f64) -> f64 {
        let tau = dda - self.lambda * self.h.eval(a, 0) * self.h.eval(a, 1);
        0.5 * tau * tau
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

type LagFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

/// A Lagrangian given by a closure.
#[derive(Clone)]
pub struct FnLagrangian {
    f: LagFn,
    autonomous: bool,
}

impl FnLagrangian {
    pub fn new<F>(autonomous: bool, f: F) -> Self
    where
        F: Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        FnLagrangian {
            f: Arc::new(f),
            autonomous,
        }
    }
}

impl Lagrangian for FnLagrangian {
    fn value(&self, t: f64, b: f64, db: f64, ddb: f64) -> f64 {
        (self.f)(t, b, db, ddb)
    }

    fn is_autonomous(&self) -> bool {
        self.autonomous
    }
}

/// Finite-difference steps for [`hamiltonian_numeric`].
///
/// The partials of `L` use a central difference with step
/// `partial_rel * max(|x|, 1)`. Every Lagrangian in this crate is quadratic in
/// `b'` and `b''`, where a central difference is exact at any step, so a wide
/// step only suppresses roundoff. The total derivative along the trajectory
/// uses a central difference with step `total`, improved by
/// `richardson_levels` rounds of Richardson extrapolation (order `2 + 2k`;
/// the stencil reaches `total * 2^k`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSteps {
    pub partial_rel: f64,
    pub total: f64,
    pub richardson_levels: u32,
}

impl Default for DiffSteps {
    fn default() -> Self {
        DiffSteps {
            partial_rel: 0.1,
            total: 2e-4,
            richardson_levels: 2,
        }
    }
}

impl DiffSteps {
    /// Plain second-order differences with a narrow relative partial step.
    pub fn plain() -> Self {
        DiffSteps {
            partial_rel: 1e-6,
            total: 1e-4,
            richardson_levels: 0,
        }
    }

    /// Distance from `t` the evaluation touches.
    pub fn reach(&self) -> f64 {
        self.total * f64::from(1u32 << self.richardson_levels)
    }
}

fn central(g: impl Fn(f64) -> f64, x: f64, rel: f64) -> f64 {
    let s = rel * x.abs().max(1.0);
    (g(x + s) - g(x - s)) / (2.0 * s)
}

/// `(dL/db', dL/db'')` at the trajectory's jet at `t`.
fn momenta(lag: &dyn Lagrangian, beta: &RadialMap, t: f64, rel: f64) -> (f64, f64) {
    let [b, db, ddb, _, _] = beta.derivs(t);
    let p1 = central(|x| lag.value(t, b, x, ddb), db, rel);
    let p2 = central(|x| lag.value(t, b, db, x), ddb, rel);
    (p1, p2)
}

/// Richardson-extrapolated central derivative of `g` at `t`.
fn total_derivative(g: impl Fn(f64) -> f64, t: f64, step: f64, levels: u32) -> f64 {
    let n = levels as usize + 1;
    let mut table: Vec<f64> = (0..n)
        .map(|k| {
            let s = step * f64::from(1u32 << k);
            (g(t + s) - g(t - s)) / (2.0 * s)
        })
        .collect();
    for level in 1..n {
        let factor = 4f64.powi(level as i32);
        for k in 0..n - level {
            table[k] = (factor * table[k] - table[k + 1]) / (factor - 1.0);
        }
    }
    table[0]
}

/// Hamiltonian at `t` along `beta` (jets through order 2 are read; the total
/// derivative of `dL/db''` is taken numerically).
pub fn hamiltonian_numeric(lag: &dyn Lagrangian, beta: &RadialMap, t: f64, steps: DiffSteps) -> Result<f64> {
    let reach = steps.reach();
    let dom = beta.domain();
    if !(t - reach > dom.lo_value() && t + reach < dom.hi_value()) {
        return Err(Error::Domain { what: "t", at: t });
    }
    let [b, db, ddb, _, _] = beta.derivs(t);
    let (p1, p2) = momenta(lag, beta, t, steps.partial_rel);
    let dp2 = total_derivative(
        |s| momenta(lag, beta, s, steps.partial_rel).1,
        t,
        steps.total,
        steps.richardson_levels,
    );
    Ok(db * (p1 - dp2) + ddb * p2 - lag.value(t, b, db, ddb))
}

/// The Hamiltonian of the log-variable Lagrangian at `m = 4`, evaluated on the
/// conformal relation `b' = h(b)` and divided by 2: `h^2 (1 - h'^2 + h h'')`.
pub fn hamiltonian_conformal_m4(h: &WarpingProfile, beta: f64) -> f64 {
    let [h0, h1, h2, _] = h.derivs(beta);
    h0 * h0 * (1.0 - h1 * h1 + h0 * h2)
}

/// Values of the Hamiltonian at `ts` and the largest deviation from the value
/// at `ts[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Drift {
    pub values: Vec<f64>,
    pub max_deviation: f64,
}

/// Conservation check of `H` along a trajectory.
pub fn hamiltonian_drift(lag: &dyn Lagrangian, beta: &RadialMap, ts: &[f64], steps: DiffSteps) -> Result<Drift> {
    if !lag.is_autonomous() {
        return Err(Error::Unsupported(
            "the Hamiltonian is only conserved for Lagrangians independent of t".into(),
        ));
    }
    if ts.is_empty() {
        return Err(Error::InvalidParameter("drift needs at least one sample point".into()));
    }
    let values = ts
        .iter()
        .map(|&t| hamiltonian_numeric(lag, beta, t, steps))
        .collect::<Result<Vec<_>>>()?;
    let h0 = values[0];
    let max_deviation = values.iter().fold(0.0_f64, |m, v| m.max((v - h0).abs()));
    Ok(Drift { values, max_deviation })
}
