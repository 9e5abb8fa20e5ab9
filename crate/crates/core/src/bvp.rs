//! Initial and boundary value problems for the fourth-order biharmonicity
//! ODE, started from a power series at the pole, and the first-order
//! conformal reduction `alpha' = h(alpha) / f`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::functionals::{biharmonic_residual, solve_fourth_derivative, Normalization};
use crate::map::{Jet4, RadialMap, UniformGrid};
use crate::ode::{dopri5, rk4, HermiteSpline, StepStats, Tolerances};
use crate::profile::{Bound, Interval, MapSpec};
use crate::series::Taylor;

pub const DEFAULT_EPS: f64 = 1e-3;
/// Highest power of `r` solved for in the pole expansion.
pub const SERIES_ORDER: usize = 17;
/// The truncation estimate above which a seed carries a precision warning.
pub const SERIES_WARN: f64 = 1e-10;
/// Relative distance kept from a blow-up radius such as `1/c^2`.
pub const BLOW_UP_MARGIN: f64 = 1e-6;

const SERIES_LEN: usize = 24;
type Series = Taylor<SERIES_LEN>;

/// Free data of a pole-regular solution: `alpha = a1 r + a3 r^3 + ...`,
/// evaluated at `r = eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSeed {
    pub a1: f64,
    pub a3: f64,
    pub eps: f64,
}

impl PoleSeed {
    pub fn new(a1: f64, a3: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if !a1.is_finite() || !a3.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite seed ({a1}, {a3})")));
        }
        Ok(PoleSeed { a1, a3, eps })
    }
}

/// Pole expansion of a regular solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleExpansion {
    /// `coefficients[k]` multiplies `r^k`, `k <= SERIES_ORDER`.
    pub coefficients: Vec<f64>,
    pub jet: Jet4,
    /// Size of the last retained term in any of the five jet entries.
    pub truncation_estimate: f64,
    /// Set when the estimate exceeds [`SERIES_WARN`] or a profile lacks exact
    /// high-order Taylor data.
    pub precision_warning: bool,
}

impl PoleExpansion {
    /// Jet of the truncated series at `r`.
    pub fn eval(&self, r: f64) -> [f64; 5] {
        let mut s = Series::zero();
        s.c[..self.coefficients.len()].copy_from_slice(&self.coefficients);
        s.eval_derivs::<5>(r)
    }
}

fn check_pole_profiles(spec: &MapSpec) -> Result<()> {
    let [f0, f1, _, _] = spec.f().derivs(0.0);
    let [h0, h1, _, _] = spec.h().derivs(0.0);
    if f0.abs() > 1e-8 || (f1 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(
            "domain profile must satisfy f(0) = 0, f'(0) = 1".into(),
        ));
    }
    if h0.abs() > 1e-8 || (h1 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(
            "target profile must satisfy h(0) = 0, h'(0) = 1".into(),
        ));
    }
    Ok(())
}

/// `(k-1)(k+m-1)(k-3)(k+m-3)`: the factor multiplying a new coefficient
/// `a_k` in the `r^(k-2)` term of the normalized residual.
fn indicial(k: usize, m: usize) -> f64 {
    let (k, m) = (k as f64, m as f64);
    (k - 1.0) * (k + m - 1.0) * (k - 3.0) * (k + m - 3.0)
}

struct PoleProfiles {
    m: f64,
    f: Series,
    df: Series,
    h: Series,
    dh: Series,
    ddh: Series,
}

impl PoleProfiles {
    fn new(spec: &MapSpec) -> Self {
        let f = spec.f().taylor::<SERIES_LEN>(0.0);
        let h = spec.h().taylor::<SERIES_LEN>(0.0);
        let dh = h.deriv();
        PoleProfiles {
            m: spec.m() as f64,
            f,
            df: f.deriv(),
            h,
            dh,
            ddh: dh.deriv(),
        }
    }

    /// `f^2 F'' + (m-1) f f' F' - (m-1)(h'^2 + h h'') F` with
    /// `F = [f^2 a'' + (m-1) f f' a' - (m-1) h h'] / f^2`.
    fn normalized_residual(&self, a: &Series) -> Series {
        let k = self.m - 1.0;
        let (da, dda) = (a.deriv(), a.deriv().deriv());
        let (ha, dha, ddha) = (a.compose(&self.h), a.compose(&self.dh), a.compose(&self.ddh));
        let g = self.f * self.f * dda + self.f * self.df * da * k - ha * dha * k;
        let f_over_r = self.f.shift_down(1);
        let big_f = g.shift_down(2) * (f_over_r * f_over_r).recip();
        let (d1, d2) = (big_f.deriv(), big_f.deriv().deriv());
        self.f * self.f * d2 + self.f * self.df * d1 * k - (dha * dha + ha * ddha) * big_f * k
    }
}

/// Coefficients `a_0..=a_SERIES_ORDER` of the regular solution with the given
/// `a1`, `a3`.
pub fn pole_coefficients(spec: &MapSpec, a1: f64, a3: f64) -> Result<Vec<f64>> {
    if !spec.is_identity_eigenmap() {
        return Err(Error::Unsupported("pole expansion needs lambda = m - 1".into()));
    }
    check_pole_profiles(spec)?;
    let p = PoleProfiles::new(spec);
    let mut a = Series::zero();
    a.c[1] = a1;
    a.c[3] = a3;
    for k in 2..=SERIES_ORDER {
        if k == 3 {
            continue;
        }
        let n = p.normalized_residual(&a);
        a.c[k] = -n.c[k - 2] / indicial(k, spec.m());
    }
    Ok(a.c[..=SERIES_ORDER].to_vec())
}

/// Jet at `seed.eps` of the regular solution through the pole.
pub fn pole_series(spec: &MapSpec, seed: PoleSeed) -> Result<PoleExpansion> {
    let coefficients = pole_coefficients(spec, seed.a1, seed.a3)?;
    let k = SERIES_ORDER;
    let last = coefficients[k].abs().max(coefficients[k - 1].abs());
    let truncation_estimate = (0..5)
        .map(|j| last * falling(k, j) * seed.eps.powi((k - j) as i32))
        .fold(0.0_f64, f64::max);
    let exact = spec.f().has_full_taylor() && spec.h().has_full_taylor();
    let mut exp = PoleExpansion {
        coefficients,
        jet: Jet4 {
            x: seed.eps,
            a: [0.0; 5],
        },
        truncation_estimate,
        precision_warning: !exact || truncation_estimate > SERIES_WARN,
    };
    exp.jet = Jet4::new(seed.eps, exp.eval(seed.eps))?;
    Ok(exp)
}

fn falling(k: usize, j: usize) -> f64 {
    (0..j).map(|i| (k - i) as f64).product()
}

/// Integrated solution: nodes with `[alpha, alpha', alpha'', alpha''', alpha'''']`
/// and the expanded residual at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub states: Vec<[f64; 5]>,
    pub residual: Vec<f64>,
    pub stats: StepStats,
}

pub const TRAJECTORY_CSV_HEADER: &str = "r,alpha,dalpha,ddalpha,dddalpha,residual";

impl Trajectory {
    fn from_nodes(spec: &MapSpec, r: Vec<f64>, states: Vec<[f64; 5]>, stats: StepStats) -> Result<Self> {
        let residual = r
            .iter()
            .zip(&states)
            .map(|(&x, s)| biharmonic_residual(spec, &Jet4 { x, a: *s }, Normalization::Verbatim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            r,
            states,
            residual,
            stats,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn end(&self) -> (f64, [f64; 5]) {
        (*self.r.last().unwrap(), *self.states.last().unwrap())
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Spacing when the nodes are equispaced (to `1e-9` relative).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.r.len() < 2 {
            return None;
        }
        let h = (self.r[self.r.len() - 1] - self.r[0]) / (self.r.len() - 1) as f64;
        self.r
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
            .then_some(h)
    }

    /// Piecewise Hermite interpolant of the nodes (degree 9, exact jets at
    /// the nodes), defined on `[r_first, r_last]`.
    pub fn to_map(&self, label: impl Into<String>) -> Result<RadialMap> {
        let spline = HermiteSpline::<5>::new(self.r.clone(), self.states.clone())?;
        let domain = Interval::closed(spline.start(), spline.end());
        Ok(RadialMap::new(label, domain, false, move |x| spline.eval(x)))
    }

    /// Interpolate onto a uniform grid inside the node range.
    pub fn resample(&self, spec: &MapSpec, grid: UniformGrid) -> Result<Trajectory> {
        let (lo, hi) = (self.r[0], *self.r.last().unwrap());
        if grid.a < lo || grid.b > hi {
            return Err(Error::InvalidArgument(format!(
                "grid [{}, {}] exceeds the trajectory [{lo}, {hi}]",
                grid.a, grid.b
            )));
        }
        let spline = HermiteSpline::<5>::new(self.r.clone(), self.states.clone())?;
        let r: Vec<f64> = grid.points().collect();
        let states = r.iter().map(|&x| spline.eval(x)).collect();
        Trajectory::from_nodes(spec, r, states, self.stats)
    }

    /// CSV with [`TRAJECTORY_CSV_HEADER`], 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for ((r, s), res) in self.r.iter().zip(&self.states).zip(&self.residual) {
            let _ = writeln!(
                out,
                "{r:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{res:.16e}",
                s[0], s[1], s[2], s[3]
            );
        }
        out
    }
}

fn fourth_order_rhs(spec: &MapSpec) -> impl FnMut(f64, &[f64; 4]) -> Result<[f64; 4]> + '_ {
    move |r, y| {
        let a4 = solve_fourth_derivative(spec, r, *y).map_err(|e| match e {
            Error::Domain { what: "r", at } => Error::Singularity { at },
            other => other,
        })?;
        Ok([y[1], y[2], y[3], a4])
    }
}

fn solution_to_trajectory(spec: &MapSpec, sol: crate::ode::OdeSolution<4>) -> Result<Trajectory> {
    let states = sol
        .y
        .iter()
        .zip(&sol.dy)
        .map(|(y, dy)| [y[0], y[1], y[2], y[3], dy[3]])
        .collect();
    Trajectory::from_nodes(spec, sol.t, states, sol.stats)
}

/// Adaptive integration of the biharmonicity ODE from `jet0` to `r_end`;
/// every accepted step becomes a node.
pub fn integrate_ode(spec: &MapSpec, jet0: &Jet4, r_end: f64, tol: &Tolerances) -> Result<Trajectory> {
    integrate_with_stops(spec, jet0, r_end, tol, None)
}

/// As [`integrate_ode`] but with nodes only at `stops` (plus both ends).
pub fn integrate_ode_at(
    spec: &MapSpec,
    jet0: &Jet4,
    stops: &[f64],
    r_end: f64,
    tol: &Tolerances,
) -> Result<Trajectory> {
    integrate_with_stops(spec, jet0, r_end, tol, Some(stops))
}

/// Regular solution through the pole: the truncated series on `[0, eps]` and
/// the integrated trajectory beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSolution {
    pub expansion: PoleExpansion,
    pub trajectory: Trajectory,
}

impl PoleSolution {
    pub fn eps(&self) -> f64 {
        self.expansion.jet.x
    }

    /// Curve on `[0, r_end]` that evaluates the series below `eps`.
    pub fn to_map(&self, label: impl Into<String>) -> Result<RadialMap> {
        let spline = HermiteSpline::<5>::new(self.trajectory.r.clone(), self.trajectory.states.clone())?;
        let expansion = self.expansion.clone();
        let eps = self.eps();
        let domain = Interval::new(Bound::Closed(0.0), Bound::Closed(spline.end()));
        Ok(RadialMap::new(label, domain, true, move |r| {
            if r < eps {
                expansion.eval(r)
            } else {
                spline.eval(r)
            }
        }))
    }
}

/// Series seed at `seed.eps`, then adaptive integration to `r_end`.
pub fn solve_from_pole(spec: &MapSpec, seed: PoleSeed, r_end: f64, tol: &Tolerances) -> Result<PoleSolution> {
    let expansion = pole_series(spec, seed)?;
    let trajectory = integrate_ode(spec, &expansion.jet, r_end, tol)?;
    Ok(PoleSolution { expansion, trajectory })
}

/// Classical RK4 with `steps` uniform steps; used for convergence-order
/// studies.
pub fn integrate_ode_rk4(spec: &MapSpec, jet0: &Jet4, r_end: f64, steps: usize) -> Result<Trajectory> {
    if !spec.is_identity_eigenmap() {
        return Err(Error::Unsupported(
            "the ODE is only available for lambda = m - 1".into(),
        ));
    }
    let y0 = [jet0.a[0], jet0.a[1], jet0.a[2], jet0.a[3]];
    let sol = rk4(fourth_order_rhs(spec), jet0.x, y0, r_end, steps)?;
    solution_to_trajectory(spec, sol)
}

fn integrate_with_stops(
    spec: &MapSpec,
    jet0: &Jet4,
    r_end: f64,
    tol: &Tolerances,
    stops: Option<&[f64]>,
) -> Result<Trajectory> {
    if !spec.is_identity_eigenmap() {
        return Err(Error::Unsupported(
            "the ODE is only available for lambda = m - 1".into(),
        ));
    }
    let y0 = [jet0.a[0], jet0.a[1], jet0.a[2], jet0.a[3]];
    let sol = dopri5(fourth_order_rhs(spec), jet0.x, y0, r_end, tol, stops)?;
    solution_to_trajectory(spec, sol)
}

/// Second boundary condition at `r = b`, alongside `alpha(b) = alpha_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// `alpha'(b) = dalpha_b`.
    Clamped { alpha_b: f64, dalpha_b: f64 },
    /// `alpha'(b) = h(alpha_b) / f(b)`: the slope of the conformal family.
    ConformalSlope { alpha_b: f64 },
}

impl BoundaryCondition {
    fn targets(&self, spec: &MapSpec, b: f64) -> (f64, f64) {
        match *self {
            BoundaryCondition::Clamped { alpha_b, dalpha_b } => (alpha_b, dalpha_b),
            BoundaryCondition::ConformalSlope { alpha_b } => (alpha_b, spec.h().eval(alpha_b, 0) / spec.f().eval(b, 0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Factor applied to the Newton step after a failed trial.
    pub damping: f64,
    pub max_halvings: usize,
    /// Relative forward-difference step for the Jacobian.
    pub fd_rel: f64,
    pub integrator: Tolerances,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            tol: 1e-9,
            max_iterations: 50,
            damping: 0.5,
            max_halvings: 30,
            fd_rel: 1e-6,
            integrator: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub seed: PoleSeed,
    pub trajectory: Trajectory,
    pub iterations: usize,
    pub residual: f64,
}

fn mismatch(spec: &MapSpec, b: f64, targets: (f64, f64), seed: PoleSeed, tol: &Tolerances) -> Result<[f64; 2]> {
    let jet = pole_series(spec, seed)?.jet;
    let traj = integrate_ode_at(spec, &jet, &[], b, tol)?;
    let (_, s) = traj.end();
    Ok([s[0] - targets.0, s[1] - targets.1])
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Damped Newton iteration on `(a1, a3)` so that the solution through the
/// pole meets the boundary condition at `b`.
pub fn shoot_dirichlet(
    spec: &MapSpec,
    b: f64,
    bc: BoundaryCondition,
    guess: PoleSeed,
    opts: &ShootingOptions,
) -> Result<ShootingResult> {
    if !(b > guess.eps) || !spec.f().domain().interior_contains(b) {
        return Err(Error::InvalidParameter(format!(
            "boundary radius {b} is not inside the domain"
        )));
    }
    let targets = bc.targets(spec, b);
    if !targets.0.is_finite() || !targets.1.is_finite() {
        return Err(Error::InvalidParameter("boundary data must be finite".into()));
    }
    let tol = &opts.integrator;
    let mut seed = guess;
    let mut res = mismatch(spec, b, targets, seed, tol)?;
    let mut iterations = 0;
    let stalled = |seed: &PoleSeed, res: [f64; 2], iterations| Error::NoConvergence {
        iterations,
        best_residual: norm2(res),
        best: (seed.a1, seed.a3),
    };
    while norm2(res) >= opts.tol {
        if iterations == opts.max_iterations {
            return Err(stalled(&seed, res, iterations));
        }
        iterations += 1;
        let p = [seed.a1, seed.a3];
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let step = opts.fd_rel * p[j].abs().max(1.0);
            let mut q = p;
            q[j] += step;
            let shifted = mismatch(
                spec,
                b,
                targets,
                PoleSeed {
                    a1: q[0],
                    a3: q[1],
                    ..seed
                },
                tol,
            )?;
            for i in 0..2 {
                jac[i][j] = (shifted[i] - res[i]) / step;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(stalled(&seed, res, iterations));
        }
        let delta = [
            -(jac[1][1] * res[0] - jac[0][1] * res[1]) / det,
            -(-jac[1][0] * res[0] + jac[0][0] * res[1]) / det,
        ];
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = PoleSeed {
                a1: p[0] + scale * delta[0],
                a3: p[1] + scale * delta[1],
                ..seed
            };
            match mismatch(spec, b, targets, trial, tol) {
                Ok(r) if norm2(r) < norm2(res) => {
                    accepted = Some((trial, r));
                    break;
                }
                Ok(_) => {}
                Err(e) if e.is_numerical() => {}
                Err(e) => return Err(e),
            }
            scale *= opts.damping;
        }
        match accepted {
            Some((s, r)) => {
                seed = s;
                res = r;
            }
            None => return Err(stalled(&seed, res, iterations)),
        }
    }
    let jet = pole_series(spec, seed)?.jet;
    let trajectory = integrate_ode(spec, &jet, b, tol)?;
    Ok(ShootingResult {
        seed,
        trajectory,
        iterations,
        residual: norm2(res),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// First increment of the homotopy parameter `s` in `[0, 1]`.
    pub initial_step: f64,
    pub min_step: f64,
    /// Growth factor after a successful solve.
    pub grow: f64,
    /// Newton iterations allowed per continuation step.
    pub step_iterations: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            initial_step: 1.0 / 6.0,
            min_step: 1e-4,
            grow: 1.5,
            step_iterations: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub result: ShootingResult,
    /// Converged `(s, seed)` pairs, starting with `s = 0`.
    pub path: Vec<(f64, PoleSeed)>,
    /// Shooting solves attempted, failures included.
    pub solves: usize,
}

/// Shooting along a homotopy of boundary conditions `family(s)`, `s` from 0
/// to 1. `start` must converge for `family(0)`. Each step is predicted by the
/// secant through the last two converged seeds; failed steps are halved.
pub fn shoot_continuation<B>(
    spec: &MapSpec,
    b: f64,
    family: B,
    start: PoleSeed,
    opts: &ShootingOptions,
    copts: &ContinuationOptions,
) -> Result<ContinuationResult>
where
    B: Fn(f64) -> BoundaryCondition,
{
    if !(copts.initial_step > 0.0) || !(copts.min_step > 0.0) || !(copts.grow >= 1.0) {
        return Err(Error::InvalidParameter("continuation steps must be positive".into()));
    }
    let first = shoot_dirichlet(spec, b, family(0.0), start, opts)?;
    let mut solves = 1;
    let mut path = vec![(0.0, first.seed)];
    let mut last = first;
    let mut s = 0.0;
    let mut ds = copts.initial_step.min(1.0);
    let step_opts = ShootingOptions {
        max_iterations: copts.step_iterations,
        ..*opts
    };
    while s < 1.0 {
        let next = (s + ds).min(1.0);
        let guess = match path.len() {
            1 => last.seed,
            n => {
                let (s0, p0) = path[n - 2];
                let (s1, p1) = path[n - 1];
                let w = (next - s1) / (s1 - s0);
                PoleSeed {
                    a1: p1.a1 + w * (p1.a1 - p0.a1),
                    a3: p1.a3 + w * (p1.a3 - p0.a3),
                    ..p1
                }
            }
        };
        solves += 1;
        match shoot_dirichlet(spec, b, family(next), guess, &step_opts) {
            Ok(r) => {
                path.push((next, r.seed));
                last = r;
                s = next;
                ds *= copts.grow;
            }
            Err(e) if e.is_numerical() => {
                ds /= 2.0;
                if ds < copts.min_step {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ContinuationResult {
        result: last,
        path,
        solves,
    })
}

/// Pole series of the conformal relation `f alpha' = h(alpha)` with slope
/// `a1` at the pole.
pub fn conformal_coefficients(spec: &MapSpec, a1: f64) -> Result<Vec<f64>> {
    check_pole_profiles(spec)?;
    let f = spec.f().taylor::<SERIES_LEN>(0.0);
    let h = spec.h().taylor::<SERIES_LEN>(0.0);
    let mut a = Series::zero();
    a.c[1] = a1;
    for k in 2..=SERIES_ORDER {
        let defect = f * a.deriv() - a.compose(&h);
        a.c[k] = -defect.c[k] / (k as f64 - 1.0);
    }
    Ok(a.c[..=SERIES_ORDER].to_vec())
}

/// Jet of the conformal solution through `(r0, alpha0)`, obtained by
/// differentiating `f alpha' = h(alpha)`.
pub fn conformal_jet(spec: &MapSpec, r0: f64, alpha0: f64) -> Result<[f64; 5]> {
    let fd = spec.f().derivs(r0);
    if fd[0] == 0.0 || !spec.f().domain().interior_contains(r0) {
        return Err(Error::Domain { what: "r", at: r0 });
    }
    let f = Taylor::<5>::from_derivatives(&fd);
    let h = Taylor::<5>::from_derivatives(&spec.h().derivs(alpha0));
    let mut a = Taylor::<5>::constant(alpha0);
    for k in 0..4 {
        let known = (f * a.deriv()).c[k];
        let target = a.compose(&h).c[k];
        a.c[k + 1] = (target - known) / (fd[0] * (k + 1) as f64);
    }
    Ok(std::array::from_fn(|i| a.derivative(i)))
}

#[derive(Debug, Clone)]
pub struct ConformalSolution {
    pub map: RadialMap,
    /// `alpha` left the target domain before `r_end`.
    pub truncated: bool,
    /// Last radius reached.
    pub end: f64,
    pub nodes: Vec<f64>,
}

/// Integrate `alpha' = h(alpha) / f(r)` on `[0, r_end]` with slope
/// `initial_slope` at the pole. The series is used up to `DEFAULT_EPS`, then
/// the ODE is integrated through `nodes` equispaced radii; the returned map
/// interpolates exact jets at those radii.
pub fn solve_conformal(
    spec: &MapSpec,
    initial_slope: f64,
    r_end: f64,
    nodes: usize,
    tol: &Tolerances,
) -> Result<ConformalSolution> {
    let eps = DEFAULT_EPS;
    if !(r_end > eps) || !spec.f().domain().interior_contains(r_end) {
        return Err(Error::InvalidParameter(format!(
            "r_end = {r_end} must lie inside the domain, beyond {eps}"
        )));
    }
    if nodes < 2 {
        return Err(Error::InvalidParameter("need at least 2 nodes".into()));
    }
    let coeffs = conformal_coefficients(spec, initial_slope)?;
    let mut series = Series::zero();
    series.c[..coeffs.len()].copy_from_slice(&coeffs);

    let grid = UniformGrid::new(eps, r_end, nodes)?;
    let target = spec.h().domain();
    let mut xs = vec![eps];
    let mut jets = vec![series.eval_derivs::<5>(eps)];
    let mut alpha = jets[0][0];
    let mut truncated = false;
    let rhs = |r: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
        let f = spec.f().eval(r, 0);
        if f == 0.0 {
            return Err(Error::Singularity { at: r });
        }
        Ok([spec.h().eval(y[0], 0) / f])
    };
    for i in 1..grid.nodes {
        let (r0, r1) = (grid.point(i - 1), grid.point(i));
        let sol = dopri5(rhs, r0, [alpha], r1, tol, Some(&[]))?;
        let next = sol.last().1[0];
        if !target.interior_contains(next) {
            truncated = true;
            break;
        }
        alpha = next;
        xs.push(r1);
        jets.push(conformal_jet(spec, r1, alpha)?);
    }
    let end = *xs.last().unwrap();
    let spline = if xs.len() >= 2 {
        Some(HermiteSpline::<5>::new(xs.clone(), jets)?)
    } else {
        None
    };
    let domain = Interval::new(Bound::Closed(0.0), Bound::Closed(end));
    let map = RadialMap::new("conformal", domain, true, move |r| match &spline {
        Some(s) if r >= eps => s.eval(r),
        _ => series.eval_derivs::<5>(r),
    });
    Ok(ConformalSolution {
        map,
        truncated,
        end,
        nodes: xs,
    })
}
