//! Equivariant second variation at maps out of `R^4` written in the log
//! variable `t`, the associated fourth-order operator, and certification of
//! positivity through the bottom of a discretized Rayleigh quotient.
//!
//! Variations live on a uniform `t` grid and are clamped: the first and last
//! two nodes are zero, and the field is extended by zero when a stencil
//! reaches past the grid.

use std::fmt;

use crate::catalog::{catalog_solution, CaseId, CaseParams};
use crate::error::{Error, Result};
use crate::logvar::to_log_variable;
use crate::map::{GridFunction, RadialMap, UniformGrid};
use crate::profile::WarpingProfile;
use crate::quadrature::simpson_samples;

/// Positivity threshold separating a genuine bottom from numerical zero.
pub const TOL_POS: f64 = 1e-8;
pub const MIN_NODES: usize = 64;
pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 500;
pub const CERTIFICATE_CSV_HEADER: &str = "case,interval_lo,interval_hi,nodes,min_rayleigh,verdict";

/// Which quadratic form to use.
#[derive(Debug, Clone)]
pub enum StabilityCase {
    /// Conformal solutions into `S^4(d^2)`, `h = sin(d x) / d`.
    Sphere { d: f64 },
    /// Conformal solutions into `H^4(-d^2)`, `h = sinh(d x) / d`.
    Hyperbolic { d: f64 },
    /// Any target; uses the form valid at a generic critical point.
    Generic(WarpingProfile),
    /// `q = 0`: the form `int (V'' + 2V')^2`.
    Flat,
}

impl StabilityCase {
    pub fn label(&self) -> String {
        match self {
            StabilityCase::Sphere { d } => format!("sphere(d={d})"),
            StabilityCase::Hyperbolic { d } => format!("hyperbolic(d={d})"),
            StabilityCase::Generic(h) => format!("generic({})", h.label()),
            StabilityCase::Flat => "flat".into(),
        }
    }

    fn target(&self) -> Result<Option<WarpingProfile>> {
        Ok(match self {
            StabilityCase::Sphere { d } => Some(WarpingProfile::sphere(*d)?),
            StabilityCase::Hyperbolic { d } => Some(WarpingProfile::hyperbolic(*d)?),
            StabilityCase::Generic(h) => Some(h.clone()),
            StabilityCase::Flat => None,
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            StabilityCase::Sphere { d } | StabilityCase::Hyperbolic { d } if !(*d > 0.0 && d.is_finite()) => {
                Err(Error::InvalidParameter(format!("d must be positive, got {d}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for StabilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Stability case and `beta(t)` for a catalog solution out of `R^4`. C1B and
/// C1C get the closed-form cases, other entries the generic form.
pub fn catalog_beta(case_id: CaseId, params: CaseParams) -> Result<(StabilityCase, RadialMap)> {
    let entry = catalog_solution(case_id, params)?;
    let map = entry
        .map
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("{case_id} has no solution curve")))?;
    let beta = to_log_variable(entry.spec.f(), map)?;
    let case = match case_id {
        CaseId::C1B => StabilityCase::Sphere { d: params.d },
        CaseId::C1C => StabilityCase::Hyperbolic { d: params.d },
        _ => StabilityCase::Generic(entry.spec.h().clone()),
    };
    Ok((case, beta))
}

/// `[q, q', q'']` at `x` for `q = h h'`.
fn q_derivs(h: &WarpingProfile, x: f64) -> [f64; 3] {
    let [h0, h1, h2, h3] = h.derivs(x);
    [h0 * h1, h1 * h1 + h0 * h2, 3.0 * h1 * h2 + h0 * h3]
}

/// Zeroth-order term of the conformal form in the two closed-form cases.
pub fn closed_form_zeroth(case: &StabilityCase, beta: f64) -> Option<f64> {
    match *case {
        StabilityCase::Sphere { d } => {
            let (s, c) = (d * beta).sin_cos();
            Some(24.0 * c * s * s * (1.0 - c))
        }
        StabilityCase::Hyperbolic { d } => {
            let (s, c) = ((d * beta).sinh(), (d * beta).cosh());
            Some(24.0 * c * s * s * (c - 1.0))
        }
        _ => None,
    }
}

/// Selects how the zeroth-order coefficient is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZerothTerm {
    /// Trigonometric or hyperbolic closed form where one exists.
    ClosedForm,
    /// `6 q''(beta) h(beta) (h'(beta) - 1)` from the derivatives of `h`.
    QForm,
}

/// Coefficients `(q'(beta), Z)` of the form `(V'' + 2V' - 3q'V)^2 + Z V^2`.
fn form_coefficients(case: &StabilityCase, h: Option<&WarpingProfile>, b: &[f64; 5], path: ZerothTerm) -> (f64, f64) {
    let Some(h) = h else { return (0.0, 0.0) };
    let [q, q1, q2] = q_derivs(h, b[0]);
    let z = match case {
        StabilityCase::Generic(_) => -3.0 * q2 * (b[2] + 2.0 * b[1] - 3.0 * q),
        _ => match (path, closed_form_zeroth(case, b[0])) {
            (ZerothTerm::ClosedForm, Some(z)) => z,
            _ => {
                let [h0, h1, ..] = h.derivs(b[0]);
                6.0 * q2 * h0 * (h1 - 1.0)
            }
        },
    };
    (q1, z)
}

/// A clamped variation on a uniform `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    grid: GridFunction,
}

impl VariationField {
    pub fn new(grid: GridFunction) -> Result<Self> {
        let n = grid.len();
        if n < 5 {
            return Err(Error::InvalidParameter(format!(
                "variation needs at least 5 nodes, got {n}"
            )));
        }
        let v = &grid.values;
        if v[0] != 0.0 || v[1] != 0.0 || v[n - 2] != 0.0 || v[n - 1] != 0.0 {
            return Err(Error::InvalidArgument(
                "variation must vanish on the first and last two nodes".into(),
            ));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("variation has non-finite values".into()));
        }
        Ok(VariationField { grid })
    }

    /// Samples `g` on `nodes` points of `[lo, hi]` and zeroes the two end
    /// nodes on each side.
    pub fn from_fn(lo: f64, hi: f64, nodes: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        let mut grid = GridFunction::sample(lo, hi, nodes, g)?;
        let n = grid.len();
        if n < 5 {
            return Err(Error::InvalidParameter(format!(
                "variation needs at least 5 nodes, got {n}"
            )));
        }
        for i in [0, 1, n - 2, n - 1] {
            grid.values[i] = 0.0;
        }
        VariationField::new(grid)
    }

    /// `exp(-((t - center) / width)^2)`, clamped.
    pub fn gaussian_bump(lo: f64, hi: f64, nodes: usize, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bump width must be positive, got {width}"
            )));
        }
        VariationField::from_fn(lo, hi, nodes, |t| (-((t - center) / width).powi(2)).exp())
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.grid.values.iter().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut grid = self.grid.clone();
        grid.values.iter_mut().for_each(|v| *v *= s);
        VariationField { grid }
    }

    fn value(&self, i: isize) -> f64 {
        if i < 0 || i as usize >= self.grid.len() {
            0.0
        } else {
            self.grid.values[i as usize]
        }
    }

    /// Central `(V', V'')` at node `i`.
    fn d12(&self, i: usize) -> (f64, f64) {
        let h = self.grid.step;
        let i = i as isize;
        let (vm, v0, vp) = (self.value(i - 1), self.value(i), self.value(i + 1));
        ((vp - vm) / (2.0 * h), (vp - 2.0 * v0 + vm) / (h * h))
    }
}

fn beta_jets(beta: &RadialMap, v: &VariationField) -> Result<Vec<[f64; 5]>> {
    let g = v.grid();
    let dom = beta.domain();
    if !dom.contains(g.start) || !dom.contains(g.end()) {
        return Err(Error::InvalidParameter(format!(
            "variation interval [{}, {}] is not inside the domain {dom} of beta",
            g.start,
            g.end()
        )));
    }
    let jets: Vec<[f64; 5]> = (0..g.len()).map(|i| beta.derivs(g.x(i))).collect();
    if let Some(i) = jets.iter().position(|b| b.iter().any(|x| !x.is_finite())) {
        return Err(Error::Domain {
            what: "beta",
            at: g.x(i),
        });
    }
    Ok(jets)
}

fn quadratic_form_parts(
    case: &StabilityCase,
    beta: &RadialMap,
    v: &VariationField,
    path: ZerothTerm,
    with_square: bool,
) -> Result<f64> {
    case.validate()?;
    let h = case.target()?;
    let jets = beta_jets(beta, v)?;
    let vals = &v.grid().values;
    let integrand: Vec<f64> = (0..v.len())
        .map(|i| {
            let (q1, z) = form_coefficients(case, h.as_ref(), &jets[i], path);
            let zeroth = z * vals[i] * vals[i];
            if !with_square {
                return zeroth;
            }
            let (d1, d2) = v.d12(i);
            let a = d2 + 2.0 * d1 - 3.0 * q1 * vals[i];
            a * a + zeroth
        })
        .collect();
    Ok(simpson_samples(&integrand, v.grid().step))
}

fn quadratic_form(case: &StabilityCase, beta: &RadialMap, v: &VariationField, path: ZerothTerm) -> Result<f64> {
    quadratic_form_parts(case, beta, v, path, true)
}

/// Simpson quadrature of the zeroth-order part `Z V^2` alone.
pub fn zeroth_order_integral(
    case: &StabilityCase,
    beta: &RadialMap,
    v: &VariationField,
    path: ZerothTerm,
) -> Result<f64> {
    quadratic_form_parts(case, beta, v, path, false)
}

/// Simpson quadrature of the second-variation integrand at a conformal
/// solution `beta`, with the closed-form zeroth-order term where available.
/// For [`StabilityCase::Generic`] this is [`general_second_variation`].
pub fn second_variation_form(case: &StabilityCase, beta: &RadialMap, v: &VariationField) -> Result<f64> {
    quadratic_form(case, beta, v, ZerothTerm::ClosedForm)
}

/// As [`second_variation_form`] with an explicit choice of zeroth-order path.
pub fn second_variation_form_with(
    case: &StabilityCase,
    beta: &RadialMap,
    v: &VariationField,
    path: ZerothTerm,
) -> Result<f64> {
    quadratic_form(case, beta, v, path)
}

/// Second variation at a generic critical point `beta` of the log-variable
/// bienergy with target `h`: the zeroth-order term uses the actual
/// `beta''`, `beta'` rather than the conformal substitution.
pub fn general_second_variation(h: &WarpingProfile, beta: &RadialMap, v: &VariationField) -> Result<f64> {
    quadratic_form(&StabilityCase::Generic(h.clone()), beta, v, ZerothTerm::QForm)
}

/// The fourth-order operator whose pairing with `V` reproduces the form:
/// `I(V) = V'''' - (4 + 6q')V'' + (9q'^2 - 3q''(beta'' - 3q))V`. In the
/// closed-form cases `beta'' = q(beta)` is substituted.
pub fn jacobi_operator_apply(case: &StabilityCase, beta: &RadialMap, v: &VariationField) -> Result<GridFunction> {
    if v.len() < 9 {
        return Err(Error::InvalidParameter(format!(
            "fourth differences need at least 9 nodes, got {}",
            v.len()
        )));
    }
    case.validate()?;
    let h = case.target()?;
    let jets = beta_jets(beta, v)?;
    let step = v.grid().step;
    let h4 = step.powi(4);
    let values = (0..v.len())
        .map(|i| {
            let k = i as isize;
            let d4 =
                (v.value(k - 2) - 4.0 * v.value(k - 1) + 6.0 * v.value(k) - 4.0 * v.value(k + 1) + v.value(k + 2)) / h4;
            let (_, d2) = v.d12(i);
            let (q1, zeroth) = match &h {
                None => (0.0, 0.0),
                Some(h) => {
                    let b = &jets[i];
                    let [q, q1, q2] = q_derivs(h, b[0]);
                    let ddbeta = match case {
                        StabilityCase::Generic(_) => b[2],
                        _ => q,
                    };
                    (q1, 9.0 * q1 * q1 - 3.0 * q2 * (ddbeta - 3.0 * q))
                }
            };
            d4 - (4.0 + 6.0 * q1) * d2 + zeroth * v.value(k)
        })
        .collect();
    GridFunction::new(v.grid().start, step, values)
}

/// `|int V I(V) - Q(V)| / |Q(V)|` with both sides on the grid of `v`.
pub fn duality_error(case: &StabilityCase, beta: &RadialMap, v: &VariationField) -> Result<f64> {
    let iv = jacobi_operator_apply(case, beta, v)?;
    let pairing: Vec<f64> = iv.values.iter().zip(&v.grid().values).map(|(a, b)| a * b).collect();
    let lhs = simpson_samples(&pairing, v.grid().step);
    let form = second_variation_form(case, beta, v)?;
    Ok((lhs - form).abs() / form.abs().max(f64::MIN_POSITIVE))
}

/// Symmetric pentadiagonal matrix: `diag`, first and second superdiagonals.
#[derive(Debug, Clone)]
struct Penta {
    d: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
}

impl Penta {
    fn zeros(n: usize) -> Self {
        Penta {
            d: vec![0.0; n],
            e1: vec![0.0; n],
            e2: vec![0.0; n],
        }
    }

    fn len(&self) -> usize {
        self.d.len()
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        match b - a {
            0 => self.d[a] += v,
            1 => self.e1[a] += v,
            2 => self.e2[a] += v,
            _ => unreachable!("outside the band"),
        }
    }

    /// `L D L^T` of `self - shift I` without pivoting: unit lower factor
    /// subdiagonals and pivots.
    fn ldl(&self, shift: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut piv = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            // Row i of L: l2[i] = L[i][i-2], l1[i] = L[i][i-1].
            if i >= 2 {
                l2[i] = self.e2[i - 2] / piv[i - 2];
            }
            if i >= 1 {
                let mut s = self.e1[i - 1];
                if i >= 2 {
                    s -= l2[i] * l1[i - 1] * piv[i - 2];
                }
                l1[i] = s / piv[i - 1];
            }
            let mut p = self.d[i] - shift;
            if i >= 1 {
                p -= l1[i] * l1[i] * piv[i - 1];
            }
            if i >= 2 {
                p -= l2[i] * l2[i] * piv[i - 2];
            }
            piv[i] = p;
        }
        (l1, l2, piv)
    }

    /// Number of eigenvalues below `shift` (Sylvester inertia).
    fn count_below(&self, shift: f64) -> usize {
        self.ldl(shift).2.iter().filter(|p| **p < 0.0).count()
    }

    fn gershgorin_low(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut off = 0.0;
                for (k, e) in [(1usize, &self.e1), (2, &self.e2)] {
                    if i + k < n {
                        off += e[i].abs();
                    }
                    if i >= k {
                        off += e[i - k].abs();
                    }
                }
                self.d[i] - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn ldl_solve(l1: &[f64], l2: &[f64], piv: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = b.to_vec();
    for i in 0..n {
        if i >= 1 {
            y[i] -= l1[i] * y[i - 1];
        }
        if i >= 2 {
            y[i] -= l2[i] * y[i - 2];
        }
    }
    for i in 0..n {
        y[i] /= piv[i];
    }
    for i in (0..n).rev() {
        if i + 1 < n {
            y[i] -= l1[i + 1] * y[i + 1];
        }
        if i + 2 < n {
            y[i] -= l2[i + 2] * y[i + 2];
        }
    }
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Discrete form on the clamped nodal space, divided by the (diagonal) Gram
/// matrix. Unknowns are the nodes `2..n-2`.
fn assemble(case: &StabilityCase, beta: &RadialMap, lo: f64, hi: f64, nodes: usize) -> Result<Penta> {
    case.validate()?;
    let grid = UniformGrid::new(lo, hi, nodes)?;
    let h = grid.step();
    let target = case.target()?;
    let dom = beta.domain();
    if !dom.contains(lo) || !dom.contains(hi) {
        return Err(Error::InvalidParameter(format!(
            "interval [{lo}, {hi}] is not inside the domain {dom} of beta"
        )));
    }
    let unknowns = nodes - 4;
    let mut m = Penta::zeros(unknowns);
    let idx = |node: usize| (2..nodes - 2).contains(&node).then(|| node - 2);
    for i in 1..nodes - 1 {
        let b = beta.derivs(grid.point(i));
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain {
                what: "beta",
                at: grid.point(i),
            });
        }
        let (q1, z) = form_coefficients(case, target.as_ref(), &b, ZerothTerm::ClosedForm);
        let row = [
            (i - 1, 1.0 / (h * h) - 1.0 / h),
            (i, -2.0 / (h * h) - 3.0 * q1),
            (i + 1, 1.0 / (h * h) + 1.0 / h),
        ];
        for &(a, ca) in &row {
            let Some(ja) = idx(a) else { continue };
            for &(b, cb) in &row {
                if let Some(jb) = idx(b) {
                    if ja <= jb {
                        m.add(ja, jb, ca * cb);
                    }
                }
            }
        }
        if let Some(j) = idx(i) {
            m.add(j, j, z);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighEstimate {
    pub nodes: usize,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The discrete form has a negative direction.
    pub indefinite: bool,
}

fn bottom_eigenvalue(m: &Penta) -> (f64, usize, bool, bool) {
    let n = m.len();
    let (l1, l2, piv) = m.ldl(0.0);
    if piv.iter().any(|p| !(*p > 0.0)) {
        // Not positive definite: bisect on the inertia count.
        let mut a = m.gershgorin_low().min(0.0) - 1.0;
        let mut b = 0.0;
        let mut it = 0;
        while b - a > EIGEN_TOL * a.abs().max(1.0) && it < 200 {
            let mid = 0.5 * (a + b);
            if m.count_below(mid) > 0 {
                b = mid;
            } else {
                a = mid;
            }
            it += 1;
        }
        return (0.5 * (a + b), it, true, true);
    }
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let s = (i + 1) as f64 / (n + 1) as f64;
            (std::f64::consts::PI * s).sin() + 1e-3 * s
        })
        .collect();
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    // `1 / (x^T M^-1 x)` rather than `x^T M x`: the latter loses digits to
    // the large top of the spectrum.
    let mut lambda = f64::INFINITY;
    for it in 1..=EIGEN_MAX_ITERATIONS {
        let mut y = ldl_solve(&l1, &l2, &piv, &x);
        let next = 1.0 / dot(&x, &y);
        let norm = dot(&y, &y).sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
        if (next - lambda).abs() <= EIGEN_TOL * next.abs() {
            return (next, it, true, false);
        }
        lambda = next;
    }
    (lambda, EIGEN_MAX_ITERATIONS, false, false)
}

/// Bottom of the discrete Rayleigh quotient at a single resolution.
pub fn rayleigh_bottom(
    case: &StabilityCase,
    beta: &RadialMap,
    interval: (f64, f64),
    nodes: usize,
) -> Result<RayleighEstimate> {
    if nodes < MIN_NODES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    let m = assemble(case, beta, interval.0, interval.1, nodes)?;
    let (value, iterations, converged, indefinite) = bottom_eigenvalue(&m);
    Ok(RayleighEstimate {
        nodes,
        value,
        iterations,
        converged,
        indefinite,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Indefinite,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "Stable",
            Verdict::Indefinite => "Indefinite",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    pub case: String,
    pub interval: (f64, f64),
    /// Finest node count.
    pub nodes: usize,
    /// Estimate at the finest resolution.
    pub min_rayleigh: f64,
    pub verdict: Verdict,
    pub history: Vec<RayleighEstimate>,
    pub diagnostics: Option<String>,
}

impl StabilityCertificate {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{},{:.16e},{}",
            self.case, self.interval.0, self.interval.1, self.nodes, self.min_rayleigh, self.verdict
        )
    }
}

/// Rayleigh-quotient bottom at `nodes` and `2 nodes`. Stable needs both above
/// [`TOL_POS`]; any negative direction gives Indefinite.
pub fn min_rayleigh(
    case: &StabilityCase,
    beta: &RadialMap,
    interval: (f64, f64),
    nodes: usize,
) -> Result<StabilityCertificate> {
    let history = vec![
        rayleigh_bottom(case, beta, interval, nodes)?,
        rayleigh_bottom(case, beta, interval, 2 * nodes)?,
    ];
    let last = history[history.len() - 1];
    let (verdict, diagnostics) = if history.iter().any(|e| e.indefinite || (e.converged && e.value < 0.0)) {
        (Verdict::Indefinite, None)
    } else if let Some(e) = history.iter().find(|e| !e.converged) {
        (
            Verdict::Inconclusive,
            Some(format!(
                "inverse iteration did not converge at {} nodes after {} iterations",
                e.nodes, e.iterations
            )),
        )
    } else if history.iter().all(|e| e.value > TOL_POS) {
        (Verdict::Stable, None)
    } else {
        (
            Verdict::Inconclusive,
            Some(format!("bottom {:e} is not above {TOL_POS:e}", last.value)),
        )
    };
    Ok(StabilityCertificate {
        case: case.label(),
        interval,
        nodes: last.nodes,
        min_rayleigh: last.value,
        verdict,
        history,
        diagnostics,
    })
}

pub fn certificates_csv(certs: &[StabilityCertificate]) -> String {
    let mut out = String::from(CERTIFICATE_CSV_HEADER);
    out.push('\n');
    for c in certs {
        out.push_str(&c.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Interval;

    fn hyperbolic() -> (StabilityCase, RadialMap) {
        catalog_beta(CaseId::C1C, CaseParams::new(1.0, 1.0)).unwrap()
    }

    fn sphere() -> (StabilityCase, RadialMap) {
        catalog_beta(CaseId::C1B, CaseParams::new(1.0, 1.0)).unwrap()
    }

    #[test]
    fn closed_forms_are_nonnegative() {
        for i in 0..=2000 {
            let x = 6.0 * i as f64 / 2000.0;
            assert!(closed_form_zeroth(&StabilityCase::Hyperbolic { d: 1.0 }, x).unwrap() >= 0.0);
            let y = std::f64::consts::FRAC_PI_2 * (i.max(1)) as f64 / 2000.0;
            assert!(closed_form_zeroth(&StabilityCase::Sphere { d: 1.0 }, y).unwrap() >= 0.0);
        }
    }

    #[test]
    fn zero_variation_has_zero_form() {
        let (case, beta) = hyperbolic();
        let v = VariationField::from_fn(-8.0, -1.0, 101, |_| 0.0).unwrap();
        assert_eq!(second_variation_form(&case, &beta, &v).unwrap(), 0.0);
        assert!(v.is_zero());
    }

    #[test]
    fn clamping_is_enforced() {
        let g = GridFunction::sample(0.0, 1.0, 11, |t| t).unwrap();
        assert!(matches!(VariationField::new(g), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bumps_give_positive_forms() {
        let (case, beta) = hyperbolic();
        let v = VariationField::gaussian_bump(-10.0, -0.1, 2001, -5.05, 1.0).unwrap();
        assert!(second_variation_form(&case, &beta, &v).unwrap() > 0.0);
        let (case, beta) = sphere();
        let v = VariationField::gaussian_bump(-10.0, 0.0, 2001, -5.0, 1.0).unwrap();
        assert!(second_variation_form(&case, &beta, &v).unwrap() > 0.0);
    }

    #[test]
    fn closed_form_and_q_form_agree() {
        for (case, beta, lo, hi) in
            [(hyperbolic(), -10.0, -0.1), (sphere(), -10.0, 0.0)].map(|((c, b), lo, hi)| (c, b, lo, hi))
        {
            let v = VariationField::gaussian_bump(lo, hi, 1001, hi - 1.5, 0.7).unwrap();
            let a = second_variation_form_with(&case, &beta, &v, ZerothTerm::ClosedForm).unwrap();
            let b = second_variation_form_with(&case, &beta, &v, ZerothTerm::QForm).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn generic_form_matches_on_conformal_solutions() {
        let (case, beta) = sphere();
        let h = WarpingProfile::sphere(1.0).unwrap();
        let v = VariationField::gaussian_bump(-6.0, 2.0, 801, -1.0, 0.8).unwrap();
        let a = second_variation_form(&case, &beta, &v).unwrap();
        let b = general_second_variation(&h, &beta, &v).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn generic_form_differs_off_critical_points() {
        let h = WarpingProfile::sphere(1.0).unwrap();
        let beta = RadialMap::new("0.3 + 0.2 sin t", Interval::real_line(), false, |t| {
            let (s, c) = t.sin_cos();
            [0.3 + 0.2 * s, 0.2 * c, -0.2 * s, -0.2 * c, 0.2 * s]
        });
        let v = VariationField::gaussian_bump(-4.0, 4.0, 801, 0.0, 1.0).unwrap();
        let a = second_variation_form_with(&StabilityCase::Sphere { d: 1.0 }, &beta, &v, ZerothTerm::QForm).unwrap();
        let b = general_second_variation(&h, &beta, &v).unwrap();
        assert!((a - b).abs() > 1e-3 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn trivial_beta_gives_perfect_square() {
        let h = WarpingProfile::sphere(1.0).unwrap();
        let beta = RadialMap::constant(0.0, Interval::real_line());
        let v = VariationField::gaussian_bump(-3.0, 3.0, 601, 0.0, 0.5).unwrap();
        let form = general_second_variation(&h, &beta, &v).unwrap();
        let vals = &v.grid().values;
        let sq: Vec<f64> = (0..v.len())
            .map(|i| {
                let (d1, d2) = v.d12(i);
                (d2 + 2.0 * d1 - 3.0 * vals[i]).powi(2)
            })
            .collect();
        let want = simpson_samples(&sq, v.grid().step);
        assert!(form > 0.0);
        assert!((form - want).abs() <= 1e-12 * want, "{form} vs {want}");
    }

    #[test]
    fn flat_operator_matches_hand_formula() {
        let beta = RadialMap::constant(0.0, Interval::real_line());
        let k = 2.0;
        let v = VariationField::from_fn(0.0, 10.0, 2001, |t| (k * t).sin()).unwrap();
        let iv = jacobi_operator_apply(&StabilityCase::Flat, &beta, &v).unwrap();
        for i in 10..1990 {
            let t = iv.x(i);
            let want = (k.powi(4) + 4.0 * k * k) * (k * t).sin();
            assert!((iv.values[i] - want).abs() < 1e-3 * (1.0 + want.abs()), "t={t}");
        }
    }

    #[test]
    fn operator_needs_nine_nodes() {
        let beta = RadialMap::constant(0.0, Interval::real_line());
        let v = VariationField::from_fn(0.0, 1.0, 8, |t| t).unwrap();
        assert!(matches!(
            jacobi_operator_apply(&StabilityCase::Flat, &beta, &v),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn duality_on_the_hyperbolic_case() {
        let (case, beta) = hyperbolic();
        let v = VariationField::gaussian_bump(-10.0, -0.1, 4001, -5.05, 1.0).unwrap();
        let err = duality_error(&case, &beta, &v).unwrap();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn penta_inertia_counts_negative_eigenvalues() {
        let mut m = Penta::zeros(3);
        for (i, v) in [-1.0, 2.0, 3.0].into_iter().enumerate() {
            m.add(i, i, v);
        }
        assert_eq!(m.count_below(0.0), 1);
        let (v, _, _, indefinite) = bottom_eigenvalue(&m);
        assert!(indefinite && (v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_and_hyperbolic_cases_are_certified() {
        let (case, beta) = hyperbolic();
        let c = min_rayleigh(&case, &beta, (-10.0, -0.1), 128).unwrap();
        assert_eq!(c.verdict, Verdict::Stable, "{c:?}");
        let (case, beta) = sphere();
        let c = min_rayleigh(&case, &beta, (-10.0, 0.0), 128).unwrap();
        assert_eq!(c.verdict, Verdict::Stable, "{c:?}");
        assert!(c.csv_row().ends_with(",Stable"));
    }

    #[test]
    fn negative_zeroth_term_is_indefinite() {
        // Constant beta is not critical; its zeroth-order term -9 sin^2(2 beta)
        // outweighs the square on long intervals.
        let beta = RadialMap::constant(0.5, Interval::real_line());
        let case = StabilityCase::Generic(WarpingProfile::sphere(1.0).unwrap());
        let c = min_rayleigh(&case, &beta, (0.0, 20.0), 128).unwrap();
        assert_eq!(c.verdict, Verdict::Indefinite, "{c:?}");
        assert!(c.min_rayleigh < 0.0);
    }

    #[test]
    fn too_few_nodes() {
        let (case, beta) = hyperbolic();
        assert!(min_rayleigh(&case, &beta, (-10.0, -0.1), 32).is_err());
    }
}
