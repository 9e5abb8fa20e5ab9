//! Explicit Runge-Kutta integrators on fixed-size states: the Dormand-Prince
//! 5(4) embedded pair with step-size control, and classical fixed-step RK4.

use crate::error::{Error, Result};

/// Any state component above this magnitude aborts the integration.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial slope when `None`.
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-11,
            atol: 1e-13,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

impl Tolerances {
    pub fn with_rtol(rtol: f64) -> Self {
        Tolerances {
            rtol,
            atol: rtol * 1e-2,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) || !(self.max_step > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidParameter(format!("bad integrator tolerances {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Recorded nodes `t[i]`, states `y[i]` and derivatives `dy[i] = rhs(t[i], y[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
    pub stats: StepStats,
}

impl<const N: usize> OdeSolution<N> {
    fn start(t0: f64, y0: [f64; N], dy0: [f64; N]) -> Self {
        OdeSolution {
            t: vec![t0],
            y: vec![y0],
            dy: vec![dy0],
            stats: StepStats::default(),
        }
    }

    fn push(&mut self, t: f64, y: [f64; N], dy: [f64; N]) {
        self.t.push(t);
        self.y.push(y);
        self.dy.push(dy);
    }

    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn check_state<const N: usize>(t_prev: f64, y_prev: &[f64; N], y: &[f64; N]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        let mut last_state = [0.0; 4];
        for (slot, v) in last_state.iter_mut().zip(y_prev) {
            *slot = *v;
        }
        return Err(Error::Divergence {
            last_r: t_prev,
            last_state,
        });
    }
    Ok(())
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand-Prince integration from `t0` to `t_end` (either
/// direction). With `stops`, steps are clipped to land on each stop and only
/// the stops are recorded; otherwise every accepted step is recorded. The
/// initial node and `t_end` are always recorded.
pub fn dopri5<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
    stops: Option<&[f64]>,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    tol.validate()?;
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter("integration bounds must be finite".into()));
    }
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut k1 = rhs(t0, &y0)?;
    let mut sol = OdeSolution::start(t0, y0, k1);
    sol.stats.evaluations = 1;
    if t_end == t0 {
        return Ok(sol);
    }
    let mut pending: Vec<f64> = stops
        .unwrap_or(&[])
        .iter()
        .copied()
        .filter(|s| dir * (s - t0) > 0.0 && dir * (t_end - s) > 0.0)
        .collect();
    pending.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
    pending.reverse();

    let span = (t_end - t0).abs();
    let mut h = tol.initial_step.unwrap_or_else(|| {
        let scale = y0
            .iter()
            .zip(&k1)
            .fold(0.0_f64, |m, (y, k)| m.max(k.abs() / (tol.atol + tol.rtol * y.abs())));
        if scale > 0.0 {
            (0.01 / scale.powf(0.2)).min(span * 1e-3)
        } else {
            span * 1e-3
        }
    });
    h = h.min(tol.max_step).min(span).max(span * 1e-14);

    let (mut t, mut y) = (t0, y0);
    loop {
        let next_stop = pending.last().copied().unwrap_or(t_end);
        let mut landing = false;
        let mut step = h;
        if dir * (t + dir * step - next_stop) >= 0.0 {
            step = (next_stop - t).abs();
            landing = true;
        }
        if step < 1e-14 * t.abs().max(span) {
            return Err(Error::Singularity { at: t });
        }
        let hs = dir * step;
        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let t_new = if landing { next_stop } else { t + hs };
        let k7 = rhs(t_new, &y_new)?;
        sol.stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            sol.stats.rejected += 1;
            h = step * 0.2;
            continue;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            check_state(t, &y, &y_new)?;
            sol.stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            if landing && !pending.is_empty() {
                pending.pop();
                sol.push(t, y, k1);
            } else if landing {
                sol.push(t, y, k1);
                return Ok(sol);
            } else if stops.is_none() {
                sol.push(t, y, k1);
            }
            // A clipped step says nothing about the admissible step size.
            if !landing {
                h = (step * factor).min(tol.max_step);
            }
            if sol.stats.accepted >= tol.max_steps {
                return Err(Error::Singularity { at: t });
            }
        } else {
            sol.stats.rejected += 1;
            h = step * factor.min(1.0);
        }
    }
}

/// Classical RK4 with `steps` equal steps; every node is recorded.
pub fn rk4<const N: usize, F>(mut rhs: F, t0: f64, y0: [f64; N], t_end: f64, steps: usize) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if steps == 0 {
        return Err(Error::InvalidParameter("RK4 needs at least one step".into()));
    }
    let h = (t_end - t0) / steps as f64;
    let mut y = y0;
    let mut k1 = rhs(t0, &y)?;
    let mut sol = OdeSolution::start(t0, y0, k1);
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k2 = rhs(t + h / 2.0, &axpy(&y, h / 2.0, &[(1.0, &k1)]))?;
        let k3 = rhs(t + h / 2.0, &axpy(&y, h / 2.0, &[(1.0, &k2)]))?;
        let k4 = rhs(t + h, &axpy(&y, h, &[(1.0, &k3)]))?;
        let y_new = axpy(
            &y,
            h,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        );
        check_state(t, &y, &y_new)?;
        y = y_new;
        let t_new = if i + 1 == steps { t_end } else { t0 + (i + 1) as f64 * h };
        k1 = rhs(t_new, &y)?;
        sol.push(t_new, y, k1);
        sol.stats.accepted += 1;
        sol.stats.evaluations += 4;
    }
    Ok(sol)
}

/// Piecewise two-point Hermite interpolation from `K` derivatives (orders
/// `0..K`) at each node; degree `2K - 1` on every interval.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpline<const K: usize> {
    x: Vec<f64>,
    // Per interval: polynomial coefficients in s = (x - x_i) / width.
    coeffs: Vec<Vec<f64>>,
}

fn falling(j: usize, i: usize) -> f64 {
    (0..i).map(|k| (j - k) as f64).product()
}

impl<const K: usize> HermiteSpline<K> {
    pub fn new(x: Vec<f64>, d: Vec<[f64; K]>) -> Result<Self> {
        if x.len() < 2 || x.len() != d.len() {
            return Err(Error::InvalidParameter(
                "Hermite interpolation needs matching nodes, at least 2".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "Hermite nodes must be strictly increasing".into(),
            ));
        }
        let coeffs = x
            .windows(2)
            .zip(d.windows(2))
            .map(|(xs, ds)| interval_coeffs::<K>(xs[1] - xs[0], &ds[0], &ds[1]))
            .collect();
        Ok(HermiteSpline { x, coeffs })
    }

    pub fn start(&self) -> f64 {
        self.x[0]
    }

    pub fn end(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Derivatives `0..K` at `x`; outside the node range the end polynomial
    /// is extrapolated.
    pub fn eval(&self, x: f64) -> [f64; K] {
        let i = self.x.partition_point(|&n| n <= x).clamp(1, self.x.len() - 1) - 1;
        let w = self.x[i + 1] - self.x[i];
        let s = (x - self.x[i]) / w;
        let c = &self.coeffs[i];
        let mut out = [0.0; K];
        let mut wp = 1.0;
        for (order, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in (order..c.len()).rev() {
                acc = acc * s + falling(j, order) * c[j];
            }
            *slot = acc / wp;
            wp *= w;
        }
        out
    }
}

fn interval_coeffs<const K: usize>(w: f64, left: &[f64; K], right: &[f64; K]) -> Vec<f64> {
    let n = 2 * K;
    let mut c = vec![0.0; n];
    let mut wp = 1.0;
    let mut fact = 1.0;
    for j in 0..K {
        if j > 0 {
            fact *= j as f64;
        }
        c[j] = left[j] * wp / fact;
        wp *= w;
    }
    // Solve for c[K..2K] from p^(i)(1) = right[i] w^i.
    let mut a = vec![vec![0.0; K + 1]; K];
    let mut wp = 1.0;
    for i in 0..K {
        let mut rhs = right[i] * wp;
        for (j, cj) in c.iter().enumerate().take(K).skip(i) {
            rhs -= falling(j, i) * cj;
        }
        for j in K..n {
            a[i][j - K] = falling(j, i);
        }
        a[i][K] = rhs;
        wp *= w;
    }
    let sol = solve_dense(a);
    c[K..].copy_from_slice(&sol);
    c
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn dopri_matches_sine() {
        let tol = Tolerances::with_rtol(1e-10);
        let sol = dopri5(oscillator, 0.0, [0.0, 1.0], 10.0, &tol, None).unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        assert!(sol.stats.accepted > 10);
    }

    #[test]
    fn dopri_lands_on_stops_backwards() {
        let stops = [5.0, 2.5, 1.0];
        let sol = dopri5(
            oscillator,
            6.0,
            [6f64.sin(), 6f64.cos()],
            0.0,
            &Tolerances::default(),
            Some(&stops),
        )
        .unwrap();
        assert_eq!(sol.t, vec![6.0, 5.0, 2.5, 1.0, 0.0]);
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let err = dopri5(
            |_, y: &[f64; 1]| Ok([30.0 * y[0]]),
            0.0,
            [1.0],
            2.0,
            &Tolerances::default(),
            None,
        )
        .unwrap_err();
        // e^{30 t} passes 1e12 at t = 0.921
        match err {
            Error::Divergence { last_r, last_state } => {
                assert!(last_r < 0.922 && last_r > 0.8);
                assert!(last_state[0] <= DIVERGENCE_LIMIT);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |n| {
            let sol = rk4(oscillator, 0.0, [0.0, 1.0], 2.0, n).unwrap();
            (sol.last().1[0] - 2f64.sin()).abs()
        };
        let ratio = err(100) / err(200);
        assert!((ratio.log2() - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn hermite_reproduces_polynomials() {
        // Degree 5 with three derivatives is reproduced exactly.
        let p = |x: f64| [x.powi(5) - x, 5.0 * x.powi(4) - 1.0, 20.0 * x.powi(3)];
        let xs = vec![0.0, 0.3, 1.0, 1.7];
        let spline = HermiteSpline::<3>::new(xs.clone(), xs.iter().map(|&x| p(x)).collect()).unwrap();
        for x in [0.1, 0.65, 1.2, 1.7] {
            let (a, b) = (spline.eval(x), p(x));
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12, "x={x} k={k}");
            }
        }
    }
}
