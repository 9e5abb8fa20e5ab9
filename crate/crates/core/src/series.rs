//! Truncated Taylor series with a fixed number of coefficients.
//!
//! `Taylor<N>` stores `c[k] = g^(k)(x0) / k!` for `k < N`. Arithmetic drops
//! every term of degree `N` or higher, so a product or composition is exact
//! through degree `N - 1`. The same type serves two roles: local jets at a
//! point (small `N`) and the power-series expansion of a solution at the pole.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taylor<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Taylor<N> {
    pub const fn zero() -> Self {
        Taylor { c: [0.0; N] }
    }

    pub fn constant(v: f64) -> Self {
        let mut s = Self::zero();
        s.c[0] = v;
        s
    }

    /// The identity function expanded about `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut s = Self::constant(x0);
        if N > 1 {
            s.c[1] = 1.0;
        }
        s
    }

    /// Build from derivative values `g(x0), g'(x0), ...`; missing orders are zero.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut s = Self::zero();
        let mut fact = 1.0;
        for (k, slot) in s.c.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            if let Some(v) = d.get(k) {
                *slot = v / fact;
            }
        }
        s
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * factorial(k)
    }

    pub fn scale(mut self, a: f64) -> Self {
        for v in &mut self.c {
            *v *= a;
        }
        self
    }

    /// Series of the derivative. The top coefficient becomes zero (unknown).
    pub fn deriv(&self) -> Self {
        let mut s = Self::zero();
        for k in 0..N.saturating_sub(1) {
            s.c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        s
    }

    /// `outer(self(x))` where `outer` is given by its Taylor coefficients
    /// about `self.value()`.
    pub fn compose(&self, outer: &Self) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut acc = Self::constant(outer.c[N - 1]);
        for k in (0..N - 1).rev() {
            acc = acc * delta;
            acc.c[0] += outer.c[k];
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut r = Self::zero();
        r.c[0] = 1.0 / a0;
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * r.c[k - j];
            }
            r.c[k] = -s / a0;
        }
        r
    }

    pub fn div(&self, other: &Self) -> Self {
        *self * other.recip()
    }

    /// Divide by `x^s`, assuming the first `s` coefficients vanish. The top
    /// `s` coefficients of the result are unknown and set to zero.
    pub fn shift_down(&self, s: usize) -> Self {
        let mut r = Self::zero();
        for k in s..N {
            r.c[k - s] = self.c[k];
        }
        r
    }

    /// Evaluate the polynomial and its first `M` derivatives at offset `dx`.
    pub fn eval_derivs<const M: usize>(&self, dx: f64) -> [f64; M] {
        let mut out = [0.0; M];
        for (order, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in (order..N).rev() {
                let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
                acc = acc * dx + falling * self.c[k];
            }
            *slot = acc;
        }
        out
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

impl<const N: usize> Add for Taylor<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Sub for Taylor<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl<const N: usize> Neg for Taylor<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Taylor<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut r = Self::zero();
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                r.c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        r
    }
}

impl<const N: usize> Add<f64> for Taylor<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] += rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Taylor<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_composition_matches_known_series() {
        // exp(sin x) = 1 + x + x^2/2 - x^4/8 - ...
        let x = Taylor::<6>::variable(0.0);
        let sin = Taylor::<6>::from_derivatives(&[0.0, 1.0, 0.0, -1.0, 0.0, 1.0]);
        let s = x.compose(&sin);
        let e = s.compose(&Taylor::from_derivatives(&[1.0; 6]));
        let want = [1.0, 1.0, 0.5, 0.0, -1.0 / 8.0, -1.0 / 15.0];
        for k in 0..6 {
            assert!((e.c[k] - want[k]).abs() < 1e-15, "k={k}: {}", e.c[k]);
        }
    }

    #[test]
    fn recip_of_one_minus_x_is_geometric() {
        let mut s = Taylor::<8>::constant(1.0);
        s.c[1] = -1.0;
        let r = s.recip();
        assert!(r.c.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eval_derivs_of_cubic() {
        // 1 + 2x + 3x^2 + 4x^3 at x = 0.5
        let s = Taylor::<4> {
            c: [1.0, 2.0, 3.0, 4.0],
        };
        let d: [f64; 4] = s.eval_derivs(0.5);
        assert!((d[0] - (1.0 + 1.0 + 0.75 + 0.5)).abs() < 1e-15);
        assert!((d[1] - (2.0 + 3.0 + 3.0)).abs() < 1e-15);
        assert!((d[2] - (6.0 + 12.0)).abs() < 1e-15);
        assert!((d[3] - 24.0).abs() < 1e-15);
    }
}
