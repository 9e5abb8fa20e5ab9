//! Composite Simpson quadrature, on functions and on uniform samples.

use crate::error::{Error, Result};

/// Composite Simpson with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, panels: usize) -> Result<f64> {
    if panels == 0 || panels % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "Simpson needs an even, positive panel count, got {panels}"
        )));
    }
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += g(x);
        } else {
            even += g(x);
        }
    }
    Ok(h / 3.0 * (g(a) + 4.0 * odd + 2.0 * even + g(b)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Richardson error estimate `|S_2n - S_n| / 15`.
    pub error_estimate: f64,
    pub panels: usize,
}

/// Simpson with panel doubling until the Richardson estimate drops below
/// `rel_tol * |value|` (or an absolute floor of `rel_tol`).
pub fn simpson_converged<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    start_panels: usize,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadratureResult> {
    let mut panels = start_panels.max(2);
    panels += panels % 2;
    let mut prev = simpson(&g, a, b, panels)?;
    loop {
        panels *= 2;
        let next = simpson(&g, a, b, panels)?;
        let est = (next - prev).abs() / 15.0;
        if est <= rel_tol * next.abs().max(1.0) || panels >= max_panels {
            return Ok(QuadratureResult {
                value: next + (next - prev) / 15.0,
                error_estimate: est,
                panels,
            });
        }
        prev = next;
    }
}

/// Simpson weights for `n` uniform samples at spacing `h`. With an odd panel
/// count the last three panels use the 3/8 rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    if n == 2 {
        w[0] = h / 2.0;
        w[1] = h / 2.0;
        return w;
    }
    let panels = n - 1;
    let simpson_panels = if panels % 2 == 0 { panels } else { panels - 3 };
    for i in (0..simpson_panels).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_panels != panels {
        let s = simpson_panels;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Integrate uniform samples with [`simpson_weights`].
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}
