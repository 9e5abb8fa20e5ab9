//! Radial profile curves `alpha(r)` (or `beta(t)`), their jets, and uniform
//! grid samples.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::profile::Interval;

/// Value and first four derivatives of a profile curve at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    /// `r` or `t`.
    pub x: f64,
    /// `[alpha, alpha', alpha'', alpha''', alpha'''']`.
    pub a: [f64; 5],
}

impl Jet4 {
    pub fn new(x: f64, a: [f64; 5]) -> Result<Self> {
        if !x.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite jet at {x}: {a:?}")));
        }
        Ok(Jet4 { x, a })
    }

    pub fn value(&self) -> f64 {
        self.a[0]
    }
}

type JetFn = Arc<dyn Fn(f64) -> [f64; 5] + Send + Sync>;

/// A profile curve with jets through order 4, closed-form or grid-backed.
#[derive(Clone)]
pub struct RadialMap {
    domain: Interval,
    pole_regular: bool,
    jet_fn: JetFn,
    label: String,
}

impl fmt::Debug for RadialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialMap")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("pole_regular", &self.pole_regular)
            .finish()
    }
}

impl RadialMap {
    /// `jet(x)` must return `[alpha, alpha', ..., alpha'''']` at `x`.
    pub fn new<F>(label: impl Into<String>, domain: Interval, pole_regular: bool, jet: F) -> Self
    where
        F: Fn(f64) -> [f64; 5] + Send + Sync + 'static,
    {
        RadialMap {
            domain,
            pole_regular,
            jet_fn: Arc::new(jet),
            label: label.into(),
        }
    }

    /// The constant map `alpha = value`.
    pub fn constant(value: f64, domain: Interval) -> Self {
        RadialMap::new(format!("const {value}"), domain, value == 0.0, move |_| {
            [value, 0.0, 0.0, 0.0, 0.0]
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn pole_regular(&self) -> bool {
        self.pole_regular
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `alpha^(order)(x)` for `order` in `0..=4`.
    pub fn eval(&self, x: f64, order: usize) -> f64 {
        (self.jet_fn)(x)[order]
    }

    pub fn derivs(&self, x: f64) -> [f64; 5] {
        (self.jet_fn)(x)
    }

    pub fn jet(&self, x: f64) -> Jet4 {
        Jet4 { x, a: (self.jet_fn)(x) }
    }

    /// Restrict the declared domain (evaluation itself is unchanged).
    pub fn restricted(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }
}

/// Uniform-grid samples `values[i] = g(start + i * step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter("grid function needs at least one value".into()));
        }
        Ok(GridFunction { start, step, values })
    }

    /// Sample `g` on `nodes` equispaced points spanning `[a, b]`.
    pub fn sample(a: f64, b: f64, nodes: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = UniformGrid::new(a, b, nodes)?;
        let values = grid.points().map(g).collect();
        GridFunction::new(a, grid.step(), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `nodes` equispaced points on `[a, b]`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub a: f64,
    pub b: f64,
    pub nodes: usize,
}

impl UniformGrid {
    pub fn new(a: f64, b: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {nodes}")));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interval [{a}, {b}] is not well ordered"
            )));
        }
        Ok(UniformGrid { a, b, nodes })
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.nodes - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |i| self.point(i))
    }
}

/// `n` log-spaced points from `a` to `b` (both positive), ends included.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i + 1 == n {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
