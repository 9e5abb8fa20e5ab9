//! Rotationally symmetric biharmonic maps between rotationally symmetric
//! models.
//!
//! A model is `[0, R) x S^{m-1}` with metric `dr^2 + f(r)^2 g_{S}`; a map
//! `(theta, r) -> (theta, alpha(r))` between a domain model `f` and a target
//! model `h` reduces the bienergy to a one-dimensional functional of `alpha`.
//! This crate evaluates that functional and its Euler-Lagrange residuals,
//! ships the closed-form solutions, integrates the fourth-order ODE, and
//! certifies equivariant stability.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bvp;
pub mod catalog;
pub mod cli;
pub mod cylinder;
pub mod error;
pub mod functionals;
pub mod hamiltonian;
pub mod logvar;
pub mod map;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod series;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use map::{GridFunction, Jet4, RadialMap, UniformGrid};
pub use profile::{Interval, MapSpec, SpaceForm, WarpingProfile};
