//! Harmonic functions in the unit ball of `R^n`.
//!
//! The crate builds harmonic polynomial maps in any dimension, integrates
//! their Dirichlet energies exactly, and checks the facts that make energy
//! and volume concentrate near the boundary sphere as `n` grows:
//!
//! - [`geometry`]: ball volumes, sphere areas and shell fractions in log-space.
//! - [`polynomial`]: exact sparse polynomials, Laplacians, gradients.
//! - [`integration`]: closed-form ball/sphere integrals with Monte Carlo oracles.
//! - [`harmonics`]: identity map, zonal and random harmonic polynomials.
//! - [`energetics`]: `E(r)`, `H(r)`, decay fits and concentration fractions.
//! - [`identities`]: Pohozaev and Green identities, the minimiser bound.
//! - [`mollifier`]: grid checks of the mean-value property and gradient estimates.
//! - [`suite`]: the full battery of checks behind `harmonic-ball suite`.
//! - [`cli`]: the `harmonic-ball` command line.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod energetics;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod identities;
pub mod integration;
pub mod mollifier;
pub mod polynomial;
pub mod suite;

pub use error::{Error, Result};
