//! Simulation and verification laboratory for the stochastically forced
//! one-dimensional isentropic Euler equations, approximated by vanishing
//! viscosity.
//!
//! The crate is organised bottom-up:
//!
//! * [`pressure_law`]: thermodynamic closures (`P`, `c`, `K`, `e`, `e*`, `g`).
//! * [`entropy`]: entropy kernels, generated entropy pairs, energies and the
//!   Goursat special entropy.
//! * [`noise`]: finite-mode multiplicative forcing and reproducible Brownian paths.
//! * [`solver`]: IMEX Euler-Maruyama integration of the viscous system, plus the
//!   heat semigroup used as a reference operator.
//! * [`diagnostics`]: energy balance, invariant region, moments, entropy residuals.
//! * [`young_measure`]: empirical Young measures and commutation residuals.
//! * [`config`], [`io`], [`run`]: configuration, persistence and ensemble orchestration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod io;
pub mod noise;
pub mod pressure_law;
pub mod quadrature;
pub mod run;
pub mod solver;
pub mod young_measure;

pub use error::{Error, Result};
