//! Numerical laboratory for the heterogeneous viscous scalar conservation law
//! `∂t u + ∂y A(y, u) − ∂yy u = 0` in one space dimension, with `A`
//! 1-periodic in `y`.
//!
//! * [`flux`]: flux models and built-in families.
//! * [`cell`]: periodic stationary solutions, the homogenized flux `Ā`,
//!   invariant measures.
//! * [`shock`]: standing viscous shocks between two periodic states.
//! * [`evolve`]: a monotone finite-volume solver on periodic or line grids.
//! * [`stability`]: long-time experiments and decay diagnostics.

pub mod cell;
pub mod error;
pub mod evolve;
pub mod flux;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod periodic;
pub mod quadrature;
pub mod roots;
pub mod shock;
pub mod stability;

pub use error::{End, Error, Result};
