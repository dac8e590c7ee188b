//! Numerical laboratory for steady white-dwarf equilibria of the
//! Euler-Poisson system: non-rotating radial stars, mass monotonicity
//! and virial diagnostics, axisymmetric rotating equilibria by
//! self-consistent-field iteration and branch continuation in the
//! rotation intensity, and the pure 4/3-polytrope experiments.
//!
//! Code units throughout: the physical constants of the equation of
//! state and Newton's constant are normalized to 1; the 4*pi of the
//! Poisson equation is kept explicit.

pub mod config;
pub mod continuation;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod gravity;
pub mod ode;
pub mod poly43;
pub mod quad;
pub mod radial;
pub mod rotation;

pub use eos::EquationOfState;
pub use error::Error;
