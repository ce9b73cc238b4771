//! Toolkit for Hamiltonian systems whose conserved quantities live only on
//! invariant submanifolds ("particular integrals": functions f with
//! {f, H} = a·f, conserved on the zero set f = 0).
//!
//! The crate provides, bottom to top:
//!
//! * [`expr`] — a small fixed expression language with exact forward-mode
//!   derivatives, used for every Hamiltonian and observable;
//! * [`poisson`] — canonical charts, phase points, Hamiltonian vector fields
//!   and numeric Poisson brackets;
//! * [`polyalg`] — exact sparse Laurent-polynomial arithmetic over arbitrary
//!   precision rationals: symbolic brackets, multivariate division, and
//!   involution certificates;
//! * [`dynamics`] — symplectic one-step integrators (implicit midpoint,
//!   Strang splitting) plus a Runge–Kutta reference, with conservation
//!   drift reports;
//! * [`models`] — a catalog of built-in systems: a central-force particle in
//!   Cartesian and adapted non-orthogonal coordinates, two charges in a
//!   uniform magnetic field, N-body chains in Cartesian, mutual-squared-
//!   distance, and simplex-content coordinates;
//! * [`reduction`] — numeric verification of particular integrals and
//!   involution sets, momentum matching between full and reduced charts, and
//!   side-by-side comparison of full versus reduced dynamics;
//! * [`cli`] — the config parsing and report rendering behind the `partint`
//!   binary.

pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod models;
pub mod poisson;
pub mod polyalg;
pub mod reduction;
