//! Mechanical similarity of monomial potentials `V = g q^n / n` in the
//! Koopman-von Neumann extended phase space `(q, p, lambda_q, lambda_p)`.
//!
//! The classical side ([`dynamics`], [`charges`], [`symmetry`]) integrates the
//! extended equations, monitors the conserved charges and applies the scaling
//! map. [`opalg`] is an exact operator algebra for the extended and Bopp
//! generators, [`qgrid`] propagates wave functions on grids, and
//! [`semiclassics`] covers Bohr-Sommerfeld levels and Newton-equivalent
//! Hamiltonians. [`cli`] wires everything into the `kvnlab` batch runner.

pub mod charges;
pub mod cli;
pub mod dynamics;
pub mod fsutil;
pub mod integrator;
pub mod model;
pub mod opalg;
pub mod qgrid;
pub mod semiclassics;
pub mod symmetry;
