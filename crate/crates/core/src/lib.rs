//! Kinetic-fluid solvers on the periodic torus: a phase-space
//! Vlasov-Poisson-Fokker-Planck solver coupled to incompressible
//! Navier-Stokes, the macroscopic Euler-Poisson-Navier-Stokes limit, and the
//! diagnostics that measure how close the two are as the relaxation
//! parameter shrinks.

pub mod spectral;
pub mod kinetic;
pub mod fluid;
pub mod epns;
pub mod diagnostics;
pub mod initdata;
pub mod harness;
