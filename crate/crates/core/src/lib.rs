//! Hybrid numerical-asymptotic Galerkin boundary element solver for time-harmonic
//! scattering by sound-soft nonconvex polygons.

pub mod asymptotics;
pub mod error;
pub mod galerkin_solver;
pub mod geometry;
pub mod harness;
pub mod hna_space;
pub mod operators;
pub mod postprocess;
pub mod quadrature;
pub mod reference_bem;
pub mod specfun;

pub use error::{HnaError, Result};
