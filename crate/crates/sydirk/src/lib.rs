//! Structure-preserving numerical integration built around symplectic
//! diagonally implicit Runge-Kutta (SyDIRK) methods and the integrators they
//! induce on quadratically transformed variables.
//!
//! The crate has three layers:
//!
//! * coefficient machinery: Butcher tableaus, the symplecticity and
//!   projectability conditions, and stage-order classification
//!   ([`tableau`]);
//! * engines: the full-space Runge-Kutta stepper ([`rk`]) and the reduced
//!   stepper on the transformed variables, including the Cayley-factored
//!   form for matrix Lie-Poisson flows ([`descent`]);
//! * a catalog of flows that project onto quadratic observables
//!   ([`systems`]), backed by the algebraic kernels in [`algebra`]
//!   (quaternions, octonions, complex matrices, the discrete spherical
//!   Laplacian, and the eigenbasis splitting of matrix flows).

pub mod algebra;
pub mod convergence;
pub mod descent;
pub mod error;
pub mod quadmap;
pub mod rk;
pub mod solver;
pub mod systems;
pub mod tableau;

pub use error::{Error, Result};
pub use quadmap::QuadraticMap;
pub use solver::{SolveStrategy, SolverSettings};
pub use tableau::{
    builtin_tableau, check_projectable, check_symplectic, classify, make_sydirk, ButcherTableau,
    TableauClass, TableauClassification, TableauDoc,
};
