//! Mixed finite-element solver for Darcy-Forchheimer gas flow in porous
//! media.
//!
//! The library discretizes the dual mixed formulation of compressible
//! flow with a quadratic drag law on structured 2D meshes: edge fluxes
//! (lowest-order Raviart-Thomas style) paired with cellwise-constant
//! pressure-squared values. On top of the spatial kernel it provides
//!
//! * pointwise closures and their monotonicity inequalities ([`kernel`]),
//! * meshes, discrete fields, and the W^s(div) norms ([`grid`]),
//! * form assembly and Newton/Picard linearizations ([`assembly`]),
//! * stationary solves with regularization continuation ([`stationary`]),
//! * implicit-Euler time stepping with a-priori bound monitors
//!   ([`transient`]),
//! * independent oracles: manufactured solutions, a primal
//!   convex-minimization cross-check, inf-sup probing, inequality sweeps
//!   ([`verify`]),
//! * a batch CLI with VTK/CSV/MatrixMarket emission ([`cli`], [`vtk`]).
//!
//! Start from the runnable programs in `examples/`; each one exercises a
//! single capability end to end.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod stationary;
pub mod transient;
pub mod verify;
pub mod vtk;

pub use error::{Error, Result};
