//! Confidence polytopes for quantum state and process tomography.
//!
//! Measurement counts are turned into half-space constraints on the real
//! coordinates of a density matrix (or Choi matrix). The intersection is a
//! polytope that contains the true object with a stated confidence level,
//! and linear programming over it yields confidence intervals for any
//! affine functional such as fidelity or an observable mean.

pub mod clopper_pearson;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod linprog;
pub mod operators;
pub mod polytope;
pub mod simulator;

pub use error::{Error, Result};
