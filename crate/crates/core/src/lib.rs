//! Negative-curvature curvilinear line search for equality-constrained
//! nonlinear programs.
//!
//! The crate solves
//!
//! ```text
//! minimize f(x)   subject to   c_i(x) = 0,  i = 1..m
//! ```
//!
//! over feasible sets that admit a cheap Euclidean projection, and drives the
//! iterates to points where the generalized gradient vanishes and the
//! generalized Hessian is positive semidefinite (second-order critical points).
//!
//! The pieces are:
//!
//! - [`geometry`]: constraint sets with exact derivatives and projections
//!   (sphere, product of spheres, orthogonality, squared-slack augmentation).
//! - [`lagrangian`]: least-squares multipliers, generalized gradient and
//!   Hessian, and criticality certificates.
//! - [`eigen`]: shifted power iteration for the smallest eigenpair.
//! - [`solver`]: the two-branch negative curvature method and a projected
//!   gradient baseline.
//! - [`problems`]: Rayleigh quotient, symmetric orthogonal tensor
//!   decomposition and Burer-Monteiro max-cut.
//! - [`diagnostics`]: Taylor-remainder, projection-bound, finite-difference
//!   and Riemannian-equivalence checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
pub mod eigen;
mod error;
pub mod geometry;
pub mod lagrangian;
pub mod problems;
mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{ConstraintSet, Point};
pub use lagrangian::Objective;
pub use rng::derive_seed;

pub use nalgebra::{DMatrix, DVector};
