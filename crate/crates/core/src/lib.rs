//! Numerical laboratory for the two-parameter family of natural connections
//! on conformal Riemannian almost product manifolds (class W1).
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: dense multilinear algebra on one tangent space.
//! - [`structure`]: pointwise structures `(g, P, θ)`, the fundamental tensor and class predicates.
//! - [`connection`]: torsion, transformation tensor and named members of the connection family.
//! - [`chart`]: coordinate manifolds with finite-difference connections and curvature.
//! - [`identities`]: numerical checks of the curvature identities relating `∇` and `∇'`.
//! - [`classify`]: decision procedures for when `R'` is a Riemannian P-tensor and for parallel torsion.
//! - [`dsl`]: the expression language used to describe fields.
//! - [`cli`]: the `papm` command-line tool.

pub mod chart;
pub mod classify;
pub mod cli;
pub mod connection;
pub mod dsl;
pub mod error;
pub mod identities;
pub mod random;
pub mod structure;
pub mod tensor;

pub use error::{Error, Result};
