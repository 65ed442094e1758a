//! Numerical laboratory for strongly quasi-invariant states on finite tensor
//! products of matrix algebras.
//!
//! The crate builds, for a faithful product state `φ` and a finite group `G`
//! of *-automorphisms:
//!
//! * the Radon–Nikodym cocycle `g ↦ x_g` with `φ(g(a)) = φ(x_g a)` ([`sqi`]),
//! * the GNS triple, the unitaries `U_g`, the projection `P_G`, the operator
//!   `K_G`, the vector `Φ_G` and the invariant state `ψ_G` ([`gns`]),
//! * group-averaged conditional expectations and decreasing martingales along
//!   chains `G_1 ⊂ G_2 ⊂ …` ([`expectation`]),
//! * the site-permutation model with its closed-form weak limit ([`perm_model`]).

// Tolerance checks are written `!(err <= tol)` on purpose so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod config;
pub mod error;
pub mod expectation;
pub mod gns;
pub mod group;
pub mod linalg;
pub mod perm_model;
pub mod reduce;
pub mod sqi;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use num_complex::Complex64;
