//! Exact p-adic computer algebra at finite precision and finite Witt length.
//!
//! The crate provides the pieces needed to verify, by direct computation,
//! the standard identities tying dagger-style lifts of positive
//! characteristic rings to truncated Witt vectors: precision-tracked
//! arithmetic in Z/p^N, sparse Laurent polynomials, ghost-coordinate Witt
//! vector arithmetic, de Rham complexes with an explicit chain-homotopy
//! operator, Frobenius comparison maps, and integral cohomology of
//! multidegree-graded complexes via Smith normal forms.

pub mod cohomology;
pub mod error;
pub mod forms;
pub mod frobenius;
pub mod homotopy;
pub mod lpoly;
pub mod scalar;
pub mod snf;
pub mod witt;

pub use error::{Error, Result};
pub use lpoly::{LPoly, LaurentRing, TTrunc, VarSet};
pub use scalar::{unit_coeff, PrecScalar, PrimeCtx};
pub use witt::{GhostVec, WittVec};
