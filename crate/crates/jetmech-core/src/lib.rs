//! Numerical core for time-dependent mechanics on jet bundles.
//!
//! The crate works in global coordinate charts on fibrations over the time
//! axis: a configuration space with coordinates `(t, q^1..q^n)` together with
//! the ten derived phase spaces (jet space, restricted/extended momentum
//! spaces, their tangent/cotangent quotients). It provides
//!
//! * pointwise multilinear algebra for skew tensors (sharp maps, pullbacks,
//!   pushforwards, kernels, ranks),
//! * exact first/second-order forward-mode differentiation of scalar fields,
//! * Lagrangian and Hamiltonian dynamics (Legendre transforms, Euler-Lagrange
//!   and Reeb vector fields, residuals),
//! * the structural maps between the phase spaces together with their
//!   canonical Poisson bivectors and (pre)symplectic forms,
//! * pointwise Lagrangian-submanifold checks, and
//! * fixed-step RK4 integration with route-equivalence experiments.
//!
//! The crate is `no_std`-compatible (with `alloc`); all transcendental
//! functions go through `libm` so results are identical with or without the
//! `std` feature.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod mechanics;
pub mod rng;
pub mod scenarios;
pub mod simulate;
pub mod space;
pub mod submanifolds;
pub mod triples;

pub use error::CoreError;
pub use space::{SpaceId, SpacePoint, SpaceTag};
