//! Coordinate spaces of the time-dependent phase diagram.
//!
//! Every space is a global chart over the time axis with fiber dimension `n`.
//! The canonical coordinate orders are fixed once and for all; every
//! `SpacePoint`, skew tensor and Jacobian in the crate uses them:
//!
//! | tag              | coordinates                                | dim      |
//! |------------------|--------------------------------------------|----------|
//! | `M`              | `(t, q)`                                   | `1 + n`  |
//! | `J1Pi`           | `(t, q, v)`                                | `1 + 2n` |
//! | `VStar`          | `(t, q, p)`                                | `1 + 2n` |
//! | `TStarM`         | `(t, q, p0, p)`                            | `2 + 2n` |
//! | `J1Pi1Star`      | `(t, q, p, v, pd)`                         | `1 + 4n` |
//! | `QuotTStarJ1Pi`  | `(t, q, v, pq, pv)`                        | `1 + 4n` |
//! | `PMuQuot`        | `(t, q, p, pq, pp)`                        | `1 + 4n` |
//! | `PMu`            | `(t, q, p, pt, pq, pp)`                    | `2 + 4n` |
//! | `J1Tilde`        | `(t, q, p0, p, v, pd0, pd)`                | `3 + 4n` |
//! | `VHat1`          | `(t, q, p0, p, pt, pq, pp)`                | `3 + 4n` |
//! | `TStarJ1Pi`      | `(t, q, v, pt, pq, pv)`                    | `2 + 4n` |
//! | `TTStarM`        | `(t, q, p0, p, td, v, pd0, pd)`            | `4 + 4n` |
//! | `TStarTM`        | `(t, q, td, v, pt, pq, ptd, pv)`           | `4 + 4n` |
//!
//! Here `v` abbreviates the velocities `q̇`, `pd` the momentum velocities
//! `ṗ`, and `p0` the momentum conjugate to time. On `J1Pi1Star` and
//! `J1Tilde` the jet condition fixes `ṫ = 1`, so that coordinate is not
//! stored; operations that embed into a full tangent space reinsert it. On
//! `VHat1` the affine constraint fixes the `p0`-conjugate slot to `1`, which
//! is likewise implicit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceTag {
    /// Configuration space fibered over time.
    M,
    /// First jets of sections: velocity phase space.
    J1Pi,
    /// Dual of the vertical bundle: restricted momentum phase space.
    VStar,
    /// Full cotangent bundle of `M`: extended momentum phase space.
    TStarM,
    /// Jets of sections of the restricted momentum bundle (`ṫ = 1` slice of
    /// the tangent space of `VStar`).
    J1Pi1Star,
    /// Cotangent bundle of the jet space modulo the time form.
    QuotTStarJ1Pi,
    /// Phase bundle of the momentum AV-bundle modulo the time form.
    PMuQuot,
    /// Phase bundle of the momentum AV-bundle (before the quotient).
    PMu,
    /// Jets of sections of the extended momentum bundle over time.
    J1Tilde,
    /// Affine slice of the second cotangent bundle where the fiber
    /// translation pairs to one.
    VHat1,
    /// Cotangent bundle of the jet space.
    TStarJ1Pi,
    /// Tangent bundle of the extended momentum space.
    TTStarM,
    /// Cotangent bundle of the tangent bundle of `M`.
    TStarTM,
}

/// A coordinate space tag together with its fiber dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceId {
    pub tag: SpaceTag,
    pub n: usize,
}

impl SpaceId {
    pub fn new(tag: SpaceTag, n: usize) -> Self {
        Self { tag, n }
    }

    pub fn dim(&self) -> usize {
        let n = self.n;
        match self.tag {
            SpaceTag::M => 1 + n,
            SpaceTag::J1Pi | SpaceTag::VStar => 1 + 2 * n,
            SpaceTag::TStarM => 2 + 2 * n,
            SpaceTag::J1Pi1Star | SpaceTag::QuotTStarJ1Pi | SpaceTag::PMuQuot => 1 + 4 * n,
            SpaceTag::PMu | SpaceTag::TStarJ1Pi => 2 + 4 * n,
            SpaceTag::J1Tilde | SpaceTag::VHat1 => 3 + 4 * n,
            SpaceTag::TTStarM | SpaceTag::TStarTM => 4 + 4 * n,
        }
    }

    /// Coordinate names in canonical order (used for CSV headers and
    /// diagnostics).
    pub fn coord_names(&self) -> Vec<String> {
        let n = self.n;
        let mut names: Vec<String> = Vec::with_capacity(self.dim());
        let scalar = |s: &str| String::from(s);
        let block = |prefix: &str, names: &mut Vec<String>| {
            for i in 1..=n {
                names.push(format!("{prefix}{i}"));
            }
        };
        names.push(scalar("t"));
        match self.tag {
            SpaceTag::M => block("q", &mut names),
            SpaceTag::J1Pi => {
                block("q", &mut names);
                block("v", &mut names);
            }
            SpaceTag::VStar => {
                block("q", &mut names);
                block("p", &mut names);
            }
            SpaceTag::TStarM => {
                block("q", &mut names);
                names.push(scalar("p0"));
                block("p", &mut names);
            }
            SpaceTag::J1Pi1Star => {
                block("q", &mut names);
                block("p", &mut names);
                block("v", &mut names);
                block("pd", &mut names);
            }
            SpaceTag::QuotTStarJ1Pi => {
                block("q", &mut names);
                block("v", &mut names);
                block("pq", &mut names);
                block("pv", &mut names);
            }
            SpaceTag::PMuQuot => {
                block("q", &mut names);
                block("p", &mut names);
                block("pq", &mut names);
                block("pp", &mut names);
            }
            SpaceTag::PMu => {
                block("q", &mut names);
                block("p", &mut names);
                names.push(scalar("pt"));
                block("pq", &mut names);
                block("pp", &mut names);
            }
            SpaceTag::J1Tilde => {
                block("q", &mut names);
                names.push(scalar("p0"));
                block("p", &mut names);
                block("v", &mut names);
                names.push(scalar("pd0"));
                block("pd", &mut names);
            }
            SpaceTag::VHat1 => {
                block("q", &mut names);
                names.push(scalar("p0"));
                block("p", &mut names);
                names.push(scalar("pt"));
                block("pq", &mut names);
                block("pp", &mut names);
            }
            SpaceTag::TStarJ1Pi => {
                block("q", &mut names);
                block("v", &mut names);
                names.push(scalar("pt"));
                block("pq", &mut names);
                block("pv", &mut names);
            }
            SpaceTag::TTStarM => {
                block("q", &mut names);
                names.push(scalar("p0"));
                block("p", &mut names);
                names.push(scalar("td"));
                block("v", &mut names);
                names.push(scalar("pd0"));
                block("pd", &mut names);
            }
            SpaceTag::TStarTM => {
                block("q", &mut names);
                names.push(scalar("td"));
                block("v", &mut names);
                names.push(scalar("pt"));
                block("pq", &mut names);
                names.push(scalar("ptd"));
                block("pv", &mut names);
            }
        }
        debug_assert_eq!(names.len(), self.dim());
        names
    }
}

/// A coordinate tuple tagged with the space it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacePoint {
    space: SpaceId,
    coords: Vec<f64>,
}

impl SpacePoint {
    pub fn new(space: SpaceId, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(CoreError::ShapeMismatch {
                context: "SpacePoint::new",
                expected: space.dim(),
                got: coords.len(),
            });
        }
        Ok(Self { space, coords })
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn t(&self) -> f64 {
        self.coords[0]
    }

    /// Checks that the point lives in the space an operation expects.
    pub fn expect_space(&self, expected: SpaceId, context: &'static str) -> Result<()> {
        if self.space != expected {
            return Err(CoreError::WrongSpace {
                context,
                expected,
                got: self.space,
            });
        }
        Ok(())
    }
}
