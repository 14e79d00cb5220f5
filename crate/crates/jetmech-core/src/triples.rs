//! Structural maps between the phase spaces, their canonical bivectors and
//! (pre)symplectic forms, the sections induced by a Lagrangian or a
//! Hamiltonian, and pointwise verification of the structure-preservation
//! theorems.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::{
    pullback_two_form, pushforward_bivector, CoordinateMap, LinearMapData, SkewTensor, TensorKind,
};
use crate::linalg::{self, Mat};
use crate::mechanics::{
    ExtendedLegendreMap, HamiltonianSystem, LagrangianSystem, RestrictedLegendreMap,
};
use crate::rng::SplitMix64;
use crate::space::{SpaceId, SpacePoint, SpaceTag};

/// The canonical constant structures, each bound to one space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureId {
    /// Canonical Poisson bivector of the restricted momentum space.
    LambdaVStar,
    /// Complete lift of the above, restricted to the jet slice `ṫ = 1`
    /// (same coordinate matrix as `LambdaJ1Pi1Star`).
    LambdaVStarComplete,
    /// Poisson bivector of the momentum jet space.
    LambdaJ1Pi1Star,
    /// Projected Poisson bivector on the cotangent quotient of the jet space.
    LambdaTildeJ1Pi,
    /// Projected Poisson bivector on the phase-bundle quotient.
    LambdaTildePMu,
    /// Canonical symplectic form of the cotangent bundle of the jet space.
    OmegaJ1Pi,
    /// Canonical symplectic form of the phase bundle.
    OmegaPMu,
    /// Presymplectic form of the extended momentum jet space (corank 1).
    OmegaJ1Tilde,
    /// Presymplectic form of the affine slice `V̂^{-1}(1)` (corank 1).
    PhiVHat1,
    /// Canonical symplectic form of the extended momentum space.
    OmegaTStarM,
}

impl StructureId {
    pub fn name(self) -> &'static str {
        match self {
            StructureId::LambdaVStar => "Lambda_Vstar",
            StructureId::LambdaVStarComplete => "Lambda_Vstar_complete",
            StructureId::LambdaJ1Pi1Star => "Lambda_J1pi1star",
            StructureId::LambdaTildeJ1Pi => "Lambda_tilde_J1pi",
            StructureId::LambdaTildePMu => "Lambda_tilde_Pmu",
            StructureId::OmegaJ1Pi => "Omega_J1pi",
            StructureId::OmegaPMu => "Omega_Pmu",
            StructureId::OmegaJ1Tilde => "Omega_J1tilde",
            StructureId::PhiVHat1 => "Phi_Vhat1",
            StructureId::OmegaTStarM => "Omega_TstarM",
        }
    }

    pub fn space(self, n: usize) -> SpaceId {
        let tag = match self {
            StructureId::LambdaVStar => SpaceTag::VStar,
            StructureId::LambdaVStarComplete | StructureId::LambdaJ1Pi1Star => SpaceTag::J1Pi1Star,
            StructureId::LambdaTildeJ1Pi => SpaceTag::QuotTStarJ1Pi,
            StructureId::LambdaTildePMu => SpaceTag::PMuQuot,
            StructureId::OmegaJ1Pi => SpaceTag::TStarJ1Pi,
            StructureId::OmegaPMu => SpaceTag::PMu,
            StructureId::OmegaJ1Tilde => SpaceTag::J1Tilde,
            StructureId::PhiVHat1 => SpaceTag::VHat1,
            StructureId::OmegaTStarM => SpaceTag::TStarM,
        };
        SpaceId::new(tag, n)
    }

    pub fn kind(self) -> TensorKind {
        match self {
            StructureId::LambdaVStar
            | StructureId::LambdaVStarComplete
            | StructureId::LambdaJ1Pi1Star
            | StructureId::LambdaTildeJ1Pi
            | StructureId::LambdaTildePMu => TensorKind::Bivector,
            _ => TensorKind::TwoForm,
        }
    }
}

/// Constant matrix of the named structure in canonical coordinate order.
pub fn canonical_structure(id: StructureId, n: usize) -> SkewTensor {
    let space = id.space(n);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(1 + 2 * n);
    match id {
        StructureId::LambdaVStar => {
            // Λ = Σ ∂q ∧ ∂p on (t, q, p)
            for i in 0..n {
                pairs.push((1 + i, 1 + n + i));
            }
        }
        StructureId::LambdaVStarComplete | StructureId::LambdaJ1Pi1Star => {
            // Λ = Σ ∂q ∧ ∂ṗ + ∂v ∧ ∂p on (t, q, p, v, pd)
            for i in 0..n {
                pairs.push((1 + i, 1 + 3 * n + i));
                pairs.push((1 + 2 * n + i, 1 + n + i));
            }
        }
        StructureId::LambdaTildeJ1Pi => {
            // Λ = Σ ∂q ∧ ∂pq + ∂v ∧ ∂pv on (t, q, v, pq, pv)
            for i in 0..n {
                pairs.push((1 + i, 1 + 2 * n + i));
                pairs.push((1 + n + i, 1 + 3 * n + i));
            }
        }
        StructureId::LambdaTildePMu => {
            // Λ = Σ ∂q ∧ ∂pq + ∂p ∧ ∂pp on (t, q, p, pq, pp)
            for i in 0..n {
                pairs.push((1 + i, 1 + 2 * n + i));
                pairs.push((1 + n + i, 1 + 3 * n + i));
            }
        }
        StructureId::OmegaJ1Pi => {
            // ω = dt ∧ dpt + Σ dq ∧ dpq + dv ∧ dpv on (t, q, v, pt, pq, pv)
            pairs.push((0, 1 + 2 * n));
            for i in 0..n {
                pairs.push((1 + i, 2 + 2 * n + i));
                pairs.push((1 + n + i, 2 + 3 * n + i));
            }
        }
        StructureId::OmegaPMu => {
            // ω = dt ∧ dpt + Σ dq ∧ dpq + dp ∧ dpp on (t, q, p, pt, pq, pp)
            pairs.push((0, 1 + 2 * n));
            for i in 0..n {
                pairs.push((1 + i, 2 + 2 * n + i));
                pairs.push((1 + n + i, 2 + 3 * n + i));
            }
        }
        StructureId::OmegaJ1Tilde => {
            // ω = dt ∧ dpd0 + Σ dq ∧ dpd + dv ∧ dp on (t, q, p0, p, v, pd0, pd)
            pairs.push((0, 2 + 3 * n));
            for i in 0..n {
                pairs.push((1 + i, 3 + 3 * n + i));
                pairs.push((2 + 2 * n + i, 2 + n + i));
            }
        }
        StructureId::PhiVHat1 => {
            // ω = dt ∧ dpt + Σ dq ∧ dpq + dp ∧ dpp on (t, q, p0, p, pt, pq, pp)
            pairs.push((0, 2 + 2 * n));
            for i in 0..n {
                pairs.push((1 + i, 3 + 2 * n + i));
                pairs.push((2 + n + i, 3 + 3 * n + i));
            }
        }
        StructureId::OmegaTStarM => {
            // ω = dt ∧ dp0 + Σ dq ∧ dp on (t, q, p0, p)
            pairs.push((0, 1 + n));
            for i in 0..n {
                pairs.push((1 + i, 2 + n + i));
            }
        }
    }
    SkewTensor::from_unit_pairs(space, id.kind(), &pairs)
}

/// The structural maps of the two triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapId {
    /// Canonical interchange `T(T*M) → T*(TM)` of the base manifold.
    AM,
    /// Cotangent-to-jet comparison map `T*(J¹π) → J¹π₁*`.
    Psi,
    /// Tulczyjew isomorphism of the restricted triple.
    APi,
    APiInv,
    /// Momentum-side isomorphism of the restricted triple.
    BPi,
    BPiInv,
    /// Tulczyjew fibration of the extended triple (not invertible: it
    /// forgets `p0`).
    ATilde,
    /// Momentum-side isomorphism of the extended triple.
    BTilde,
    BTildeInv,
}

impl MapId {
    pub fn name(self) -> &'static str {
        match self {
            MapId::AM => "A_M",
            MapId::Psi => "psi",
            MapId::APi => "A_pi",
            MapId::APiInv => "A_pi_inv",
            MapId::BPi => "b_pi",
            MapId::BPiInv => "b_pi_inv",
            MapId::ATilde => "A_tilde",
            MapId::BTilde => "b_tilde",
            MapId::BTildeInv => "b_tilde_inv",
        }
    }

    pub fn source(self, n: usize) -> SpaceId {
        let tag = match self {
            MapId::AM => SpaceTag::TTStarM,
            MapId::Psi => SpaceTag::TStarJ1Pi,
            MapId::APi | MapId::BPi => SpaceTag::J1Pi1Star,
            MapId::APiInv => SpaceTag::QuotTStarJ1Pi,
            MapId::BPiInv => SpaceTag::PMuQuot,
            MapId::ATilde | MapId::BTilde => SpaceTag::J1Tilde,
            MapId::BTildeInv => SpaceTag::VHat1,
        };
        SpaceId::new(tag, n)
    }

    pub fn target(self, n: usize) -> SpaceId {
        let tag = match self {
            MapId::AM => SpaceTag::TStarTM,
            MapId::Psi | MapId::APiInv | MapId::BPiInv => SpaceTag::J1Pi1Star,
            MapId::APi => SpaceTag::QuotTStarJ1Pi,
            MapId::BPi => SpaceTag::PMuQuot,
            MapId::ATilde => SpaceTag::TStarJ1Pi,
            MapId::BTilde => SpaceTag::VHat1,
            MapId::BTildeInv => SpaceTag::J1Tilde,
        };
        SpaceId::new(tag, n)
    }
}

/// Coordinate image of a structural map, exactly as displayed in local
/// coordinates.
pub fn apply_map(id: MapId, x: &SpacePoint) -> Result<SpacePoint> {
    let n = x.space().n;
    x.expect_space(id.source(n), "apply_map")?;
    let c = x.coords();
    let out: Vec<f64> = match id {
        // (t,q,p0,p; td,v,pd0,pd) ↦ (t,q,td,v; pd0,pd,p0,p)
        MapId::AM => {
            let mut y = Vec::with_capacity(c.len());
            y.extend_from_slice(&c[..1 + n]); // t, q
            y.push(c[2 + 2 * n]); // td
            y.extend_from_slice(&c[3 + 2 * n..3 + 3 * n]); // v
            y.push(c[3 + 3 * n]); // pt = pd0
            y.extend_from_slice(&c[4 + 3 * n..]); // pq = pd
            y.push(c[1 + n]); // ptd = p0
            y.extend_from_slice(&c[2 + n..2 + 2 * n]); // pv = p
            y
        }
        // (t,q,v; pt,pq,pv) ↦ (t,q,p=pv; v, pd=pq), with ṫ = 1 implicit
        MapId::Psi => {
            let mut y = Vec::with_capacity(1 + 4 * n);
            y.extend_from_slice(&c[..1 + n]);
            y.extend_from_slice(&c[2 + 3 * n..]); // p = pv
            y.extend_from_slice(&c[1 + n..1 + 2 * n]); // v
            y.extend_from_slice(&c[2 + 2 * n..2 + 3 * n]); // pd = pq
            y
        }
        // (t,q,p; v,pd) ↦ (t,q,v; pq=pd, pv=p)
        MapId::APi => {
            let mut y = Vec::with_capacity(1 + 4 * n);
            y.extend_from_slice(&c[..1 + n]);
            y.extend_from_slice(&c[1 + 2 * n..1 + 3 * n]); // v
            y.extend_from_slice(&c[1 + 3 * n..]); // pq = pd
            y.extend_from_slice(&c[1 + n..1 + 2 * n]); // pv = p
            y
        }
        // (t,q,v; pq,pv) ↦ (t,q,p=pv; v, pd=pq)
        MapId::APiInv => {
            let mut y = Vec::with_capacity(1 + 4 * n);
            y.extend_from_slice(&c[..1 + n]);
            y.extend_from_slice(&c[1 + 3 * n..]); // p = pv
            y.extend_from_slice(&c[1 + n..1 + 2 * n]); // v
            y.extend_from_slice(&c[1 + 2 * n..1 + 3 * n]); // pd = pq
            y
        }
        // (t,q,p; v,pd) ↦ (t,q,p; pq=-pd, pp=v)
        MapId::BPi => {
            let mut y = Vec::with_capacity(1 + 4 * n);
            y.extend_from_slice(&c[..1 + 2 * n]);
            y.extend(c[1 + 3 * n..].iter().map(|x| -x)); // pq = -pd
            y.extend_from_slice(&c[1 + 2 * n..1 + 3 * n]); // pp = v
            y
        }
        // (t,q,p; pq,pp) ↦ (t,q,p; v=pp, pd=-pq)
        MapId::BPiInv => {
            let mut y = Vec::with_capacity(1 + 4 * n);
            y.extend_from_slice(&c[..1 + 2 * n]);
            y.extend_from_slice(&c[1 + 3 * n..]); // v = pp
            y.extend(c[1 + 2 * n..1 + 3 * n].iter().map(|x| -x)); // pd = -pq
            y
        }
        // (t,q,p0,p; v,pd0,pd) ↦ (t,q,v; pt=pd0, pq=pd, pv=p)
        MapId::ATilde => {
            let mut y = Vec::with_capacity(2 + 4 * n);
            y.extend_from_slice(&c[..1 + n]);
            y.extend_from_slice(&c[2 + 2 * n..2 + 3 * n]); // v
            y.push(c[2 + 3 * n]); // pt = pd0
            y.extend_from_slice(&c[3 + 3 * n..]); // pq = pd
            y.extend_from_slice(&c[2 + n..2 + 2 * n]); // pv = p
            y
        }
        // (t,q,p0,p; v,pd0,pd) ↦ (t,q,p0,p; pt=-pd0, pq=-pd, pp=v)
        MapId::BTilde => {
            let mut y = Vec::with_capacity(3 + 4 * n);
            y.extend_from_slice(&c[..2 + 2 * n]);
            y.push(-c[2 + 3 * n]); // pt = -pd0
            y.extend(c[3 + 3 * n..].iter().map(|x| -x)); // pq = -pd
            y.extend_from_slice(&c[2 + 2 * n..2 + 3 * n]); // pp = v
            y
        }
        // (t,q,p0,p; pt,pq,pp) ↦ (t,q,p0,p; v=pp, pd0=-pt, pd=-pq)
        MapId::BTildeInv => {
            let mut y = Vec::with_capacity(3 + 4 * n);
            y.extend_from_slice(&c[..2 + 2 * n]);
            y.extend_from_slice(&c[3 + 3 * n..]); // v = pp
            y.push(-c[2 + 2 * n]); // pd0 = -pt
            y.extend(c[3 + 2 * n..3 + 3 * n].iter().map(|x| -x)); // pd = -pq
            y
        }
    };
    SpacePoint::new(id.target(n), out)
}

/// A structural map as a [`CoordinateMap`]; the Jacobian is the constant
/// signed permutation obtained by mapping basis vectors.
pub struct StructuralMap {
    pub id: MapId,
    pub n: usize,
}

impl CoordinateMap for StructuralMap {
    fn source(&self) -> SpaceId {
        self.id.source(self.n)
    }
    fn target(&self) -> SpaceId {
        self.id.target(self.n)
    }
    fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        apply_map(self.id, x)
    }
    fn jacobian(&self, _x: &SpacePoint) -> Result<LinearMapData> {
        let src = self.source();
        let tgt = self.target();
        let mut mat = Mat::zeros(tgt.dim(), src.dim());
        for j in 0..src.dim() {
            let mut basis = vec![0.0; src.dim()];
            basis[j] = 1.0;
            let image = apply_map(self.id, &SpacePoint::new(src, basis)?)?;
            for (i, &value) in image.coords().iter().enumerate() {
                mat[(i, j)] = value;
            }
        }
        LinearMapData::new(src, tgt, mat)
    }
}

/// Section of the cotangent quotient induced by the differential of `L`:
/// `(t, q, v, ∂L/∂q, ∂L/∂v)`.
pub fn dl_tilde(sys: &LagrangianSystem, j: &SpacePoint) -> Result<SpacePoint> {
    j.expect_space(sys.jet_space(), "dl_tilde")?;
    let n = sys.n();
    let jet = sys.jet(j.coords());
    let mut out = Vec::with_capacity(1 + 4 * n);
    out.extend_from_slice(j.coords());
    out.extend_from_slice(&jet.gradient[1..]);
    SpacePoint::new(SpaceId::new(SpaceTag::QuotTStarJ1Pi, n), out)
}

/// Section of the phase-bundle quotient induced by the Hamiltonian section:
/// `(t, q, p, ∂H/∂q, ∂H/∂p)`.
pub fn dh_tilde(sys: &HamiltonianSystem, v: &SpacePoint) -> Result<SpacePoint> {
    v.expect_space(sys.phase_space(), "dh_tilde")?;
    let n = sys.n();
    let jet = sys.jet2(v.coords())?;
    let mut out = Vec::with_capacity(1 + 4 * n);
    out.extend_from_slice(v.coords());
    out.extend_from_slice(&jet.gradient[1..]);
    SpacePoint::new(SpaceId::new(SpaceTag::PMuQuot, n), out)
}

/// Differential of `F_h = p0 + H`, landing in the affine slice:
/// `(t, q, p0, p, ∂H/∂t, ∂H/∂q, ∂H/∂p)` with the `p0`-slot of the covector
/// implicitly equal to one.
pub fn dfh(sys: &HamiltonianSystem, a: &SpacePoint) -> Result<SpacePoint> {
    a.expect_space(SpaceId::new(SpaceTag::TStarM, sys.n()), "dfh")?;
    let n = sys.n();
    let c = a.coords();
    let mut tqp = Vec::with_capacity(1 + 2 * n);
    tqp.push(c[0]);
    tqp.extend_from_slice(&c[1..1 + n]);
    tqp.extend_from_slice(&c[2 + n..]);
    let jet = sys.jet2(&tqp)?;
    let mut out = Vec::with_capacity(3 + 4 * n);
    out.extend_from_slice(c);
    out.extend_from_slice(&jet.gradient);
    SpacePoint::new(SpaceId::new(SpaceTag::VHat1, n), out)
}

/// Outcome of checking one structural map against its theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct MapCheckReport {
    pub map: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// `+1` for Poisson/presymplectic maps, `-1` for the anti variants.
    pub sign: f64,
    pub max_error: f64,
    pub pass: bool,
}

/// Checks the structure-preservation theorem for one of the four
/// isomorphisms at seeded random points: pushforward of the source bivector
/// (for `A_pi`, `b_pi`) or pullback of the target form (for `A_tilde`,
/// `b_tilde`) must equal the expected structure up to the stated sign.
pub fn verify_structure_map(
    id: MapId,
    n: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<MapCheckReport> {
    if samples == 0 {
        return Err(CoreError::InvalidArgument("samples must be >= 1".into()));
    }
    let (mode, source_structure, target_structure, sign) = match id {
        MapId::APi => (
            CheckMode::PushBivector,
            canonical_structure(StructureId::LambdaJ1Pi1Star, n),
            canonical_structure(StructureId::LambdaTildeJ1Pi, n),
            1.0,
        ),
        MapId::BPi => (
            CheckMode::PushBivector,
            canonical_structure(StructureId::LambdaJ1Pi1Star, n),
            canonical_structure(StructureId::LambdaTildePMu, n),
            -1.0,
        ),
        MapId::ATilde => (
            CheckMode::PullForm,
            canonical_structure(StructureId::OmegaJ1Tilde, n),
            canonical_structure(StructureId::OmegaJ1Pi, n),
            1.0,
        ),
        MapId::BTilde => (
            CheckMode::PullForm,
            canonical_structure(StructureId::OmegaJ1Tilde, n),
            canonical_structure(StructureId::PhiVHat1, n),
            -1.0,
        ),
        _ => {
            return Err(CoreError::InvalidArgument(alloc::format!(
                "verify_structure_map does not cover {}",
                id.name()
            )))
        }
    };

    let map = StructuralMap { id, n };
    let mut rng = SplitMix64::new(seed);
    let mut max_error = 0.0_f64;
    for _ in 0..samples {
        let x = SpacePoint::new(map.source(), rng.sample_box(map.source().dim()))?;
        let jac = map.jacobian(&x)?;
        let diff = match mode {
            CheckMode::PushBivector => {
                let pushed = pushforward_bivector(&jac, &source_structure)?;
                pushed.mat().sub(&target_structure.mat().scale(sign))
            }
            CheckMode::PullForm => {
                // pulling the target-side form back must give sign * source form
                let pulled = pullback_two_form(&jac, &target_structure)?;
                pulled.mat().sub(&source_structure.mat().scale(sign))
            }
        };
        max_error = max_error.max(diff.max_abs());
    }

    Ok(MapCheckReport {
        map: String::from(id.name()),
        n,
        samples,
        seed,
        sign,
        max_error,
        pass: max_error <= tol,
    })
}

enum CheckMode {
    PushBivector,
    PullForm,
}

/// Residual of the restricted-triple compatibility along the Euler-Lagrange
/// field: `A_pi(T leg_L · R_L)` against the section of `dL` in the quotient.
pub fn lemma_l1_residual(sys: &LagrangianSystem, j: &SpacePoint) -> Result<f64> {
    let n = sys.n();
    let field = sys.euler_lagrange_field(j)?;
    let leg = RestrictedLegendreMap { system: sys };
    let tangent = leg.jacobian(j)?.mat.matvec(&field);
    let base = leg.apply(j)?;
    let mut z = Vec::with_capacity(1 + 4 * n);
    z.extend_from_slice(base.coords());
    debug_assert!((tangent[0] - 1.0).abs() <= 1e-12);
    z.extend_from_slice(&tangent[1..]); // (v, pd); ṫ = 1 is implicit
    let z = SpacePoint::new(SpaceId::new(SpaceTag::J1Pi1Star, n), z)?;
    let lhs = apply_map(MapId::APi, &z)?;
    let rhs = dl_tilde(sys, j)?;
    Ok(linalg::max_abs_diff(lhs.coords(), rhs.coords()))
}

/// Residual of the extended-triple compatibility along the Euler-Lagrange
/// field: `A_tilde(T Leg_L · R_L)` against the full differential of `L`.
pub fn lemma_l2_residual(sys: &LagrangianSystem, j: &SpacePoint) -> Result<f64> {
    let n = sys.n();
    let field = sys.euler_lagrange_field(j)?;
    let leg = ExtendedLegendreMap { system: sys };
    let tangent = leg.jacobian(j)?.mat.matvec(&field);
    let base = leg.apply(j)?;
    let mut z = Vec::with_capacity(3 + 4 * n);
    z.extend_from_slice(base.coords());
    debug_assert!((tangent[0] - 1.0).abs() <= 1e-12);
    z.extend_from_slice(&tangent[1..]); // (v, pd0, pd); ṫ = 1 is implicit
    let z = SpacePoint::new(SpaceId::new(SpaceTag::J1Tilde, n), z)?;
    let lhs = apply_map(MapId::ATilde, &z)?;

    // full differential of L in T*(J¹π): (t, q, v, L_t, L_q, L_v)
    let jet = sys.jet(j.coords());
    let mut rhs = Vec::with_capacity(2 + 4 * n);
    rhs.extend_from_slice(j.coords());
    rhs.push(jet.gradient[0]);
    rhs.extend_from_slice(&jet.gradient[1..]);
    Ok(linalg::max_abs_diff(lhs.coords(), &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{kernel_basis, skew_rank, RANK_TOL};
    use crate::scenarios;

    fn point(tag: SpaceTag, n: usize, coords: &[f64]) -> SpacePoint {
        SpacePoint::new(SpaceId::new(tag, n), coords.to_vec()).unwrap()
    }

    #[test]
    fn map_images_match_the_displayed_formulas() {
        let a_pi = apply_map(
            MapId::APi,
            &point(SpaceTag::J1Pi1Star, 1, &[0.5, 1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(a_pi.coords(), &[0.5, 1.0, 3.0, 4.0, 2.0]);

        let b_pi = apply_map(
            MapId::BPi,
            &point(SpaceTag::J1Pi1Star, 1, &[0.5, 1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(b_pi.coords(), &[0.5, 1.0, 2.0, -4.0, 3.0]);

        let a_tilde = apply_map(
            MapId::ATilde,
            &point(SpaceTag::J1Tilde, 1, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        )
        .unwrap();
        assert_eq!(a_tilde.coords(), &[0.0, 1.0, 4.0, 5.0, 6.0, 3.0]);

        let b_tilde = apply_map(
            MapId::BTilde,
            &point(SpaceTag::J1Tilde, 1, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        )
        .unwrap();
        assert_eq!(b_tilde.coords(), &[0.0, 1.0, 2.0, 3.0, -5.0, -6.0, 4.0]);

        let psi = apply_map(
            MapId::Psi,
            &point(SpaceTag::TStarJ1Pi, 1, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]),
        )
        .unwrap();
        assert_eq!(psi.coords(), &[0.0, 1.0, 5.0, 2.0, 4.0]);

        // base manifold = the time axis alone (n = 0)
        let a_m = apply_map(
            MapId::AM,
            &point(SpaceTag::TTStarM, 0, &[1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(a_m.coords(), &[1.0, 3.0, 4.0, 2.0]);
    }

    #[test]
    fn structural_jacobians_are_constant_signed_permutations() {
        let mut rng = SplitMix64::new(13);
        for id in [
            MapId::AM,
            MapId::Psi,
            MapId::APi,
            MapId::APiInv,
            MapId::BPi,
            MapId::BPiInv,
            MapId::ATilde,
            MapId::BTilde,
            MapId::BTildeInv,
        ] {
            let map = StructuralMap { id, n: 2 };
            let x1 = SpacePoint::new(map.source(), rng.sample_box(map.source().dim())).unwrap();
            let x2 = SpacePoint::new(map.source(), rng.sample_box(map.source().dim())).unwrap();
            let j1 = map.jacobian(&x1).unwrap();
            let j2 = map.jacobian(&x2).unwrap();
            assert_eq!(j1.mat, j2.mat, "{} is affine", id.name());
            for i in 0..j1.mat.rows() {
                for j in 0..j1.mat.cols() {
                    let v = j1.mat[(i, j)];
                    assert!(v == 0.0 || v == 1.0 || v == -1.0);
                }
            }
        }
    }

    #[test]
    fn wrong_source_space_is_rejected() {
        let x = point(SpaceTag::VStar, 1, &[0.0, 1.0, 2.0]);
        assert!(matches!(
            apply_map(MapId::APi, &x),
            Err(CoreError::WrongSpace { .. })
        ));
    }

    #[test]
    fn round_trips_are_exact_identities() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..100 {
            let x = point(SpaceTag::J1Pi1Star, 2, &rng.sample_box(9));
            let back = apply_map(MapId::APiInv, &apply_map(MapId::APi, &x).unwrap()).unwrap();
            assert_eq!(back, x);
            let back = apply_map(MapId::BPiInv, &apply_map(MapId::BPi, &x).unwrap()).unwrap();
            assert_eq!(back, x);

            let y = point(SpaceTag::J1Tilde, 2, &rng.sample_box(11));
            let back = apply_map(MapId::BTildeInv, &apply_map(MapId::BTilde, &y).unwrap()).unwrap();
            assert_eq!(back, y);
        }
    }

    #[test]
    fn a_tilde_forgets_the_time_momentum() {
        let mut rng = SplitMix64::new(23);
        for _ in 0..100 {
            let mut c = rng.sample_box(7);
            let shift = rng.uniform(-5.0, 5.0);
            let x = point(SpaceTag::J1Tilde, 1, &c);
            let image = apply_map(MapId::ATilde, &x).unwrap();
            c[2] += shift; // p0 slot
            let shifted = point(SpaceTag::J1Tilde, 1, &c);
            assert_eq!(apply_map(MapId::ATilde, &shifted).unwrap(), image);
        }
    }

    #[test]
    fn b_tilde_is_equivariant_under_time_momentum_shifts() {
        let mut rng = SplitMix64::new(29);
        for _ in 0..100 {
            let mut c = rng.sample_box(7);
            let shift = rng.uniform(-5.0, 5.0);
            let image = apply_map(MapId::BTilde, &point(SpaceTag::J1Tilde, 1, &c)).unwrap();
            c[2] += shift;
            let shifted_image = apply_map(MapId::BTilde, &point(SpaceTag::J1Tilde, 1, &c)).unwrap();
            // only the p0 output coordinate moves, and by the same shift
            for (i, (a, b)) in image
                .coords()
                .iter()
                .zip(shifted_image.coords())
                .enumerate()
            {
                if i == 2 {
                    assert!((b - a - shift).abs() <= 1e-15);
                } else {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn a_pi_is_compatible_with_the_base_projections() {
        // the (t, q, v) part of the output depends only on (t, q, v) of the
        // input, matching the jet projection
        let mut rng = SplitMix64::new(31);
        for _ in 0..50 {
            let c = rng.sample_box(5);
            let image = apply_map(MapId::APi, &point(SpaceTag::J1Pi1Star, 1, &c)).unwrap();
            assert_eq!(image.coords()[0], c[0]);
            assert_eq!(image.coords()[1], c[1]);
            assert_eq!(image.coords()[2], c[3]); // v slot of the source
        }
    }

    #[test]
    fn canonical_structures_have_the_stated_entries() {
        let lam = canonical_structure(StructureId::LambdaJ1Pi1Star, 1);
        assert_eq!(lam.mat()[(1, 4)], 1.0); // (q, pd)
        assert_eq!(lam.mat()[(3, 2)], 1.0); // (v, p)
        assert_eq!(skew_rank(&lam, RANK_TOL), 4);

        let omega = canonical_structure(StructureId::OmegaJ1Tilde, 1);
        assert_eq!(omega.dim(), 7);
        assert_eq!(omega.mat()[(0, 5)], 1.0); // (t, pd0)
        assert_eq!(omega.mat()[(1, 6)], 1.0); // (q, pd)
        assert_eq!(omega.mat()[(4, 3)], 1.0); // (v, p)

        let phi = canonical_structure(StructureId::PhiVHat1, 1);
        assert_eq!(phi.dim(), 7);
        assert_eq!(phi.mat()[(0, 4)], 1.0); // (t, pt)
        assert_eq!(phi.mat()[(1, 5)], 1.0); // (q, pq)
        assert_eq!(phi.mat()[(3, 6)], 1.0); // (p, pp)
    }

    #[test]
    fn kernels_of_the_corank_one_forms_are_the_time_momentum_direction() {
        for n in 1..=3 {
            for id in [StructureId::OmegaJ1Tilde, StructureId::PhiVHat1] {
                let omega = canonical_structure(id, n);
                assert_eq!(skew_rank(&omega, RANK_TOL), 2 + 4 * n);
                let kernel = kernel_basis(&omega, RANK_TOL);
                assert_eq!(kernel.len(), 1);
                let p0_slot = 1 + n;
                for (i, x) in kernel[0].iter().enumerate() {
                    if i == p0_slot {
                        assert!((x.abs() - 1.0).abs() <= 1e-12);
                    } else {
                        assert!(x.abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn symplectic_structures_have_full_rank() {
        assert_eq!(
            skew_rank(&canonical_structure(StructureId::OmegaPMu, 1), RANK_TOL),
            6
        );
        assert_eq!(
            skew_rank(&canonical_structure(StructureId::OmegaJ1Pi, 1), RANK_TOL),
            6
        );
        assert!(kernel_basis(&canonical_structure(StructureId::OmegaJ1Pi, 1), RANK_TOL).is_empty());
    }

    #[test]
    fn structure_theorems_hold_exactly() {
        for n in [1, 2, 3] {
            for (id, sign) in [
                (MapId::APi, 1.0),
                (MapId::BPi, -1.0),
                (MapId::ATilde, 1.0),
                (MapId::BTilde, -1.0),
            ] {
                let report = verify_structure_map(id, n, 50, 7, 1e-12).unwrap();
                assert!(report.pass, "{} failed at n={n}", report.map);
                assert_eq!(report.max_error, 0.0);
                assert_eq!(report.sign, sign);
            }
        }
    }

    #[test]
    fn verify_rejects_non_theorem_maps() {
        assert!(verify_structure_map(MapId::Psi, 1, 10, 0, 1e-12).is_err());
    }

    #[test]
    fn dl_tilde_examples() {
        let free = scenarios::builtin("free_particle", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let j = point(SpaceTag::J1Pi, 1, &[0.0, 0.0, 2.0]);
        let s = dl_tilde(&free, &j).unwrap();
        assert_eq!(s.coords(), &[0.0, 0.0, 2.0, 0.0, 2.0]);

        let harmonic = scenarios::builtin("harmonic", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let j = point(SpaceTag::J1Pi, 1, &[0.0, 1.0, 0.0]);
        let s = dl_tilde(&harmonic, &j).unwrap();
        assert_eq!(s.coords(), &[0.0, 1.0, 0.0, -1.0, 0.0]);

        // pulling the section back through A_pi lands on the graph of the
        // Euler-Lagrange data
        let j = point(SpaceTag::J1Pi, 1, &[0.0, 0.0, 2.0]);
        let z = apply_map(MapId::APiInv, &dl_tilde(&free, &j).unwrap()).unwrap();
        assert_eq!(z.coords(), &[0.0, 0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn dh_tilde_examples() {
        let sc = scenarios::builtin("harmonic", 1).unwrap();
        let h = sc.hamiltonian_or_derived().unwrap();
        let v = point(SpaceTag::VStar, 1, &[0.0, 1.0, 2.0]);
        let s = dh_tilde(&h, &v).unwrap();
        assert!(linalg::max_abs_diff(s.coords(), &[0.0, 1.0, 2.0, 1.0, 2.0]) <= 1e-12);

        // b_pi^{-1} of the section is the Reeb graph point
        let z = apply_map(MapId::BPiInv, &s).unwrap();
        let reeb = h.reeb_field(&v).unwrap();
        assert!((z.coords()[3] - reeb[1]).abs() <= 1e-12); // v = ∂H/∂p
        assert!((z.coords()[4] - reeb[2]).abs() <= 1e-12); // pd = -∂H/∂q
    }

    #[test]
    fn dfh_examples() {
        let sc = scenarios::builtin("harmonic", 1).unwrap();
        let h = sc.hamiltonian_or_derived().unwrap();
        let a = point(SpaceTag::TStarM, 1, &[0.0, 1.0, 5.0, 2.0]);
        let s = dfh(&h, &a).unwrap();
        assert!(linalg::max_abs_diff(s.coords(), &[0.0, 1.0, 5.0, 2.0, 0.0, 1.0, 2.0]) <= 1e-12);

        // covector part is independent of p0
        let a2 = point(SpaceTag::TStarM, 1, &[0.0, 1.0, 9.0, 2.0]);
        let s2 = dfh(&h, &a2).unwrap();
        assert_eq!(&s.coords()[4..], &s2.coords()[4..]);
    }

    #[test]
    fn lemma_residuals_vanish_for_regular_scenarios() {
        let mut rng = SplitMix64::new(41);
        for name in scenarios::REGULAR_NAMES {
            let sys = scenarios::builtin(name, 1).unwrap().lagrangian.unwrap();
            for _ in 0..100 {
                let mut c = rng.sample_box(3);
                c[0] = rng.uniform(-1.0, 1.0);
                let j = point(SpaceTag::J1Pi, 1, &c);
                assert!(lemma_l1_residual(&sys, &j).unwrap() <= 1e-12, "{name}");
                assert!(lemma_l2_residual(&sys, &j).unwrap() <= 1e-12, "{name}");
            }
        }
    }
}
