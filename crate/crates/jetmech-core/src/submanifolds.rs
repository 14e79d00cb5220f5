//! Pointwise Lagrangian-submanifold verification for Poisson and
//! presymplectic structures, membership residuals for the four dynamical
//! submanifolds, and equality checks between the Lagrangian and Hamiltonian
//! pictures.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::{kernel_basis, sharp_matrix, skew_rank, SkewTensor, TensorKind};
use crate::linalg::{self, Mat};
use crate::mechanics::{HamiltonianSystem, LagrangianSystem};
use crate::rng::SplitMix64;
use crate::space::{SpaceId, SpacePoint, SpaceTag};

/// Residual bound under which the two dynamical submanifolds count as equal
/// (the Legendre inversion is resolved to `1e-12`, so `1e-10` leaves slack
/// for the induced Hamiltonian derivatives).
pub const EQUALITY_TOL: f64 = 1e-10;

/// A parametrized immersion into one of the coordinate spaces, with its
/// exact Jacobian (`dim x param_dim`, columns are parameter directions).
pub struct ParamImmersion {
    space: SpaceId,
    param_dim: usize,
    map: Box<dyn Fn(&[f64]) -> Result<SpacePoint> + Send + Sync>,
    jac: Box<dyn Fn(&[f64]) -> Result<Mat> + Send + Sync>,
}

impl ParamImmersion {
    pub fn new(
        space: SpaceId,
        param_dim: usize,
        map: impl Fn(&[f64]) -> Result<SpacePoint> + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Result<Mat> + Send + Sync + 'static,
    ) -> Self {
        Self {
            space,
            param_dim,
            map: Box::new(map),
            jac: Box::new(jac),
        }
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn point_at(&self, params: &[f64]) -> Result<SpacePoint> {
        assert_eq!(params.len(), self.param_dim, "parameter arity mismatch");
        (self.map)(params)
    }

    pub fn jacobian_at(&self, params: &[f64]) -> Result<Mat> {
        assert_eq!(params.len(), self.param_dim, "parameter arity mismatch");
        (self.jac)(params)
    }

    /// Image of the section induced by `dL` in the cotangent quotient,
    /// parametrized over `(t, q, v)`.
    pub fn dl_image(sys: &LagrangianSystem) -> Self {
        let n = sys.n();
        let space = SpaceId::new(SpaceTag::QuotTStarJ1Pi, n);
        let for_map = sys.clone();
        let for_jac = sys.clone();
        Self::new(
            space,
            1 + 2 * n,
            move |params| {
                let j = SpacePoint::new(for_map.jet_space(), params.to_vec())?;
                crate::triples::dl_tilde(&for_map, &j)
            },
            move |params| {
                let jet = for_jac.jet(params);
                let base = 1 + 2 * n;
                let mut m = Mat::zeros(1 + 4 * n, base);
                for i in 0..base {
                    m[(i, i)] = 1.0;
                }
                // rows of ∂L/∂q and ∂L/∂v are Hessian rows
                for a in 0..2 * n {
                    for c in 0..base {
                        m[(base + a, c)] = jet.hessian[(1 + a, c)];
                    }
                }
                Ok(m)
            },
        )
    }

    /// Image of the section induced by the Hamiltonian section in the
    /// phase-bundle quotient, parametrized over `(t, q, p)`.
    pub fn dh_image(sys: &HamiltonianSystem) -> Self {
        let n = sys.n();
        let space = SpaceId::new(SpaceTag::PMuQuot, n);
        let for_map = sys.clone();
        let for_jac = sys.clone();
        Self::new(
            space,
            1 + 2 * n,
            move |params| {
                let v = SpacePoint::new(for_map.phase_space(), params.to_vec())?;
                crate::triples::dh_tilde(&for_map, &v)
            },
            move |params| {
                let jet = for_jac.jet2(params)?;
                let base = 1 + 2 * n;
                let mut m = Mat::zeros(1 + 4 * n, base);
                for i in 0..base {
                    m[(i, i)] = 1.0;
                }
                for a in 0..2 * n {
                    for c in 0..base {
                        m[(base + a, c)] = jet.hessian[(1 + a, c)];
                    }
                }
                Ok(m)
            },
        )
    }

    /// Image of `dF_h` in the affine slice, parametrized over the extended
    /// momentum space `(t, q, p0, p)`.
    pub fn dfh_image(sys: &HamiltonianSystem) -> Self {
        let n = sys.n();
        let space = SpaceId::new(SpaceTag::VHat1, n);
        let for_map = sys.clone();
        let for_jac = sys.clone();
        Self::new(
            space,
            2 + 2 * n,
            move |params| {
                let a = SpacePoint::new(SpaceId::new(SpaceTag::TStarM, n), params.to_vec())?;
                crate::triples::dfh(&for_map, &a)
            },
            move |params| {
                // H sees (t, q, p); the p0 parameter column of the covector
                // rows is zero
                let mut tqp = Vec::with_capacity(1 + 2 * n);
                tqp.push(params[0]);
                tqp.extend_from_slice(&params[1..1 + n]);
                tqp.extend_from_slice(&params[2 + n..]);
                let jet = for_jac.jet2(&tqp)?;
                let base = 2 + 2 * n;
                let mut m = Mat::zeros(3 + 4 * n, base);
                for i in 0..base {
                    m[(i, i)] = 1.0;
                }
                for a in 0..1 + 2 * n {
                    // Hessian columns (t, q, p) map to parameter columns
                    // (0, 1..1+n, 2+n..2+2n)
                    m[(base + a, 0)] = jet.hessian[(a, 0)];
                    for b in 0..n {
                        m[(base + a, 1 + b)] = jet.hessian[(a, 1 + b)];
                        m[(base + a, 2 + n + b)] = jet.hessian[(a, 1 + n + b)];
                    }
                }
                Ok(m)
            },
        )
    }

    /// The extended Lagrangian submanifold in the extended jet space,
    /// parametrized over `(t, q, v, p0)` — the time momentum is a free
    /// parameter because the defining equations do not constrain it.
    pub fn extended_lagrangian_image(sys: &LagrangianSystem) -> Self {
        let n = sys.n();
        let space = SpaceId::new(SpaceTag::J1Tilde, n);
        let for_map = sys.clone();
        let for_jac = sys.clone();
        Self::new(
            space,
            2 + 2 * n,
            move |params| {
                let jet = for_map.jet(&params[..1 + 2 * n]);
                let p0 = params[1 + 2 * n];
                let mut z = Vec::with_capacity(3 + 4 * n);
                z.push(params[0]);
                z.extend_from_slice(&params[1..1 + n]); // q
                z.push(p0);
                z.extend_from_slice(&jet.gradient[1 + n..]); // p = L_v
                z.extend_from_slice(&params[1 + n..1 + 2 * n]); // v
                z.push(jet.gradient[0]); // pd0 = L_t
                z.extend_from_slice(&jet.gradient[1..1 + n]); // pd = L_q
                SpacePoint::new(space, z)
            },
            move |params| {
                let jet = for_jac.jet(&params[..1 + 2 * n]);
                // rows in (t, q, p0, p, v, pd0, pd) order against parameters
                // (t, q, v, p0)
                let mut m = Mat::zeros(3 + 4 * n, 2 + 2 * n);
                m[(0, 0)] = 1.0;
                for i in 0..n {
                    m[(1 + i, 1 + i)] = 1.0; // q
                    m[(2 + 2 * n + i, 1 + n + i)] = 1.0; // v
                }
                m[(1 + n, 1 + 2 * n)] = 1.0; // p0 parameter
                for a in 0..n {
                    for c in 0..1 + 2 * n {
                        m[(2 + n + a, c)] = jet.hessian[(1 + n + a, c)]; // p rows
                        m[(3 + 3 * n + a, c)] = jet.hessian[(1 + a, c)]; // pd rows
                    }
                }
                for c in 0..1 + 2 * n {
                    m[(2 + 3 * n, c)] = jet.hessian[(0, c)]; // pd0 row
                }
                Ok(m)
            },
        )
    }

    /// The identity immersion of a whole space (a deliberately non-Lagrangian
    /// test subject).
    pub fn identity(space: SpaceId) -> Self {
        let dim = space.dim();
        Self::new(
            space,
            dim,
            move |params| SpacePoint::new(space, params.to_vec()),
            move |_| Ok(Mat::identity(dim)),
        )
    }
}

/// Per-immersion verification report; `max_violation` is the largest bracket
/// value (Poisson case) or pulled-back form entry (presymplectic case) seen.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmanifoldCheckReport {
    pub points_tested: usize,
    pub points_skipped: usize,
    pub max_violation: f64,
    /// Sorted, deduplicated intersection dimensions observed across points.
    pub intersection_dims: Vec<usize>,
    pub expected_dim: usize,
    pub pass: bool,
}

fn is_skippable(err: &CoreError) -> bool {
    matches!(
        err,
        CoreError::SingularLagrangian | CoreError::NoConvergence { .. }
    )
}

/// Checks the Lagrangian-submanifold conditions for a Poisson structure at
/// the given parameter values: the bracket vanishes on the sharp-preimage of
/// the tangent spaces, and the tangent spaces meet the characteristic
/// distribution in half its dimension.
pub fn poisson_lagrangian_check(
    immersion: &ParamImmersion,
    lambda: &SkewTensor,
    params: &[Vec<f64>],
    tol: f64,
) -> Result<SubmanifoldCheckReport> {
    if lambda.kind() != TensorKind::Bivector {
        return Err(CoreError::InvalidArgument(
            "poisson_lagrangian_check expects a bivector".into(),
        ));
    }
    if lambda.space() != immersion.space() {
        return Err(CoreError::WrongSpace {
            context: "poisson_lagrangian_check",
            expected: immersion.space(),
            got: lambda.space(),
        });
    }
    let dim = immersion.space().dim();
    let expected_dim = skew_rank(lambda, tol) / 2;
    let sharp = sharp_matrix(lambda);
    let image_basis = linalg::column_space(lambda.mat(), tol);

    let mut max_violation = 0.0_f64;
    let mut dims: Vec<usize> = Vec::new();
    let mut tested = 0;
    let mut skipped = 0;
    let mut pass = true;

    for p in params {
        let jac = match immersion.jacobian_at(p) {
            Ok(j) => j,
            Err(e) if is_skippable(&e) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let jac_rank = linalg::rank(&jac, tol);
        if jac_rank < immersion.param_dim() {
            return Err(CoreError::ImmersionRankDeficient {
                rank: jac_rank,
                param_dim: immersion.param_dim(),
            });
        }
        tested += 1;

        // preimage (Λ♯)^{-1}(TC): null space of [Λ♯ | -J], projected to the
        // covector part (injective since J has full column rank)
        let stacked = sharp.hstack(&jac.scale(-1.0));
        let null = linalg::null_space(&stacked, tol);
        let mut covectors: Vec<Vec<f64>> = Vec::with_capacity(null.len());
        for vector in &null {
            let alpha = &vector[..dim];
            let norm = linalg::norm2(alpha);
            if norm > tol {
                covectors.push(alpha.iter().map(|x| x / norm).collect());
            }
        }
        for a in &covectors {
            for b in &covectors {
                max_violation = max_violation.max(lambda.pairing(a, b).abs());
            }
        }

        let tangent_basis: Vec<Vec<f64>> = (0..jac.cols()).map(|j| jac.column(j)).collect();
        let inter = linalg::intersection_dim(&tangent_basis, &image_basis, tol);
        if !dims.contains(&inter) {
            dims.push(inter);
        }
        if inter != expected_dim {
            pass = false;
        }
    }
    dims.sort_unstable();
    if max_violation > tol {
        pass = false;
    }
    if tested == 0 {
        pass = false;
    }
    Ok(SubmanifoldCheckReport {
        points_tested: tested,
        points_skipped: skipped,
        max_violation,
        intersection_dims: dims,
        expected_dim,
        pass,
    })
}

/// Checks the Lagrangian-submanifold conditions for a presymplectic
/// structure: the pullback of the form vanishes and
/// `param_dim = rank(ω)/2 + dim(TC ∩ ker ω)`.
pub fn presymplectic_lagrangian_check(
    immersion: &ParamImmersion,
    omega: &SkewTensor,
    params: &[Vec<f64>],
    tol: f64,
) -> Result<SubmanifoldCheckReport> {
    if omega.kind() != TensorKind::TwoForm {
        return Err(CoreError::InvalidArgument(
            "presymplectic_lagrangian_check expects a 2-form".into(),
        ));
    }
    if omega.space() != immersion.space() {
        return Err(CoreError::WrongSpace {
            context: "presymplectic_lagrangian_check",
            expected: immersion.space(),
            got: omega.space(),
        });
    }
    let half_rank = skew_rank(omega, tol) / 2;
    let kernel = kernel_basis(omega, tol);
    // the dimension identity asks for param_dim = rank/2 + ker-intersection
    let expected_dim = immersion.param_dim().saturating_sub(half_rank);

    let mut max_violation = 0.0_f64;
    let mut dims: Vec<usize> = Vec::new();
    let mut tested = 0;
    let mut skipped = 0;
    let mut pass = true;

    for p in params {
        let jac = match immersion.jacobian_at(p) {
            Ok(j) => j,
            Err(e) if is_skippable(&e) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let jac_rank = linalg::rank(&jac, tol);
        if jac_rank < immersion.param_dim() {
            return Err(CoreError::ImmersionRankDeficient {
                rank: jac_rank,
                param_dim: immersion.param_dim(),
            });
        }
        tested += 1;

        let pulled = jac.transpose().matmul(omega.mat()).matmul(&jac);
        max_violation = max_violation.max(pulled.max_abs());

        let tangent_basis: Vec<Vec<f64>> = (0..jac.cols()).map(|j| jac.column(j)).collect();
        let inter = linalg::intersection_dim(&tangent_basis, &kernel, tol);
        if !dims.contains(&inter) {
            dims.push(inter);
        }
        if immersion.param_dim() != half_rank + inter {
            pass = false;
        }
    }
    dims.sort_unstable();
    if max_violation > tol {
        pass = false;
    }
    if tested == 0 {
        pass = false;
    }
    Ok(SubmanifoldCheckReport {
        points_tested: tested,
        points_skipped: skipped,
        max_violation,
        intersection_dims: dims,
        expected_dim,
        pass,
    })
}

/// Which dynamical submanifold a point is tested against.
pub enum SubmanifoldPoint<'a> {
    /// `S_L` in the momentum jet space.
    RestrictedLagrangian(&'a LagrangianSystem),
    /// `S_h` (the Reeb graph) in the momentum jet space.
    RestrictedHamiltonian(&'a HamiltonianSystem),
    /// The extended Lagrangian submanifold in the extended jet space.
    ExtendedLagrangian(&'a LagrangianSystem),
    /// The extended Hamiltonian submanifold in the extended jet space.
    ExtendedHamiltonian(&'a HamiltonianSystem),
}

/// Defining-equation residuals of the submanifold at `z`; the zero vector is
/// equivalent to membership.
pub fn membership_residual(which: SubmanifoldPoint<'_>, z: &SpacePoint) -> Result<Vec<f64>> {
    match which {
        SubmanifoldPoint::RestrictedLagrangian(sys) => {
            let n = sys.n();
            z.expect_space(
                SpaceId::new(SpaceTag::J1Pi1Star, n),
                "membership_residual(S_L)",
            )?;
            let c = z.coords();
            let (t, q, p, v, pd) = (
                c[0],
                &c[1..1 + n],
                &c[1 + n..1 + 2 * n],
                &c[1 + 2 * n..1 + 3 * n],
                &c[1 + 3 * n..],
            );
            let mut jcoords = vec![t];
            jcoords.extend_from_slice(q);
            jcoords.extend_from_slice(v);
            let jet = sys.jet(&jcoords);
            let mut out = Vec::with_capacity(2 * n);
            for a in 0..n {
                out.push(p[a] - jet.gradient[1 + n + a]);
            }
            for a in 0..n {
                out.push(pd[a] - jet.gradient[1 + a]);
            }
            Ok(out)
        }
        SubmanifoldPoint::RestrictedHamiltonian(sys) => {
            let n = sys.n();
            z.expect_space(
                SpaceId::new(SpaceTag::J1Pi1Star, n),
                "membership_residual(S_H)",
            )?;
            let c = z.coords();
            let (t, q, p, v, pd) = (
                c[0],
                &c[1..1 + n],
                &c[1 + n..1 + 2 * n],
                &c[1 + 2 * n..1 + 3 * n],
                &c[1 + 3 * n..],
            );
            let mut tqp = vec![t];
            tqp.extend_from_slice(q);
            tqp.extend_from_slice(p);
            let jet = sys.jet2(&tqp)?;
            let mut out = Vec::with_capacity(2 * n);
            for a in 0..n {
                out.push(v[a] - jet.gradient[1 + n + a]);
            }
            for a in 0..n {
                out.push(pd[a] + jet.gradient[1 + a]);
            }
            Ok(out)
        }
        SubmanifoldPoint::ExtendedLagrangian(sys) => {
            let n = sys.n();
            z.expect_space(
                SpaceId::new(SpaceTag::J1Tilde, n),
                "membership_residual(S_L_tilde)",
            )?;
            let c = z.coords();
            let (t, q, p, v, pd0, pd) = (
                c[0],
                &c[1..1 + n],
                &c[2 + n..2 + 2 * n],
                &c[2 + 2 * n..2 + 3 * n],
                c[2 + 3 * n],
                &c[3 + 3 * n..],
            );
            let mut jcoords = vec![t];
            jcoords.extend_from_slice(q);
            jcoords.extend_from_slice(v);
            let jet = sys.jet(&jcoords);
            let mut out = Vec::with_capacity(2 * n + 1);
            for a in 0..n {
                out.push(p[a] - jet.gradient[1 + n + a]);
            }
            for a in 0..n {
                out.push(pd[a] - jet.gradient[1 + a]);
            }
            out.push(pd0 - jet.gradient[0]);
            Ok(out)
        }
        SubmanifoldPoint::ExtendedHamiltonian(sys) => {
            let n = sys.n();
            z.expect_space(
                SpaceId::new(SpaceTag::J1Tilde, n),
                "membership_residual(S_H_tilde)",
            )?;
            let c = z.coords();
            let (t, q, p, v, pd0, pd) = (
                c[0],
                &c[1..1 + n],
                &c[2 + n..2 + 2 * n],
                &c[2 + 2 * n..2 + 3 * n],
                c[2 + 3 * n],
                &c[3 + 3 * n..],
            );
            let mut tqp = vec![t];
            tqp.extend_from_slice(q);
            tqp.extend_from_slice(p);
            let jet = sys.jet2(&tqp)?;
            let mut out = Vec::with_capacity(2 * n + 1);
            for a in 0..n {
                out.push(v[a] - jet.gradient[1 + n + a]);
            }
            for a in 0..n {
                out.push(pd[a] + jet.gradient[1 + a]);
            }
            out.push(pd0 + jet.gradient[0]);
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualityVariant {
    Restricted,
    Extended,
}

impl EqualityVariant {
    pub fn name(self) -> &'static str {
        match self {
            EqualityVariant::Restricted => "restricted",
            EqualityVariant::Extended => "extended",
        }
    }
}

/// Cross-membership report for `S_L = S_h` (or the extended pair).
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityReport {
    pub scenario: String,
    pub variant: &'static str,
    pub samples: usize,
    pub seed: u64,
    pub skipped: usize,
    /// Max Hamiltonian-membership residual over sampled Lagrangian points.
    pub max_lagrangian_side: f64,
    /// Max Lagrangian-membership residual over sampled Hamiltonian points.
    pub max_hamiltonian_side: f64,
    pub pass: bool,
}

/// Samples each submanifold through its parametrization and measures
/// membership in the other one, with the Hamiltonian induced from `L`
/// through the Legendre transform. For the extended variant the time
/// momentum is sampled freely: both sides leave it unconstrained.
pub fn equality_check(
    sys: &LagrangianSystem,
    variant: EqualityVariant,
    samples: usize,
    seed: u64,
) -> Result<EqualityReport> {
    let n = sys.n();
    let ham = HamiltonianSystem::derived(sys.clone());
    let mut rng = SplitMix64::new(seed);
    let mut skipped = 0usize;
    let mut max_lag = 0.0_f64;
    let mut max_ham = 0.0_f64;

    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    for _ in 0..samples {
        // Lagrangian side: a point of S_L (or its extended version) from
        // parameters (t, q, v) [+ p0]
        let jet_coords = rng.sample_box(1 + 2 * n);
        let p0 = rng.uniform(-2.0, 2.0);
        let jet = sys.jet(&jet_coords);
        let q = &jet_coords[1..1 + n];
        let v = &jet_coords[1 + n..];
        let residual = match variant {
            EqualityVariant::Restricted => {
                let mut z = vec![jet_coords[0]];
                z.extend_from_slice(q);
                z.extend_from_slice(&jet.gradient[1 + n..]); // p = L_v
                z.extend_from_slice(v);
                z.extend_from_slice(&jet.gradient[1..1 + n]); // pd = L_q
                let z = SpacePoint::new(SpaceId::new(SpaceTag::J1Pi1Star, n), z)?;
                membership_residual(SubmanifoldPoint::RestrictedHamiltonian(&ham), &z)
            }
            EqualityVariant::Extended => {
                let mut z = vec![jet_coords[0]];
                z.extend_from_slice(q);
                z.push(p0);
                z.extend_from_slice(&jet.gradient[1 + n..]);
                z.extend_from_slice(v);
                z.push(jet.gradient[0]); // pd0 = L_t
                z.extend_from_slice(&jet.gradient[1..1 + n]);
                let z = SpacePoint::new(SpaceId::new(SpaceTag::J1Tilde, n), z)?;
                membership_residual(SubmanifoldPoint::ExtendedHamiltonian(&ham), &z)
            }
        };
        match residual {
            Ok(r) => max_lag = max_lag.max(max_abs(&r)),
            Err(e) if is_skippable(&e) => skipped += 1,
            Err(e) => return Err(e),
        }

        // Hamiltonian side: a point of the Reeb graph from (t, q, p) [+ p0]
        let tqp = rng.sample_box(1 + 2 * n);
        let p0 = rng.uniform(-2.0, 2.0);
        let residual = match ham.jet2(&tqp) {
            Ok(jet_h) => {
                let q = &tqp[1..1 + n];
                let p = &tqp[1 + n..];
                match variant {
                    EqualityVariant::Restricted => {
                        let mut z = vec![tqp[0]];
                        z.extend_from_slice(q);
                        z.extend_from_slice(p);
                        z.extend_from_slice(&jet_h.gradient[1 + n..]); // v = H_p
                        z.extend(jet_h.gradient[1..1 + n].iter().map(|g| -g)); // pd = -H_q
                        let z = SpacePoint::new(SpaceId::new(SpaceTag::J1Pi1Star, n), z)?;
                        membership_residual(SubmanifoldPoint::RestrictedLagrangian(sys), &z)
                    }
                    EqualityVariant::Extended => {
                        let mut z = vec![tqp[0]];
                        z.extend_from_slice(q);
                        z.push(p0);
                        z.extend_from_slice(p);
                        z.extend_from_slice(&jet_h.gradient[1 + n..]);
                        z.push(-jet_h.gradient[0]); // pd0 = -H_t
                        z.extend(jet_h.gradient[1..1 + n].iter().map(|g| -g));
                        let z = SpacePoint::new(SpaceId::new(SpaceTag::J1Tilde, n), z)?;
                        membership_residual(SubmanifoldPoint::ExtendedLagrangian(sys), &z)
                    }
                }
            }
            Err(e) if is_skippable(&e) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        match residual {
            Ok(r) => max_ham = max_ham.max(max_abs(&r)),
            Err(e) if is_skippable(&e) => skipped += 1,
            Err(e) => return Err(e),
        }
    }

    Ok(EqualityReport {
        scenario: String::from(sys.name()),
        variant: variant.name(),
        samples,
        seed,
        skipped,
        max_lagrangian_side: max_lag,
        max_hamiltonian_side: max_ham,
        pass: max_lag <= EQUALITY_TOL && max_ham <= EQUALITY_TOL,
    })
}
