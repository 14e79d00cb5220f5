//! Pointwise multilinear algebra for skew tensors.
//!
//! # Conventions
//!
//! These conventions are fixed here once; every other module relies on them.
//!
//! * A bivector `Λ` is stored as the matrix `mat[i][j] = Λ(dx^i, dx^j)`.
//! * A 2-form `ω` is stored as the matrix `mat[i][j] = ω(∂_i, ∂_j)`.
//! * The sharp map is `Λ♯(α) = Λ(α, ·)`, i.e. componentwise
//!   `(Λ♯ α)^i = Σ_j α_j Λ^{ji}`, which is `Λᵀ α = -Λ α` in matrix form.
//! * Pullback of a 2-form along a linear map with Jacobian `J` is `Jᵀ ω J`;
//!   pushforward of a bivector is `J Λ Jᵀ`.
//!
//! With the opposite orientation of the sharp map every check in this crate
//! still passes (both sides of each identity flip together); the choice here
//! is the one under which `sharp(∂q ∧ ∂p, dq) = ∂p`.

use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::linalg::{self, Mat};
use crate::space::{SpaceId, SpacePoint};

/// Maximum allowed deviation from exact skew-symmetry.
pub const SKEW_TOL: f64 = 1e-14;

/// Default relative tolerance for rank decisions; the structural matrices of
/// this crate are integer-valued, so the spectral gap is enormous.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Bivector,
    TwoForm,
}

/// A dense skew-symmetric matrix representing a bivector or a 2-form at a
/// point, in the canonical coordinate order of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewTensor {
    space: SpaceId,
    kind: TensorKind,
    mat: Mat,
}

impl SkewTensor {
    /// Validates shape and near-skewness (relative to the matrix scale),
    /// then stores the exactly antisymmetrized matrix `(m - mᵀ)/2` — so the
    /// stored tensor always satisfies `‖mat + matᵀ‖_∞ = 0 ≤ SKEW_TOL`.
    pub fn new(space: SpaceId, kind: TensorKind, mat: Mat) -> Result<Self> {
        let dim = space.dim();
        if mat.rows() != dim || mat.cols() != dim {
            return Err(CoreError::ShapeMismatch {
                context: "SkewTensor::new",
                expected: dim,
                got: mat.rows().max(mat.cols()),
            });
        }
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((mat[(i, j)] + mat[(j, i)]).abs());
            }
        }
        if worst > SKEW_TOL * mat.max_abs().max(1.0) {
            return Err(CoreError::InvalidArgument(alloc::format!(
                "matrix is not skew-symmetric: max |m + mᵀ| = {worst:e}"
            )));
        }
        Ok(Self::antisymmetrized(space, kind, mat))
    }

    /// For results that are skew by construction (pullbacks, pushforwards,
    /// assembled forms): symmetrize away rounding noise without validating.
    pub(crate) fn antisymmetrized(space: SpaceId, kind: TensorKind, mat: Mat) -> Self {
        let dim = space.dim();
        debug_assert_eq!((mat.rows(), mat.cols()), (dim, dim));
        let mut skew = Mat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                skew[(i, j)] = 0.5 * (mat[(i, j)] - mat[(j, i)]);
            }
        }
        Self {
            space,
            kind,
            mat: skew,
        }
    }

    /// Builds the tensor from index pairs `(a, b)` meaning `mat[a][b] = +1`,
    /// `mat[b][a] = -1`; this covers every canonical structure.
    pub fn from_unit_pairs(space: SpaceId, kind: TensorKind, pairs: &[(usize, usize)]) -> Self {
        let dim = space.dim();
        let mut mat = Mat::zeros(dim, dim);
        for &(a, b) in pairs {
            mat[(a, b)] = 1.0;
            mat[(b, a)] = -1.0;
        }
        Self { space, kind, mat }
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn kind(&self) -> TensorKind {
        self.kind
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `Λ(α, β) = Σ_{ij} α_i Λ^{ij} β_j` (same contraction for 2-forms on a
    /// pair of vectors).
    pub fn pairing(&self, alpha: &[f64], beta: &[f64]) -> f64 {
        linalg::dot(alpha, &self.mat.matvec(beta))
    }
}

/// The Jacobian of a map between two coordinate spaces, stored as a
/// `dim(target) x dim(source)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapData {
    pub source: SpaceId,
    pub target: SpaceId,
    pub mat: Mat,
}

impl LinearMapData {
    pub fn new(source: SpaceId, target: SpaceId, mat: Mat) -> Result<Self> {
        if mat.rows() != target.dim() || mat.cols() != source.dim() {
            return Err(CoreError::ShapeMismatch {
                context: "LinearMapData::new",
                expected: target.dim() * source.dim(),
                got: mat.rows() * mat.cols(),
            });
        }
        Ok(Self {
            source,
            target,
            mat,
        })
    }
}

/// A coordinate map together with its exact Jacobian.
pub trait CoordinateMap {
    fn source(&self) -> SpaceId;
    fn target(&self) -> SpaceId;
    fn apply(&self, x: &SpacePoint) -> Result<SpacePoint>;
    fn jacobian(&self, x: &SpacePoint) -> Result<LinearMapData>;
}

/// Identity map of a space; handy as a trivial `CoordinateMap`.
pub struct IdentityMap(pub SpaceId);

impl CoordinateMap for IdentityMap {
    fn source(&self) -> SpaceId {
        self.0
    }
    fn target(&self) -> SpaceId {
        self.0
    }
    fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        x.expect_space(self.0, "IdentityMap::apply")?;
        Ok(x.clone())
    }
    fn jacobian(&self, x: &SpacePoint) -> Result<LinearMapData> {
        x.expect_space(self.0, "IdentityMap::jacobian")?;
        LinearMapData::new(self.0, self.0, Mat::identity(self.0.dim()))
    }
}

/// `Λ♯(α) = Λ(α, ·)`; see the module conventions.
pub fn sharp(lambda: &SkewTensor, alpha: &[f64]) -> Result<Vec<f64>> {
    if lambda.kind() != TensorKind::Bivector {
        return Err(CoreError::InvalidArgument(
            "sharp expects a bivector".into(),
        ));
    }
    let dim = lambda.dim();
    if alpha.len() != dim {
        return Err(CoreError::ShapeMismatch {
            context: "sharp",
            expected: dim,
            got: alpha.len(),
        });
    }
    // v^i = Σ_j α_j Λ^{ji} = (Λᵀ α)^i
    Ok(lambda.mat.transpose().matvec(alpha))
}

/// Matrix of the sharp map as a linear operator on covector components,
/// i.e. the matrix `Λᵀ` with `v = Λᵀ α`.
pub fn sharp_matrix(lambda: &SkewTensor) -> Mat {
    lambda.mat.transpose()
}

/// `Jᵀ ω J` on the source space of `J`.
pub fn pullback_two_form(j: &LinearMapData, omega: &SkewTensor) -> Result<SkewTensor> {
    if omega.kind() != TensorKind::TwoForm {
        return Err(CoreError::InvalidArgument(
            "pullback_two_form expects a 2-form".into(),
        ));
    }
    if omega.space() != j.target {
        return Err(CoreError::WrongSpace {
            context: "pullback_two_form",
            expected: j.target,
            got: omega.space(),
        });
    }
    let jt = j.mat.transpose();
    let pulled = jt.matmul(omega.mat()).matmul(&j.mat);
    Ok(SkewTensor::antisymmetrized(
        j.source,
        TensorKind::TwoForm,
        pulled,
    ))
}

/// `J Λ Jᵀ` on the target space of `J`.
pub fn pushforward_bivector(j: &LinearMapData, lambda: &SkewTensor) -> Result<SkewTensor> {
    if lambda.kind() != TensorKind::Bivector {
        return Err(CoreError::InvalidArgument(
            "pushforward_bivector expects a bivector".into(),
        ));
    }
    if lambda.space() != j.source {
        return Err(CoreError::WrongSpace {
            context: "pushforward_bivector",
            expected: j.source,
            got: lambda.space(),
        });
    }
    let pushed = j.mat.matmul(lambda.mat()).matmul(&j.mat.transpose());
    Ok(SkewTensor::antisymmetrized(
        j.target,
        TensorKind::Bivector,
        pushed,
    ))
}

/// Orthonormal basis of the kernel, from a rank-revealing factorization.
/// Singular values below `tol` relative to the largest one count as zero.
pub fn kernel_basis(s: &SkewTensor, tol: f64) -> Vec<Vec<f64>> {
    linalg::null_space(s.mat(), tol)
}

/// Rank of the tensor (always even for skew matrices).
pub fn skew_rank(s: &SkewTensor, tol: f64) -> usize {
    linalg::rank(s.mat(), tol)
}

/// Max over `i < j < k` of the cyclic Jacobi sum
/// `|Σ_l Λ^{il} ∂_l Λ^{jk} + Λ^{jl} ∂_l Λ^{ki} + Λ^{kl} ∂_l Λ^{ij}|`
/// with derivatives by central differences of step `h`. Vanishes for Poisson
/// fields, exactly so for constant coefficients.
pub fn schouten_residual<F>(field: F, x: &SpacePoint, h: f64) -> f64
where
    F: Fn(&[f64]) -> SkewTensor,
{
    let coords = x.coords();
    let dim = coords.len();
    let at_x = field(coords);
    debug_assert_eq!(at_x.dim(), dim);

    // partial[l] approximates ∂_l Λ entrywise
    let mut partial: Vec<Mat> = Vec::with_capacity(dim);
    for l in 0..dim {
        let mut plus = coords.to_vec();
        let mut minus = coords.to_vec();
        plus[l] += h;
        minus[l] -= h;
        let fp = field(&plus);
        let fm = field(&minus);
        partial.push(fp.mat().sub(fm.mat()).scale(1.0 / (2.0 * h)));
    }

    let lam = at_x.mat();
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            for k in (j + 1)..dim {
                let mut cyc = 0.0;
                for l in 0..dim {
                    cyc += lam[(i, l)] * partial[l][(j, k)]
                        + lam[(j, l)] * partial[l][(k, i)]
                        + lam[(k, l)] * partial[l][(i, j)];
                }
                worst = worst.max(cyc.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceTag;

    fn plane() -> SpaceId {
        // (t, q): a 2-dim chart is enough for the sharp contraction checks
        SpaceId::new(SpaceTag::M, 1)
    }

    fn q_wedge_p() -> SkewTensor {
        SkewTensor::from_unit_pairs(plane(), TensorKind::Bivector, &[(0, 1)])
    }

    #[test]
    fn sharp_of_dq_is_dp_direction() {
        // Λ = ∂q ∧ ∂p on coords (q, p): sharp(dq) = ∂p, sharp(dp) = -∂q
        let lam = q_wedge_p();
        assert_eq!(sharp(&lam, &[1.0, 0.0]).unwrap(), alloc::vec![0.0, 1.0]);
        assert_eq!(sharp(&lam, &[0.0, 1.0]).unwrap(), alloc::vec![-1.0, 0.0]);
        assert_eq!(sharp(&lam, &[0.0, 0.0]).unwrap(), alloc::vec![0.0, 0.0]);
    }

    #[test]
    fn sharp_is_skew_against_its_argument() {
        let lam = q_wedge_p();
        let alpha = [0.7, -1.3];
        let v = sharp(&lam, &alpha).unwrap();
        assert!(linalg::dot(&alpha, &v).abs() <= 1e-12);
    }

    #[test]
    fn identity_pullback_and_pushforward_are_trivial() {
        let id = IdentityMap(plane());
        let x = SpacePoint::new(plane(), alloc::vec![0.0, 0.0]).unwrap();
        let j = id.jacobian(&x).unwrap();
        let omega = SkewTensor::from_unit_pairs(plane(), TensorKind::TwoForm, &[(0, 1)]);
        let lam = q_wedge_p();
        assert_eq!(pullback_two_form(&j, &omega).unwrap().mat(), omega.mat());
        assert_eq!(pushforward_bivector(&j, &lam).unwrap().mat(), lam.mat());
    }

    #[test]
    fn kernel_of_zero_form_is_everything() {
        let space = SpaceId::new(SpaceTag::TStarM, 1); // dim 4
        let zero = SkewTensor::new(space, TensorKind::TwoForm, Mat::zeros(4, 4)).unwrap();
        assert_eq!(kernel_basis(&zero, RANK_TOL).len(), 4);
        assert_eq!(skew_rank(&zero, RANK_TOL), 0);
    }

    #[test]
    fn rejects_non_skew_matrices() {
        let mut mat = Mat::zeros(2, 2);
        mat[(0, 0)] = 1.0;
        assert!(SkewTensor::new(plane(), TensorKind::TwoForm, mat).is_err());
    }

    fn three_space() -> SpaceId {
        // (t, q1, q2): any 3-dim chart works for the Jacobi-sum checks
        SpaceId::new(SpaceTag::M, 2)
    }

    #[test]
    fn schouten_vanishes_for_constant_fields() {
        let space = three_space();
        let constant =
            |_: &[f64]| SkewTensor::from_unit_pairs(space, TensorKind::Bivector, &[(0, 1)]);
        let x = SpacePoint::new(space, alloc::vec![0.3, -1.2, 0.9]).unwrap();
        assert_eq!(schouten_residual(constant, &x, 1e-4), 0.0);
    }

    #[test]
    fn schouten_vanishes_for_rotation_algebra_bracket() {
        // Λ^{xy} = z, Λ^{yz} = x, Λ^{zx} = y: the cyclic Jacobi sum cancels
        // exactly, and the coefficients are linear so central differences are
        // exact as well.
        let space = three_space();
        let field = |c: &[f64]| {
            let mut mat = Mat::zeros(3, 3);
            mat[(0, 1)] = c[2];
            mat[(1, 0)] = -c[2];
            mat[(1, 2)] = c[0];
            mat[(2, 1)] = -c[0];
            mat[(2, 0)] = c[1];
            mat[(0, 2)] = -c[1];
            SkewTensor::new(space, TensorKind::Bivector, mat).unwrap()
        };
        let x = SpacePoint::new(space, alloc::vec![1.0, 1.0, 1.0]).unwrap();
        assert!(schouten_residual(field, &x, 1e-4) <= 1e-9);
    }

    #[test]
    fn schouten_detects_a_non_poisson_field() {
        // Λ^{xy} = 1, Λ^{yz} = y²: the cyclic sum is 2y, nonzero at y = 1.
        let space = three_space();
        let field = |c: &[f64]| {
            let mut mat = Mat::zeros(3, 3);
            mat[(0, 1)] = 1.0;
            mat[(1, 0)] = -1.0;
            mat[(1, 2)] = c[1] * c[1];
            mat[(2, 1)] = -c[1] * c[1];
            SkewTensor::new(space, TensorKind::Bivector, mat).unwrap()
        };
        let x = SpacePoint::new(space, alloc::vec![0.0, 1.0, 0.0]).unwrap();
        let res = schouten_residual(field, &x, 1e-4);
        assert!(res > 0.1, "residual {res} should detect the Jacobi failure");
        assert!((res - 2.0).abs() < 1e-6);
    }
}
