//! Lagrangian and Hamiltonian dynamics: Legendre transforms, regularity,
//! Euler-Lagrange and Reeb vector fields, residuals along trajectories, and
//! the action functional.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::{CoordinateMap, LinearMapData, SkewTensor, TensorKind, RANK_TOL};
use crate::jet::{Jet2, ScalarField};
use crate::linalg::{self, Mat};
use crate::space::{SpaceId, SpacePoint, SpaceTag};

/// Newton tolerance (sup-norm of the momentum residual) for inverting the
/// restricted Legendre transform.
pub const LEGENDRE_NEWTON_TOL: f64 = 1e-12;
pub const LEGENDRE_NEWTON_MAX_ITER: usize = 50;

/// A Lagrangian `L(t, q, v)` with fiber dimension `n`.
#[derive(Debug, Clone)]
pub struct LagrangianSystem {
    n: usize,
    name: String,
    field: ScalarField,
}

impl LagrangianSystem {
    pub fn new(n: usize, name: impl Into<String>, field: ScalarField) -> Result<Self> {
        if field.arity() != 1 + 2 * n {
            return Err(CoreError::ShapeMismatch {
                context: "LagrangianSystem::new",
                expected: 1 + 2 * n,
                got: field.arity(),
            });
        }
        Ok(Self {
            n,
            name: name.into(),
            field,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn jet_space(&self) -> SpaceId {
        SpaceId::new(SpaceTag::J1Pi, self.n)
    }

    pub fn jet(&self, coords: &[f64]) -> Jet2 {
        self.field.jet2(coords)
    }

    /// `(t, q, ∂L/∂v)` into the restricted momentum space.
    pub fn restricted_legendre(&self, j: &SpacePoint) -> Result<SpacePoint> {
        j.expect_space(self.jet_space(), "restricted_legendre")?;
        let n = self.n;
        let jet = self.jet(j.coords());
        let mut out = Vec::with_capacity(1 + 2 * n);
        out.extend_from_slice(&j.coords()[..1 + n]);
        out.extend_from_slice(&jet.gradient[1 + n..]);
        SpacePoint::new(SpaceId::new(SpaceTag::VStar, n), out)
    }

    /// `(t, q, L - v·∂L/∂v, ∂L/∂v)` into the extended momentum space; the
    /// `p0` slot carries `E_L = L - v^i ∂L/∂v^i`.
    pub fn extended_legendre(&self, j: &SpacePoint) -> Result<SpacePoint> {
        j.expect_space(self.jet_space(), "extended_legendre")?;
        let n = self.n;
        let jet = self.jet(j.coords());
        let v = &j.coords()[1 + n..];
        let p = &jet.gradient[1 + n..];
        let p0 = jet.value - linalg::dot(v, p);
        let mut out = Vec::with_capacity(2 + 2 * n);
        out.extend_from_slice(&j.coords()[..1 + n]);
        out.push(p0);
        out.extend_from_slice(p);
        SpacePoint::new(SpaceId::new(SpaceTag::TStarM, n), out)
    }

    /// Velocity-block Hessian `W_ab = ∂²L/∂v^a ∂v^b` at `j`.
    pub fn velocity_hessian(&self, j: &SpacePoint) -> Result<Mat> {
        j.expect_space(self.jet_space(), "velocity_hessian")?;
        Ok(velocity_block(&self.jet(j.coords()), self.n))
    }

    /// Regularity report: `regular` iff the smallest singular value of `W`
    /// exceeds `tol * max(1, largest singular value)`.
    pub fn regularity(&self, j: &SpacePoint, tol: f64) -> Result<Regularity> {
        if tol <= 0.0 {
            return Err(CoreError::InvalidArgument(
                "regularity tolerance must be positive".into(),
            ));
        }
        let w = self.velocity_hessian(j)?;
        let svd = linalg::svd(&w);
        let largest = svd.singular_values.first().copied().unwrap_or(0.0);
        let smallest = svd.singular_values.last().copied().unwrap_or(0.0);
        let regular = smallest > tol * largest.max(1.0);
        let condition = if smallest > 0.0 {
            largest / smallest
        } else {
            f64::INFINITY
        };
        Ok(Regularity {
            w,
            regular,
            condition,
        })
    }

    /// The Euler-Lagrange vector field `(1, v, W^{-1} b)` with
    /// `b_a = ∂L/∂q^a - v^k ∂²L/∂v^a∂q^k - ∂²L/∂t∂v^a`.
    pub fn euler_lagrange_field(&self, j: &SpacePoint) -> Result<Vec<f64>> {
        j.expect_space(self.jet_space(), "euler_lagrange_field")?;
        let n = self.n;
        if !self.regularity(j, RANK_TOL)?.regular {
            return Err(CoreError::SingularLagrangian);
        }
        let jet = self.jet(j.coords());
        let v = &j.coords()[1 + n..];
        let w = velocity_block(&jet, n);
        let mut b = vec![0.0; n];
        for a in 0..n {
            let row = 1 + n + a;
            let mut s = jet.gradient[1 + a] - jet.hessian[(row, 0)];
            for k in 0..n {
                s -= v[k] * jet.hessian[(row, 1 + k)];
            }
            b[a] = s;
        }
        let accel = linalg::solve(&w, &b, "euler_lagrange_field")
            .map_err(|_| CoreError::SingularLagrangian)?;
        let mut out = Vec::with_capacity(1 + 2 * n);
        out.push(1.0);
        out.extend_from_slice(v);
        out.extend_from_slice(&accel);
        Ok(out)
    }

    /// Euler-Lagrange residual `d/dt(∂L/∂v) - ∂L/∂q` at interior sample `k`
    /// of a configuration-space trajectory; the time derivative uses a
    /// central divided difference of the exactly-evaluated momentum, and the
    /// velocities come from divided differences of the samples.
    pub fn el_residual(&self, sigma: &Trajectory, k: usize) -> Result<Vec<f64>> {
        sigma.expect_space(SpaceId::new(SpaceTag::M, self.n), "el_residual")?;
        let velocities = sigma.derivatives()?;
        let velocity_rows: Vec<&[f64]> =
            velocities.iter().map(|row| &row[1..1 + self.n]).collect();
        self.el_residual_impl(sigma, k, &velocity_rows)
    }

    /// Like [`Self::el_residual`], but with the velocity channel supplied
    /// exactly (one `n`-vector per sample) when the scenario has closed-form
    /// derivatives; only `d/dt` of the momentum remains discrete.
    pub fn el_residual_with_velocities(
        &self,
        sigma: &Trajectory,
        k: usize,
        velocities: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        sigma.expect_space(SpaceId::new(SpaceTag::M, self.n), "el_residual")?;
        if velocities.len() != sigma.len() {
            return Err(CoreError::ShapeMismatch {
                context: "el_residual velocity channel",
                expected: sigma.len(),
                got: velocities.len(),
            });
        }
        let velocity_rows: Vec<&[f64]> = velocities.iter().map(Vec::as_slice).collect();
        self.el_residual_impl(sigma, k, &velocity_rows)
    }

    fn el_residual_impl(
        &self,
        sigma: &Trajectory,
        k: usize,
        velocities: &[&[f64]],
    ) -> Result<Vec<f64>> {
        let last = sigma.len().saturating_sub(1);
        if k == 0 || k >= last {
            return Err(CoreError::IndexOutOfRange { index: k, last });
        }
        let n = self.n;
        let jet_coords = |idx: usize| -> Vec<f64> {
            let mut c = sigma.sample(idx).to_vec();
            c.extend_from_slice(&velocities[idx][..n]);
            c
        };
        let momentum =
            |idx: usize| -> Vec<f64> { self.jet(&jet_coords(idx)).gradient[1 + n..].to_vec() };
        let p_prev = momentum(k - 1);
        let p_next = momentum(k + 1);
        let jet_k = self.jet(&jet_coords(k));
        let h = sigma.step();
        Ok((0..n)
            .map(|a| (p_next[a] - p_prev[a]) / (2.0 * h) - jet_k.gradient[1 + a])
            .collect())
    }

    /// Action integral of `L` along the jet prolongation of a
    /// configuration-space trajectory (composite Simpson quadrature).
    pub fn action(&self, sigma: &Trajectory) -> Result<f64> {
        sigma.expect_space(SpaceId::new(SpaceTag::M, self.n), "action")?;
        if sigma.len() < 3 {
            return Err(CoreError::TooFewSamples {
                needed: 3,
                got: sigma.len(),
            });
        }
        let velocities = sigma.derivatives()?;
        let integrand: Vec<f64> = (0..sigma.len())
            .map(|k| {
                let mut c = sigma.sample(k).to_vec();
                c.extend_from_slice(&velocities[k][1..]);
                self.field.eval(&c)
            })
            .collect();
        Ok(simpson(&integrand, sigma.step()))
    }

    /// Newton inversion of `v ↦ ∂L/∂v - p`; the default initial guess is
    /// `v = p`, exact for unit-mass kinetic terms.
    pub fn invert_restricted_legendre(
        &self,
        v_point: &SpacePoint,
        guess: Option<&[f64]>,
    ) -> Result<SpacePoint> {
        v_point.expect_space(
            SpaceId::new(SpaceTag::VStar, self.n),
            "invert_restricted_legendre",
        )?;
        let n = self.n;
        let t = v_point.coords()[0];
        let q = &v_point.coords()[1..1 + n];
        let p = &v_point.coords()[1 + n..];
        let start: Vec<f64> = match guess {
            Some(g) => {
                if g.len() != n {
                    return Err(CoreError::ShapeMismatch {
                        context: "invert_restricted_legendre guess",
                        expected: n,
                        got: g.len(),
                    });
                }
                g.to_vec()
            }
            None => p.to_vec(),
        };
        let velocity = self.newton_invert(t, q, p, &start)?;
        let mut coords = Vec::with_capacity(1 + 2 * n);
        coords.push(t);
        coords.extend_from_slice(q);
        coords.extend_from_slice(&velocity);
        SpacePoint::new(self.jet_space(), coords)
    }

    pub(crate) fn newton_invert(
        &self,
        t: f64,
        q: &[f64],
        p: &[f64],
        start: &[f64],
    ) -> Result<Vec<f64>> {
        let n = self.n;
        let mut v = start.to_vec();
        let mut residual_norm = f64::INFINITY;
        for _ in 0..LEGENDRE_NEWTON_MAX_ITER {
            let mut coords = Vec::with_capacity(1 + 2 * n);
            coords.push(t);
            coords.extend_from_slice(q);
            coords.extend_from_slice(&v);
            let jet = self.jet(&coords);
            let residual: Vec<f64> = (0..n).map(|a| jet.gradient[1 + n + a] - p[a]).collect();
            residual_norm = residual.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
            if !residual_norm.is_finite() {
                break;
            }
            // reject a degenerate velocity Hessian even when the residual
            // already vanishes: the inverse map does not exist there
            let w = velocity_block(&jet, n);
            let delta = linalg::solve(&w, &residual, "invert_restricted_legendre")
                .map_err(|_| CoreError::SingularLagrangian)?;
            if residual_norm <= LEGENDRE_NEWTON_TOL {
                return Ok(v);
            }
            for a in 0..n {
                v[a] -= delta[a];
            }
        }
        Err(CoreError::NoConvergence {
            iterations: LEGENDRE_NEWTON_MAX_ITER,
            residual: residual_norm,
        })
    }

    /// `Leg_L ∘ leg_L^{-1}`: the extended-momentum image of a restricted
    /// momentum point; its `p0` coordinate equals `-H` for the induced
    /// Hamiltonian.
    pub fn hamiltonian_from_lagrangian(&self, v_point: &SpacePoint) -> Result<SpacePoint> {
        let j = self.invert_restricted_legendre(v_point, None)?;
        self.extended_legendre(&j)
    }
}

fn velocity_block(jet: &Jet2, n: usize) -> Mat {
    let mut w = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            w[(a, b)] = jet.hessian[(1 + n + a, 1 + n + b)];
        }
    }
    w
}

#[derive(Debug, Clone)]
pub struct Regularity {
    pub w: Mat,
    pub regular: bool,
    pub condition: f64,
}

/// Composite Simpson rule over uniformly spaced values; an odd interval
/// count is handled by a 3/8 rule on the final three intervals.
fn simpson(values: &[f64], h: f64) -> f64 {
    let intervals = values.len() - 1;
    let (even_part, tail) = if intervals % 2 == 0 {
        (intervals, 0)
    } else {
        (intervals - 3, 3)
    };
    let mut total = 0.0;
    if even_part > 0 {
        let mut s = values[0] + values[even_part];
        for k in 1..even_part {
            s += values[k] * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    if tail == 3 {
        let base = even_part;
        total += 3.0 * h / 8.0
            * (values[base] + 3.0 * values[base + 1] + 3.0 * values[base + 2] + values[base + 3]);
    }
    total
}

/// Hamiltonian backend: either an explicit field `H(t, q, p)` or one induced
/// from a hyperregular Lagrangian through the Legendre transform.
#[derive(Debug, Clone)]
enum HamRepr {
    Explicit(ScalarField),
    Derived(LagrangianSystem),
}

/// A Hamiltonian `H(t, q, p)` with fiber dimension `n`. The Hamiltonian
/// section it represents is `(t, q, p) ↦ (t, q, -H, p)`.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    n: usize,
    name: String,
    repr: HamRepr,
}

impl HamiltonianSystem {
    pub fn explicit(n: usize, name: impl Into<String>, field: ScalarField) -> Result<Self> {
        if field.arity() != 1 + 2 * n {
            return Err(CoreError::ShapeMismatch {
                context: "HamiltonianSystem::explicit",
                expected: 1 + 2 * n,
                got: field.arity(),
            });
        }
        Ok(Self {
            n,
            name: name.into(),
            repr: HamRepr::Explicit(field),
        })
    }

    /// Hamiltonian induced by a hyperregular Lagrangian: values come from
    /// `p·v - L` at the Newton-inverted velocity, derivatives from the exact
    /// implicit-function identities, so no differentiation through the
    /// solver is needed.
    pub fn derived(lagrangian: LagrangianSystem) -> Self {
        let name = format!("{}(derived)", lagrangian.name());
        Self {
            n: lagrangian.n(),
            name,
            repr: HamRepr::Derived(lagrangian),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phase_space(&self) -> SpaceId {
        SpaceId::new(SpaceTag::VStar, self.n)
    }

    pub fn value(&self, tqp: &[f64]) -> Result<f64> {
        match &self.repr {
            HamRepr::Explicit(f) => Ok(f.eval(tqp)),
            HamRepr::Derived(_) => Ok(self.jet2(tqp)?.value),
        }
    }

    /// Value, gradient and Hessian of `H` over `(t, q, p)`.
    pub fn jet2(&self, tqp: &[f64]) -> Result<Jet2> {
        match &self.repr {
            HamRepr::Explicit(f) => Ok(f.jet2(tqp)),
            HamRepr::Derived(l) => derived_hamiltonian_jet2(l, tqp),
        }
    }

    /// The Reeb vector field `(1, ∂H/∂p, -∂H/∂q)`.
    pub fn reeb_field(&self, v: &SpacePoint) -> Result<Vec<f64>> {
        v.expect_space(self.phase_space(), "reeb_field")?;
        let n = self.n;
        let jet = self.jet2(v.coords())?;
        let mut out = Vec::with_capacity(1 + 2 * n);
        out.push(1.0);
        out.extend_from_slice(&jet.gradient[1 + n..]);
        out.extend(jet.gradient[1..1 + n].iter().map(|g| -g));
        Ok(out)
    }

    /// Matrix of the cosymplectic 2-form `dq ∧ dp + dH ∧ dt` at `v`.
    pub fn omega_h(&self, v: &SpacePoint) -> Result<SkewTensor> {
        v.expect_space(self.phase_space(), "omega_h")?;
        let n = self.n;
        let dim = 1 + 2 * n;
        let jet = self.jet2(v.coords())?;
        let mut mat = Mat::zeros(dim, dim);
        for i in 0..n {
            mat[(1 + i, 1 + n + i)] = 1.0;
            mat[(1 + n + i, 1 + i)] = -1.0;
        }
        // dH ∧ dt = Σ H_q dq ∧ dt + Σ H_p dp ∧ dt (the dt ∧ dt part drops)
        for i in 0..dim - 1 {
            let coeff = jet.gradient[1 + i];
            mat[(1 + i, 0)] += coeff;
            mat[(0, 1 + i)] -= coeff;
        }
        SkewTensor::new(v.space(), TensorKind::TwoForm, mat)
    }

    /// `F_h(t, q, p0, p) = p0 + H(t, q, p)` on the extended momentum space.
    pub fn extended_function(&self, a: &SpacePoint) -> Result<f64> {
        a.expect_space(SpaceId::new(SpaceTag::TStarM, self.n), "extended_function")?;
        let n = self.n;
        let c = a.coords();
        let mut tqp = Vec::with_capacity(1 + 2 * n);
        tqp.push(c[0]);
        tqp.extend_from_slice(&c[1..1 + n]);
        tqp.extend_from_slice(&c[2 + n..]);
        Ok(c[1 + n] + self.value(&tqp)?)
    }

    /// Hamiltonian vector field of `F_h`: `(1, ∂H/∂p, -∂H/∂t, -∂H/∂q)` in
    /// `(t, q, p0, p)` order. Dropping the `p0` row reproduces the Reeb
    /// field under the bundle projection.
    pub fn extended_field(&self, a: &SpacePoint) -> Result<Vec<f64>> {
        a.expect_space(SpaceId::new(SpaceTag::TStarM, self.n), "extended_field")?;
        let n = self.n;
        let c = a.coords();
        let mut tqp = Vec::with_capacity(1 + 2 * n);
        tqp.push(c[0]);
        tqp.extend_from_slice(&c[1..1 + n]);
        tqp.extend_from_slice(&c[2 + n..]);
        let jet = self.jet2(&tqp)?;
        let mut out = Vec::with_capacity(2 + 2 * n);
        out.push(1.0);
        out.extend_from_slice(&jet.gradient[1 + n..]);
        out.push(-jet.gradient[0]);
        out.extend(jet.gradient[1..1 + n].iter().map(|g| -g));
        Ok(out)
    }

    /// Hamilton residual `(dq/dt - ∂H/∂p, dp/dt + ∂H/∂q)` at interior sample
    /// `k` of a restricted-momentum trajectory, with central divided
    /// differences.
    pub fn hamilton_residual(&self, tau: &Trajectory, k: usize) -> Result<Vec<f64>> {
        tau.expect_space(self.phase_space(), "hamilton_residual")?;
        let last = tau.len().saturating_sub(1);
        if k == 0 || k >= last {
            return Err(CoreError::IndexOutOfRange { index: k, last });
        }
        let derivs = tau.derivatives()?;
        self.hamilton_residual_impl(tau, k, &derivs[k][1..])
    }

    /// Like [`Self::hamilton_residual`], but with the time derivatives of
    /// `(q, p)` at sample `k` supplied exactly (length `2n`).
    pub fn hamilton_residual_with_derivatives(
        &self,
        tau: &Trajectory,
        k: usize,
        derivatives: &[f64],
    ) -> Result<Vec<f64>> {
        tau.expect_space(self.phase_space(), "hamilton_residual")?;
        let last = tau.len().saturating_sub(1);
        if k == 0 || k >= last {
            return Err(CoreError::IndexOutOfRange { index: k, last });
        }
        if derivatives.len() != 2 * self.n {
            return Err(CoreError::ShapeMismatch {
                context: "hamilton_residual derivative channel",
                expected: 2 * self.n,
                got: derivatives.len(),
            });
        }
        self.hamilton_residual_impl(tau, k, derivatives)
    }

    fn hamilton_residual_impl(
        &self,
        tau: &Trajectory,
        k: usize,
        derivs: &[f64],
    ) -> Result<Vec<f64>> {
        let n = self.n;
        let jet = self.jet2(tau.sample(k))?;
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(derivs[i] - jet.gradient[1 + n + i]);
        }
        for i in 0..n {
            out.push(derivs[n + i] + jet.gradient[1 + i]);
        }
        Ok(out)
    }
}

fn derived_hamiltonian_jet2(l: &LagrangianSystem, tqp: &[f64]) -> Result<Jet2> {
    let n = l.n();
    assert_eq!(tqp.len(), 1 + 2 * n, "derived Hamiltonian arity mismatch");
    let t = tqp[0];
    let q = &tqp[1..1 + n];
    let p = &tqp[1 + n..];
    let v = l.newton_invert(t, q, p, p)?;

    let mut jcoords = Vec::with_capacity(1 + 2 * n);
    jcoords.push(t);
    jcoords.extend_from_slice(q);
    jcoords.extend_from_slice(&v);
    let jl = l.jet(&jcoords);
    let w = velocity_block(&jl, n);

    // W^{-1}, column by column
    let mut winv = Mat::zeros(n, n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = linalg::solve(&w, &e, "derived Hamiltonian")
            .map_err(|_| CoreError::SingularLagrangian)?;
        for row in 0..n {
            winv[(row, col)] = x[row];
        }
    }

    // Mixed Lagrangian Hessian blocks in (t, q, v) order
    let lvq = {
        let mut m = Mat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] = jl.hessian[(1 + n + a, 1 + b)];
            }
        }
        m
    };
    let lvt: Vec<f64> = (0..n).map(|a| jl.hessian[(1 + n + a, 0)]).collect();

    // Implicit-function identities for H(t, q, p) = p·v*(t,q,p) - L
    let m1 = winv.matmul(&lvq); // ∂v*/∂q = -M1
    let m0 = winv.matvec(&lvt); // ∂v*/∂t = -m0

    let value = linalg::dot(p, &v) - jl.value;
    let dim = 1 + 2 * n;
    let mut gradient = vec![0.0; dim];
    gradient[0] = -jl.gradient[0];
    for b in 0..n {
        gradient[1 + b] = -jl.gradient[1 + b];
    }
    gradient[1 + n..].copy_from_slice(&v);

    let mut hess = Mat::zeros(dim, dim);
    // H_pp = W^{-1}
    for a in 0..n {
        for b in 0..n {
            hess[(1 + n + a, 1 + n + b)] = winv[(a, b)];
        }
    }
    // H_pq = -W^{-1} L_vq, and its transpose block
    for a in 0..n {
        for b in 0..n {
            hess[(1 + n + a, 1 + b)] = -m1[(a, b)];
            hess[(1 + b, 1 + n + a)] = -m1[(a, b)];
        }
    }
    // H_pt = -W^{-1} L_vt
    for a in 0..n {
        hess[(1 + n + a, 0)] = -m0[a];
        hess[(0, 1 + n + a)] = -m0[a];
    }
    // H_qq = -L_qq + L_vqᵀ W^{-1} L_vq
    for b in 0..n {
        for c in 0..n {
            let mut s = -jl.hessian[(1 + b, 1 + c)];
            for a in 0..n {
                s += lvq[(a, b)] * m1[(a, c)];
            }
            hess[(1 + b, 1 + c)] = s;
        }
    }
    // H_qt = -L_qt + L_vqᵀ W^{-1} L_vt
    for b in 0..n {
        let mut s = -jl.hessian[(1 + b, 0)];
        for a in 0..n {
            s += lvq[(a, b)] * m0[a];
        }
        hess[(1 + b, 0)] = s;
        hess[(0, 1 + b)] = s;
    }
    // H_tt = -L_tt + L_vtᵀ W^{-1} L_vt
    hess[(0, 0)] = -jl.hessian[(0, 0)] + linalg::dot(&lvt, &m0);

    Ok(Jet2 {
        value,
        gradient,
        hessian: hess,
    })
}

/// Uniformly sampled curve `t_k ↦ x_k` in a named space.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    space: SpaceId,
    t0: f64,
    step: f64,
    samples: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(space: SpaceId, t0: f64, step: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(CoreError::TooFewSamples { needed: 1, got: 0 });
        }
        if step <= 0.0 {
            return Err(CoreError::InvalidArgument("step must be positive".into()));
        }
        let dim = space.dim();
        for (k, s) in samples.iter().enumerate() {
            if s.len() != dim {
                return Err(CoreError::ShapeMismatch {
                    context: "Trajectory sample",
                    expected: dim,
                    got: s.len(),
                });
            }
            let expected_t = t0 + k as f64 * step;
            if (s[0] - expected_t).abs() > 1e-9 * expected_t.abs().max(1.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "sample {k} has t = {} but the grid says {expected_t}",
                    s[0]
                )));
            }
        }
        Ok(Self {
            space,
            t0,
            step,
            samples,
        })
    }

    /// Samples a closed-form curve on the exact grid `t_k = t0 + k·step`.
    pub fn from_fn(
        space: SpaceId,
        t0: f64,
        step: f64,
        count: usize,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let samples = (0..count)
            .map(|k| {
                let t = t0 + k as f64 * step;
                let mut c = vec![t];
                c.extend(f(t));
                c
            })
            .collect();
        Self::new(space, t0, step, samples)
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.samples[k]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn last(&self) -> &[f64] {
        self.samples.last().expect("trajectory is nonempty")
    }

    fn expect_space(&self, expected: SpaceId, context: &'static str) -> Result<()> {
        if self.space != expected {
            return Err(CoreError::WrongSpace {
                context,
                expected,
                got: self.space,
            });
        }
        Ok(())
    }

    /// Divided-difference time derivatives of every coordinate: central at
    /// interior nodes, second-order one-sided at the endpoints.
    pub fn derivatives(&self) -> Result<Vec<Vec<f64>>> {
        let m = self.len();
        if m < 3 {
            return Err(CoreError::TooFewSamples { needed: 3, got: m });
        }
        let dim = self.space.dim();
        let h = self.step;
        let mut out = vec![vec![0.0; dim]; m];
        for c in 0..dim {
            out[0][c] = (-3.0 * self.samples[0][c] + 4.0 * self.samples[1][c] - self.samples[2][c])
                / (2.0 * h);
            for k in 1..m - 1 {
                out[k][c] = (self.samples[k + 1][c] - self.samples[k - 1][c]) / (2.0 * h);
            }
            out[m - 1][c] = (3.0 * self.samples[m - 1][c] - 4.0 * self.samples[m - 2][c]
                + self.samples[m - 3][c])
                / (2.0 * h);
        }
        Ok(out)
    }
}

/// `μ: T*M → V*π`, forgetting the momentum conjugate to time.
pub struct MuProjection {
    pub n: usize,
}

impl CoordinateMap for MuProjection {
    fn source(&self) -> SpaceId {
        SpaceId::new(SpaceTag::TStarM, self.n)
    }
    fn target(&self) -> SpaceId {
        SpaceId::new(SpaceTag::VStar, self.n)
    }
    fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        x.expect_space(self.source(), "MuProjection::apply")?;
        let n = self.n;
        let c = x.coords();
        let mut out = Vec::with_capacity(1 + 2 * n);
        out.push(c[0]);
        out.extend_from_slice(&c[1..1 + n]);
        out.extend_from_slice(&c[2 + n..]);
        SpacePoint::new(self.target(), out)
    }
    fn jacobian(&self, x: &SpacePoint) -> Result<LinearMapData> {
        x.expect_space(self.source(), "MuProjection::jacobian")?;
        let n = self.n;
        let mut mat = Mat::zeros(1 + 2 * n, 2 + 2 * n);
        mat[(0, 0)] = 1.0;
        for i in 0..n {
            mat[(1 + i, 1 + i)] = 1.0;
            mat[(1 + n + i, 2 + n + i)] = 1.0;
        }
        LinearMapData::new(self.source(), self.target(), mat)
    }
}

/// `leg_L` as a coordinate map with its exact Jacobian.
pub struct RestrictedLegendreMap<'a> {
    pub system: &'a LagrangianSystem,
}

impl CoordinateMap for RestrictedLegendreMap<'_> {
    fn source(&self) -> SpaceId {
        self.system.jet_space()
    }
    fn target(&self) -> SpaceId {
        SpaceId::new(SpaceTag::VStar, self.system.n())
    }
    fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        self.system.restricted_legendre(x)
    }
    fn jacobian(&self, x: &SpacePoint) -> Result<LinearMapData> {
        x.expect_space(self.source(), "RestrictedLegendreMap::jacobian")?;
        let n = self.system.n();
        let jet = self.system.jet(x.coords());
        let dim = 1 + 2 * n;
        let mut mat = Mat::zeros(dim, dim);
        mat[(0, 0)] = 1.0;
        for i in 0..n {
            mat[(1 + i, 1 + i)] = 1.0;
        }
        for a in 0..n {
            for c in 0..dim {
                mat[(1 + n + a, c)] = jet.hessian[(1 + n + a, c)];
            }
        }
        LinearMapData::new(self.source(), self.target(), mat)
    }
}

/// `Leg_L` as a coordinate map with its exact Jacobian.
pub struct ExtendedLegendreMap<'a> {
    pub system: &'a LagrangianSystem,
}

impl CoordinateMap for ExtendedLegendreMap<'_> {
    fn source(&self) -> SpaceId {
        self.system.jet_space()
    }
    fn target(&self) -> SpaceId {
        SpaceId::new(SpaceTag::TStarM, self.system.n())
    }
    fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        self.system.extended_legendre(x)
    }
    fn jacobian(&self, x: &SpacePoint) -> Result<LinearMapData> {
        x.expect_space(self.source(), "ExtendedLegendreMap::jacobian")?;
        let n = self.system.n();
        let jet = self.system.jet(x.coords());
        let v = &x.coords()[1 + n..];
        let src_dim = 1 + 2 * n;
        let mut mat = Mat::zeros(2 + 2 * n, src_dim);
        mat[(0, 0)] = 1.0;
        for i in 0..n {
            mat[(1 + i, 1 + i)] = 1.0;
        }
        // p0 = L - v·∂L/∂v: the v-terms of ∂L/∂v cancel in the v-columns
        for c in 0..src_dim {
            let mut s = if c < 1 + n { jet.gradient[c] } else { 0.0 };
            for a in 0..n {
                s -= v[a] * jet.hessian[(1 + n + a, c)];
            }
            mat[(1 + n, c)] = s;
        }
        for a in 0..n {
            for c in 0..src_dim {
                mat[(2 + n + a, c)] = jet.hessian[(1 + n + a, c)];
            }
        }
        LinearMapData::new(self.source(), self.target(), mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    fn sys(name: &str) -> LagrangianSystem {
        scenarios::builtin(name, 1).unwrap().lagrangian.unwrap()
    }

    fn jpoint(sys: &LagrangianSystem, coords: &[f64]) -> SpacePoint {
        SpacePoint::new(sys.jet_space(), coords.to_vec()).unwrap()
    }

    #[test]
    fn restricted_legendre_of_free_particle() {
        let l = sys("free_particle");
        let out = l
            .restricted_legendre(&jpoint(&l, &[0.0, 0.0, 2.0]))
            .unwrap();
        assert_eq!(out.coords(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn restricted_legendre_of_caldirola_kanai() {
        let l = sys("caldirola_kanai");
        let out = l
            .restricted_legendre(&jpoint(&l, &[1.0, 0.0, 2.0]))
            .unwrap();
        let e = libm::exp(1.0);
        assert!((out.coords()[2] - 2.0 * e).abs() < 1e-15);
    }

    #[test]
    fn restricted_legendre_of_driven_oscillator() {
        let l = sys("driven_oscillator");
        let out = l
            .restricted_legendre(&jpoint(&l, &[core::f64::consts::FRAC_PI_2, 1.0, 0.0]))
            .unwrap();
        assert_eq!(out.coords()[2], 0.0);
    }

    #[test]
    fn extended_legendre_carries_the_energy_slot() {
        let l = sys("free_particle");
        let out = l.extended_legendre(&jpoint(&l, &[0.0, 0.0, 2.0])).unwrap();
        assert_eq!(out.coords(), &[0.0, 0.0, -2.0, 2.0]);

        let h = sys("harmonic");
        let out = h.extended_legendre(&jpoint(&h, &[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(out.coords(), &[0.0, 1.0, -0.5, 0.0]);
    }

    #[test]
    fn extended_legendre_projects_onto_the_restricted_one() {
        let l = sys("driven_oscillator");
        let mu = MuProjection { n: 1 };
        let mut rng = crate::rng::SplitMix64::new(11);
        for _ in 0..50 {
            let j = jpoint(&l, &rng.sample_box(3));
            let extended = l.extended_legendre(&j).unwrap();
            let restricted = l.restricted_legendre(&j).unwrap();
            assert_eq!(mu.apply(&extended).unwrap(), restricted);
        }
    }

    #[test]
    fn regularity_reports() {
        let free = sys("free_particle");
        let r = free
            .regularity(&jpoint(&free, &[0.0, 0.0, 2.0]), 1e-9)
            .unwrap();
        assert!(r.regular);
        assert_eq!(r.w[(0, 0)], 1.0);

        let lin = sys("linear_velocity");
        let r = lin
            .regularity(&jpoint(&lin, &[0.0, 0.0, 2.0]), 1e-9)
            .unwrap();
        assert!(!r.regular);
        assert_eq!(r.w[(0, 0)], 0.0);

        let ck = sys("caldirola_kanai");
        let r = ck.regularity(&jpoint(&ck, &[1.0, 0.0, 2.0]), 1e-9).unwrap();
        assert!(r.regular);
        assert!((r.w[(0, 0)] - libm::exp(1.0)).abs() < 1e-15);
    }

    #[test]
    fn euler_lagrange_field_examples() {
        let free = sys("free_particle");
        let f = free
            .euler_lagrange_field(&jpoint(&free, &[0.3, 0.7, 2.0]))
            .unwrap();
        assert_eq!(f, alloc::vec![1.0, 2.0, 0.0]);

        let driven = sys("driven_oscillator");
        let f = driven
            .euler_lagrange_field(&jpoint(&driven, &[core::f64::consts::FRAC_PI_2, 0.0, 0.0]))
            .unwrap();
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 0.0);
        assert!((f[2] - 1.0).abs() < 1e-15);

        let lin = sys("linear_velocity");
        assert!(matches!(
            lin.euler_lagrange_field(&jpoint(&lin, &[0.0, 0.0, 0.0])),
            Err(CoreError::SingularLagrangian)
        ));
    }

    #[test]
    fn el_residual_on_exact_and_inexact_curves() {
        let free = sys("free_particle");
        let m_space = SpaceId::new(SpaceTag::M, 1);
        let line = Trajectory::from_fn(m_space, 0.0, 1e-3, 1001, |t| alloc::vec![t]).unwrap();
        let r = free.el_residual(&line, 500).unwrap();
        assert!(r[0].abs() <= 1e-10);

        let parabola =
            Trajectory::from_fn(m_space, 0.0, 1e-3, 1001, |t| alloc::vec![t * t]).unwrap();
        let r = free.el_residual(&parabola, 500).unwrap();
        assert!((r[0] - 2.0).abs() <= 1e-6);

        assert!(free.el_residual(&line, 0).is_err());
        assert!(free.el_residual(&line, 1000).is_err());
    }

    #[test]
    fn el_residual_on_the_resonance_solution() {
        // q(t) = (sin t - t cos t)/2 solves q̈ + q = sin t with rest start
        let driven = sys("driven_oscillator");
        let m_space = SpaceId::new(SpaceTag::M, 1);
        let curve = Trajectory::from_fn(m_space, 0.0, 1e-3, 2001, |t| {
            alloc::vec![0.5 * (libm::sin(t) - t * libm::cos(t))]
        })
        .unwrap();
        // nodes whose momentum stencil only touches central velocities
        for k in [2, 500, 1000, 1998] {
            let r = driven.el_residual(&curve, k).unwrap();
            assert!(r[0].abs() <= 1e-6, "residual {} at node {k}", r[0]);
        }
    }

    #[test]
    fn exact_velocity_channel_sharpens_the_residuals() {
        // with closed-form derivatives the only discretization left in the
        // EL residual is d/dt of the momentum, and none in the Hamilton one
        let driven = sys("driven_oscillator");
        let m_space = SpaceId::new(SpaceTag::M, 1);
        let curve = Trajectory::from_fn(m_space, 0.0, 1e-3, 2001, |t| {
            alloc::vec![0.5 * (libm::sin(t) - t * libm::cos(t))]
        })
        .unwrap();
        let exact_v: alloc::vec::Vec<alloc::vec::Vec<f64>> = (0..2001)
            .map(|k| alloc::vec![0.5 * (k as f64 * 1e-3) * libm::sin(k as f64 * 1e-3)])
            .collect();
        // the first interior node is fine here: no one-sided prolongation
        for k in [1, 1000, 1999] {
            let r = driven
                .el_residual_with_velocities(&curve, k, &exact_v)
                .unwrap();
            assert!(r[0].abs() <= 1e-6, "node {k}: {}", r[0]);
        }
        assert!(driven
            .el_residual_with_velocities(&curve, 1000, &exact_v[..5])
            .is_err());

        let sc = scenarios::builtin("driven_oscillator", 1).unwrap();
        let h = sc.hamiltonian.unwrap();
        let vs = SpaceId::new(SpaceTag::VStar, 1);
        let tau = Trajectory::from_fn(vs, 0.0, 1e-3, 2001, |t| {
            alloc::vec![
                0.5 * (libm::sin(t) - t * libm::cos(t)),
                0.5 * t * libm::sin(t)
            ]
        })
        .unwrap();
        for k in [1, 1000, 1999] {
            let t = k as f64 * 1e-3;
            let dq = 0.5 * t * libm::sin(t);
            let dp = 0.5 * (libm::sin(t) + t * libm::cos(t));
            let r = h
                .hamilton_residual_with_derivatives(&tau, k, &[dq, dp])
                .unwrap();
            assert!(r[0].abs() <= 1e-12 && r[1].abs() <= 1e-12, "node {k}: {r:?}");
        }
    }

    #[test]
    fn action_examples() {
        let free = sys("free_particle");
        let m_space = SpaceId::new(SpaceTag::M, 1);
        let line = Trajectory::from_fn(m_space, 0.0, 1e-3, 1001, |t| alloc::vec![t]).unwrap();
        assert!((free.action(&line).unwrap() - 0.5).abs() <= 1e-8);

        // ∫₀^π ½cos(2t) dt = 0 for the harmonic Lagrangian along sin t
        let harmonic = sys("harmonic");
        let step = core::f64::consts::PI / 4000.0;
        let sine =
            Trajectory::from_fn(m_space, 0.0, step, 4001, |t| alloc::vec![libm::sin(t)]).unwrap();
        assert!(harmonic.action(&sine).unwrap().abs() <= 1e-6);

        let rest = Trajectory::from_fn(m_space, 0.0, 0.1, 11, |_| alloc::vec![0.0]).unwrap();
        assert_eq!(harmonic.action(&rest).unwrap(), 0.0);

        let two = Trajectory::from_fn(m_space, 0.0, 0.1, 2, |t| alloc::vec![t]).unwrap();
        assert!(matches!(
            free.action(&two),
            Err(CoreError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn reeb_field_examples() {
        let sc = scenarios::builtin("harmonic", 1).unwrap();
        let h = HamiltonianSystem::derived(sc.lagrangian.unwrap());
        let v = SpacePoint::new(h.phase_space(), alloc::vec![0.0, 1.0, 0.0]).unwrap();
        let r = h.reeb_field(&v).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
        assert!(r[1].abs() < 1e-12);
        assert!((r[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn reeb_field_of_a_kinetic_hamiltonian() {
        let sc = scenarios::builtin("free_particle", 1).unwrap();
        let h = HamiltonianSystem::derived(sc.lagrangian.unwrap());
        let v = SpacePoint::new(h.phase_space(), alloc::vec![0.0, 0.0, 2.0]).unwrap();
        let r = h.reeb_field(&v).unwrap();
        assert_eq!(r[0], 1.0);
        assert!((r[1] - 2.0).abs() <= 1e-12);
        assert!(r[2].abs() <= 1e-12);
    }

    #[test]
    fn omega_h_entries_for_a_kinetic_hamiltonian() {
        // H = ½p²: dH ∧ dt = p dp ∧ dt, so ω_qp = 1 and ω_pt = p = 2
        let sc = scenarios::builtin("free_particle", 1).unwrap();
        let h = HamiltonianSystem::derived(sc.lagrangian.unwrap());
        let v = SpacePoint::new(h.phase_space(), alloc::vec![0.0, 0.0, 2.0]).unwrap();
        let omega = h.omega_h(&v).unwrap();
        assert!((omega.mat()[(1, 2)] - 1.0).abs() <= 1e-12);
        assert!((omega.mat()[(2, 0)] - 2.0).abs() <= 1e-12);
        assert!(omega.mat()[(1, 0)].abs() <= 1e-12);
    }

    #[test]
    fn extended_function_grows_at_unit_rate_in_the_time_momentum() {
        let sc = scenarios::builtin("driven_oscillator", 1).unwrap();
        let h = sc.hamiltonian.unwrap();
        let space = SpaceId::new(SpaceTag::TStarM, 1);
        let mut rng = crate::rng::SplitMix64::new(2);
        for _ in 0..50 {
            let mut c = rng.sample_box(4);
            let a = SpacePoint::new(space, c.clone()).unwrap();
            let f0 = h.extended_function(&a).unwrap();
            c[2] += 1.0;
            let a1 = SpacePoint::new(space, c).unwrap();
            let f1 = h.extended_function(&a1).unwrap();
            assert!((f1 - f0 - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn euler_lagrange_field_satisfies_the_second_order_condition() {
        let mut rng = crate::rng::SplitMix64::new(6);
        for name in crate::scenarios::REGULAR_NAMES {
            let l = sys(name);
            for _ in 0..50 {
                let coords = rng.sample_box(3);
                let field = l.euler_lagrange_field(&jpoint(&l, &coords)).unwrap();
                assert_eq!(field[0], 1.0);
                assert_eq!(field[1], coords[2]);
            }
        }
    }

    #[test]
    fn action_is_stationary_on_solutions() {
        // perturbing one interior sample of a solution changes the action at
        // second order: shrinking the perturbation 10x shrinks the change
        // ~100x
        let driven = sys("driven_oscillator");
        let m_space = SpaceId::new(SpaceTag::M, 1);
        let solution = |t: f64| alloc::vec![0.5 * (libm::sin(t) - t * libm::cos(t))];
        let base = Trajectory::from_fn(m_space, 0.0, 1e-3, 2001, solution).unwrap();
        let s0 = driven.action(&base).unwrap();
        let perturbed_action = |delta: f64| {
            let mut samples: alloc::vec::Vec<alloc::vec::Vec<f64>> = base.samples().to_vec();
            samples[1000][1] += delta;
            let traj = Trajectory::new(m_space, 0.0, 1e-3, samples).unwrap();
            driven.action(&traj).unwrap()
        };
        let d1 = (perturbed_action(1e-4) - s0).abs();
        let d2 = (perturbed_action(1e-5) - s0).abs();
        let ratio = d1 / d2;
        assert!(
            (80.0..=120.0).contains(&ratio),
            "quadratic scaling expected, got ratio {ratio}"
        );
    }

    #[test]
    fn hamilton_residual_on_the_resonance_solution() {
        let sc = scenarios::builtin("driven_oscillator", 1).unwrap();
        let h = sc.hamiltonian.unwrap();
        let vs = SpaceId::new(SpaceTag::VStar, 1);
        let tau = Trajectory::from_fn(vs, 0.0, 1e-3, 2001, |t| {
            alloc::vec![
                0.5 * (libm::sin(t) - t * libm::cos(t)),
                0.5 * t * libm::sin(t)
            ]
        })
        .unwrap();
        for k in [1, 700, 1400, 1999] {
            let r = h.hamilton_residual(&tau, k).unwrap();
            assert!(r[0].abs() <= 1e-6 && r[1].abs() <= 1e-6, "node {k}: {r:?}");
        }
    }

    #[test]
    fn omega_h_contracts_to_zero_on_the_reeb_field() {
        let sc = scenarios::builtin("driven_oscillator", 1).unwrap();
        let h = sc.hamiltonian.unwrap();
        let mut rng = crate::rng::SplitMix64::new(3);
        for _ in 0..100 {
            let v = SpacePoint::new(h.phase_space(), rng.sample_box(3)).unwrap();
            let omega = h.omega_h(&v).unwrap();
            let reeb = h.reeb_field(&v).unwrap();
            // ι_R ω: component j is Σ_i R^i ω_{ij}
            let contracted = omega.mat().transpose().matvec(&reeb);
            for x in contracted {
                assert!(x.abs() <= 1e-12);
            }
            assert_eq!(reeb[0], 1.0);
        }
    }

    #[test]
    fn extended_function_and_field() {
        let free_h = {
            let sc = scenarios::builtin("free_particle", 1).unwrap();
            HamiltonianSystem::derived(sc.lagrangian.unwrap())
        };
        let a = SpacePoint::new(
            SpaceId::new(SpaceTag::TStarM, 1),
            alloc::vec![0.0, 1.0, 5.0, 0.0],
        )
        .unwrap();
        assert!((free_h.extended_function(&a).unwrap() - 5.0).abs() < 1e-15);

        let field = free_h.extended_field(&a).unwrap();
        assert_eq!(field.len(), 4);
        assert_eq!(field[0], 1.0);
        assert!(field[2].abs() < 1e-12);

        let driven = scenarios::builtin("driven_oscillator", 1).unwrap();
        let h = driven.hamiltonian.unwrap();
        let a = SpacePoint::new(
            SpaceId::new(SpaceTag::TStarM, 1),
            alloc::vec![0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let field = h.extended_field(&a).unwrap();
        // (1, p, q cos t, -(q - sin t)) at t=0, q=1, p=0
        assert_eq!(field[0], 1.0);
        assert!((field[1] - 0.0).abs() < 1e-15);
        assert!((field[2] - 1.0).abs() < 1e-15);
        assert!((field[3] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn extended_field_projects_onto_the_reeb_field() {
        let mu = MuProjection { n: 1 };
        let mut rng = crate::rng::SplitMix64::new(5);
        for name in crate::scenarios::REGULAR_NAMES {
            let sc = scenarios::builtin(name, 1).unwrap();
            let h = HamiltonianSystem::derived(sc.lagrangian.unwrap());
            for _ in 0..100 {
                let a =
                    SpacePoint::new(SpaceId::new(SpaceTag::TStarM, 1), rng.sample_box(4)).unwrap();
                let full = h.extended_field(&a).unwrap();
                let projected = alloc::vec![full[0], full[1], full[3]];
                let reeb = h.reeb_field(&mu.apply(&a).unwrap()).unwrap();
                for (x, y) in projected.iter().zip(&reeb) {
                    assert!((x - y).abs() <= 1e-12, "{name}");
                }
            }
        }
    }

    #[test]
    fn hamilton_residual_examples() {
        let sc = scenarios::builtin("free_particle", 1).unwrap();
        let h = HamiltonianSystem::derived(sc.lagrangian.unwrap());
        let vs = SpaceId::new(SpaceTag::VStar, 1);
        let exact = Trajectory::from_fn(vs, 0.0, 1e-3, 101, |t| alloc::vec![2.0 * t, 2.0]).unwrap();
        let r = h.hamilton_residual(&exact, 50).unwrap();
        assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);

        let wrong = Trajectory::from_fn(vs, 0.0, 1e-3, 101, |t| alloc::vec![t, 2.0]).unwrap();
        let r = h.hamilton_residual(&wrong, 50).unwrap();
        assert!((r[0] + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn legendre_inversion_round_trips() {
        let ck = sys("caldirola_kanai");
        let vs = SpaceId::new(SpaceTag::VStar, 1);
        let e = libm::exp(1.0);
        let v = SpacePoint::new(vs, alloc::vec![1.0, 0.0, 2.0 * e]).unwrap();
        let j = ck.invert_restricted_legendre(&v, None).unwrap();
        assert!((j.coords()[2] - 2.0).abs() <= 1e-12);

        let lin = sys("linear_velocity");
        let v = SpacePoint::new(vs, alloc::vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            lin.invert_restricted_legendre(&v, None),
            Err(CoreError::SingularLagrangian)
        ));

        let mut rng = crate::rng::SplitMix64::new(9);
        for _ in 0..50 {
            let mut c = rng.sample_box(3);
            c[0] = rng.uniform(-1.0, 1.0);
            let v = SpacePoint::new(vs, c).unwrap();
            let j = ck.invert_restricted_legendre(&v, None).unwrap();
            let back = ck.restricted_legendre(&j).unwrap();
            assert!(linalg::max_abs_diff(back.coords(), v.coords()) <= 1e-12);
        }
    }

    #[test]
    fn hamiltonian_from_lagrangian_matches_legendre_duality() {
        let free = sys("free_particle");
        let vs = SpaceId::new(SpaceTag::VStar, 1);
        let v = SpacePoint::new(vs, alloc::vec![0.0, 0.0, 2.0]).unwrap();
        let a = free.hamiltonian_from_lagrangian(&v).unwrap();
        assert_eq!(a.coords(), &[0.0, 0.0, -2.0, 2.0]);

        let harm = sys("harmonic");
        let v = SpacePoint::new(vs, alloc::vec![0.0, 1.0, 0.0]).unwrap();
        let a = harm.hamiltonian_from_lagrangian(&v).unwrap();
        assert_eq!(a.coords(), &[0.0, 1.0, -0.5, 0.0]);
    }

    #[test]
    fn derived_hamiltonian_matches_the_explicit_one() {
        let sc = scenarios::builtin("driven_oscillator", 1).unwrap();
        let explicit = sc.hamiltonian.clone().unwrap();
        let derived = HamiltonianSystem::derived(sc.lagrangian.unwrap());
        let mut rng = crate::rng::SplitMix64::new(21);
        for _ in 0..50 {
            let tqp = rng.sample_box(3);
            let a = explicit.jet2(&tqp).unwrap();
            let b = derived.jet2(&tqp).unwrap();
            assert!((a.value - b.value).abs() <= 1e-11);
            assert!(linalg::max_abs_diff(&a.gradient, &b.gradient) <= 1e-11);
            assert!(a.hessian.sub(&b.hessian).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn regularity_matches_legendre_jacobian_invertibility() {
        // regular point: Jacobian of leg_L invertible; singular scenario: not
        let free = sys("free_particle");
        let j = jpoint(&free, &[0.0, 0.5, 1.5]);
        let leg = RestrictedLegendreMap { system: &free };
        let jac = leg.jacobian(&j).unwrap();
        assert_eq!(linalg::rank(&jac.mat, 1e-9), 3);

        let lin = sys("linear_velocity");
        let j = jpoint(&lin, &[0.0, 0.5, 1.5]);
        let leg = RestrictedLegendreMap { system: &lin };
        let jac = leg.jacobian(&j).unwrap();
        assert_eq!(linalg::rank(&jac.mat, 1e-9), 2);
    }

    #[test]
    fn legendre_jacobian_for_unit_mass_is_identity() {
        let free = sys("free_particle");
        let j = jpoint(&free, &[0.2, -0.4, 1.1]);
        let leg = RestrictedLegendreMap { system: &free };
        let jac = leg.jacobian(&j).unwrap();
        assert_eq!(jac.mat, Mat::identity(3));
    }
}
