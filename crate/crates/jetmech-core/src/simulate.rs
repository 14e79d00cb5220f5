//! Fixed-step RK4 integration of the dynamical fields and the end-to-end
//! equivalence experiment between the Lagrangian and Hamiltonian routes.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::linalg;
use crate::mechanics::{HamiltonianSystem, LagrangianSystem, Trajectory};
use crate::space::{SpaceId, SpacePoint, SpaceTag};
use crate::submanifolds::{membership_residual, SubmanifoldPoint};
use crate::triples::lemma_l1_residual;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl IntegratorConfig {
    /// Validates `t1 > t0`, `step > 0` and that the span is an integer
    /// number of steps (to within a unit of floating-point slack).
    pub fn new(t0: f64, t1: f64, step: f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(CoreError::InvalidArgument(
                "integration span needs t1 > t0".into(),
            ));
        }
        if !(step > 0.0) {
            return Err(CoreError::InvalidArgument("step must be positive".into()));
        }
        let ratio = (t1 - t0) / step;
        if (ratio - libm::round(ratio)).abs() > 4.0 * f64::EPSILON * ratio.abs().max(1.0) {
            return Err(CoreError::InvalidArgument(
                "(t1 - t0) / step must be an integer".into(),
            ));
        }
        if libm::round(ratio) < 1.0 {
            return Err(CoreError::InvalidArgument(
                "the span must contain at least one step".into(),
            ));
        }
        Ok(Self { t0, t1, step })
    }

    pub fn steps(&self) -> usize {
        libm::round((self.t1 - self.t0) / self.step) as usize
    }

    pub fn halved(&self) -> Self {
        Self {
            t0: self.t0,
            t1: self.t1,
            step: self.step / 2.0,
        }
    }
}

/// Integration failure: the partial trajectory up to the failure, the step
/// at which the field could not be evaluated, and the underlying error.
#[derive(Debug)]
pub enum IntegrateError {
    /// The inputs were rejected before any step was taken.
    Invalid(CoreError),
    /// The field failed mid-flow.
    Aborted {
        partial: Trajectory,
        failed_at_step: usize,
        source: CoreError,
    },
}

impl IntegrateError {
    pub fn source(self) -> CoreError {
        match self {
            IntegrateError::Invalid(e) => e,
            IntegrateError::Aborted { source, .. } => source,
        }
    }
}

/// Classic RK4 with a fixed step. All fields here advance time at unit rate;
/// that is asserted to `1e-12` each step and the time coordinate is then
/// snapped to the exact grid `t0 + k·step`.
pub fn integrate<F>(
    field: F,
    x0: &SpacePoint,
    cfg: &IntegratorConfig,
) -> core::result::Result<Trajectory, IntegrateError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if (x0.coords()[0] - cfg.t0).abs() > 1e-12 * cfg.t0.abs().max(1.0) {
        return Err(IntegrateError::Invalid(CoreError::InvalidArgument(
            "initial point must sit at t0".into(),
        )));
    }
    let dim = x0.space().dim();
    let h = cfg.step;
    let steps = cfg.steps();
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut current = x0.coords().to_vec();
    current[0] = cfg.t0;
    samples.push(current.clone());

    let abort = |samples: Vec<Vec<f64>>, k: usize, source: CoreError| {
        let partial = Trajectory::new(x0.space(), cfg.t0, h, samples)
            .expect("partial trajectory is grid-consistent");
        IntegrateError::Aborted {
            partial,
            failed_at_step: k,
            source,
        }
    };

    for k in 0..steps {
        let stage = |y: &[f64], slope: &[f64], factor: f64| -> Vec<f64> {
            y.iter()
                .zip(slope)
                .map(|(yi, si)| yi + factor * si)
                .collect()
        };
        let k1 = match field(&current) {
            Ok(v) => v,
            Err(e) => return Err(abort(samples, k, e)),
        };
        let k2 = match field(&stage(&current, &k1, h / 2.0)) {
            Ok(v) => v,
            Err(e) => return Err(abort(samples, k, e)),
        };
        let k3 = match field(&stage(&current, &k2, h / 2.0)) {
            Ok(v) => v,
            Err(e) => return Err(abort(samples, k, e)),
        };
        let k4 = match field(&stage(&current, &k3, h)) {
            Ok(v) => v,
            Err(e) => return Err(abort(samples, k, e)),
        };
        let mut next = vec![0.0; dim];
        for i in 0..dim {
            next[i] = current[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let exact_t = cfg.t0 + (k + 1) as f64 * h;
        if (next[0] - exact_t).abs() > 1e-12 * exact_t.abs().max(1.0) {
            return Err(abort(
                samples,
                k,
                CoreError::InvalidArgument("field does not advance time at unit rate".into()),
            ));
        }
        next[0] = exact_t;
        samples.push(next.clone());
        current = next;
    }

    Trajectory::new(x0.space(), cfg.t0, h, samples).map_err(IntegrateError::Invalid)
}

/// The Euler-Lagrange field as an integrable closure over raw coordinates.
pub fn lagrangian_route_field(sys: &LagrangianSystem) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    let space = sys.jet_space();
    move |coords| {
        let point = SpacePoint::new(space, coords.to_vec())?;
        sys.euler_lagrange_field(&point)
    }
}

/// The Reeb field as an integrable closure over raw coordinates.
pub fn hamiltonian_route_field(
    sys: &HamiltonianSystem,
) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    let space = sys.phase_space();
    move |coords| {
        let point = SpacePoint::new(space, coords.to_vec())?;
        sys.reeb_field(&point)
    }
}

/// The extended Hamiltonian field as an integrable closure.
pub fn extended_route_field(sys: &HamiltonianSystem) -> impl Fn(&[f64]) -> Result<Vec<f64>> + '_ {
    let space = SpaceId::new(SpaceTag::TStarM, sys.n());
    move |coords| {
        let point = SpacePoint::new(space, coords.to_vec())?;
        sys.extended_field(&point)
    }
}

/// End-to-end comparison of the two dynamical routes from one initial jet.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub scenario: String,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    /// Sup-norm gap between the Legendre image of the Lagrangian flow and
    /// the Hamiltonian flow.
    pub sup_gap: f64,
    /// Max membership residual of the Lagrangian submanifold along the jet
    /// prolongation of the Lagrangian route.
    pub max_sl_residual: f64,
    /// Max membership residual of the Hamiltonian submanifold along the jet
    /// prolongation of the Hamiltonian route.
    pub max_sh_residual: f64,
    /// Max structural-compatibility residual along the Lagrangian flow.
    pub lemma_l1_max: f64,
    /// Max energy-law residual `|dp0/dt + ∂H/∂t|` along the extended flow.
    pub ec2_residual_max: f64,
    /// Richardson step-halving ratio of the Hamiltonian-route
    /// self-convergence gaps (≈16 for RK4); measured at a base step coarse
    /// enough that truncation dominates rounding. `None` when the flow is
    /// resolved exactly and there is no gap to measure.
    pub order_estimate: Option<f64>,
}

/// Integrates the Euler-Lagrange field from `x0` and the Reeb field of the
/// induced Hamiltonian from `leg_L(x0)`, then measures how well the two
/// routes agree and how well each flow sits on its submanifold.
pub fn equivalence_report(
    sys: &LagrangianSystem,
    cfg: &IntegratorConfig,
    x0: &SpacePoint,
) -> Result<EquivalenceReport> {
    x0.expect_space(sys.jet_space(), "equivalence_report")?;
    let ham = HamiltonianSystem::derived(sys.clone());

    let (sup_gap, lag_traj, ham_traj) =
        two_route_gap(sys, &ham, cfg, x0).map_err(IntegrateError::source)?;

    // S_L residual along the Lagrangian route, through the Legendre image
    let n = sys.n();
    let vstar = SpaceId::new(SpaceTag::VStar, n);
    let leg_curve = {
        let mut samples = Vec::with_capacity(lag_traj.len());
        for k in 0..lag_traj.len() {
            let j = SpacePoint::new(sys.jet_space(), lag_traj.sample(k).to_vec())?;
            samples.push(sys.restricted_legendre(&j)?.into_coords());
        }
        Trajectory::new(vstar, cfg.t0, cfg.step, samples)?
    };
    let max_sl_residual = sl_residual_along(sys, &leg_curve)?;

    let max_sh_residual = sh_residual_along(&ham, &ham_traj)?;

    let mut lemma_l1_max = 0.0_f64;
    for k in 0..lag_traj.len() {
        let j = SpacePoint::new(sys.jet_space(), lag_traj.sample(k).to_vec())?;
        lemma_l1_max = lemma_l1_max.max(lemma_l1_residual(sys, &j)?);
    }

    // extended flow from Leg_L(x0): energy law |dp0/dt + H_t|
    let a0 = sys.extended_legendre(x0)?;
    let ext_traj =
        integrate(extended_route_field(&ham), &a0, cfg).map_err(IntegrateError::source)?;
    let ec2_residual_max = energy_law_residual(&ham, &ext_traj)?;

    // order estimate by Richardson step halving of the Hamiltonian route;
    // the base step is capped at span/400 steps so the halving gaps stay
    // above the rounding floor
    let order_estimate = {
        let base_steps = cfg.steps().min(400);
        let base = IntegratorConfig {
            t0: cfg.t0,
            t1: cfg.t1,
            step: (cfg.t1 - cfg.t0) / base_steps as f64,
        };
        let y0 = sys.restricted_legendre(x0)?;
        let run = |c: &IntegratorConfig| {
            integrate(hamiltonian_route_field(&ham), &y0, c).map_err(IntegrateError::source)
        };
        let coarse = run(&base)?;
        let medium = run(&base.halved())?;
        let fine = run(&base.halved().halved())?;
        let gap_between = |a: &Trajectory, b: &Trajectory| {
            let mut gap = 0.0_f64;
            for k in 0..a.len() {
                gap = gap.max(linalg::max_abs_diff(a.sample(k), b.sample(2 * k)));
            }
            gap
        };
        let gap1 = gap_between(&coarse, &medium);
        let gap2 = gap_between(&medium, &fine);
        if gap1 > 1e-12 && gap2 > 1e-14 {
            Some(gap1 / gap2)
        } else {
            None
        }
    };

    Ok(EquivalenceReport {
        scenario: String::from(sys.name()),
        t0: cfg.t0,
        t1: cfg.t1,
        step: cfg.step,
        sup_gap,
        max_sl_residual,
        max_sh_residual,
        lemma_l1_max,
        ec2_residual_max,
        order_estimate,
    })
}

fn two_route_gap(
    sys: &LagrangianSystem,
    ham: &HamiltonianSystem,
    cfg: &IntegratorConfig,
    x0: &SpacePoint,
) -> core::result::Result<(f64, Trajectory, Trajectory), IntegrateError> {
    let lag_traj = integrate(lagrangian_route_field(sys), x0, cfg)?;
    let y0 = sys
        .restricted_legendre(x0)
        .map_err(IntegrateError::Invalid)?;
    let ham_traj = integrate(hamiltonian_route_field(ham), &y0, cfg)?;
    let mut gap = 0.0_f64;
    for k in 0..lag_traj.len() {
        let j = SpacePoint::new(sys.jet_space(), lag_traj.sample(k).to_vec())
            .map_err(IntegrateError::Invalid)?;
        let image = sys
            .restricted_legendre(&j)
            .map_err(IntegrateError::Invalid)?;
        gap = gap.max(linalg::max_abs_diff(image.coords(), ham_traj.sample(k)));
    }
    Ok((gap, lag_traj, ham_traj))
}

/// Max `S_L` membership residual along the jet prolongation of a
/// restricted-momentum curve, measured at interior nodes (where the divided
/// differences are central).
pub fn sl_residual_along(sys: &LagrangianSystem, curve: &Trajectory) -> Result<f64> {
    let n = sys.n();
    curve
        .space()
        .eq(&SpaceId::new(SpaceTag::VStar, n))
        .then_some(())
        .ok_or(CoreError::WrongSpace {
            context: "sl_residual_along",
            expected: SpaceId::new(SpaceTag::VStar, n),
            got: curve.space(),
        })?;
    let derivs = curve.derivatives()?;
    let space = SpaceId::new(SpaceTag::J1Pi1Star, n);
    let mut worst = 0.0_f64;
    for k in 1..curve.len() - 1 {
        let c = curve.sample(k);
        let mut z = Vec::with_capacity(1 + 4 * n);
        z.extend_from_slice(c);
        z.extend_from_slice(&derivs[k][1..1 + n]); // dq/dt
        z.extend_from_slice(&derivs[k][1 + n..]); // dp/dt
        let z = SpacePoint::new(space, z)?;
        let r = membership_residual(SubmanifoldPoint::RestrictedLagrangian(sys), &z)?;
        worst = worst.max(r.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    }
    Ok(worst)
}

/// Max `S_h` membership residual along the jet prolongation of a
/// restricted-momentum curve, at interior nodes.
pub fn sh_residual_along(ham: &HamiltonianSystem, curve: &Trajectory) -> Result<f64> {
    let n = ham.n();
    let derivs = curve.derivatives()?;
    let space = SpaceId::new(SpaceTag::J1Pi1Star, n);
    let mut worst = 0.0_f64;
    for k in 1..curve.len() - 1 {
        let c = curve.sample(k);
        let mut z = Vec::with_capacity(1 + 4 * n);
        z.extend_from_slice(c);
        z.extend_from_slice(&derivs[k][1..1 + n]);
        z.extend_from_slice(&derivs[k][1 + n..]);
        let z = SpacePoint::new(space, z)?;
        let r = membership_residual(SubmanifoldPoint::RestrictedHamiltonian(ham), &z)?;
        worst = worst.max(r.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    }
    Ok(worst)
}

/// Max `|dp0/dt + ∂H/∂t|` along an extended-momentum trajectory, with the
/// time derivative by central divided differences at interior nodes.
pub fn energy_law_residual(ham: &HamiltonianSystem, ext: &Trajectory) -> Result<f64> {
    let n = ham.n();
    ext.space()
        .eq(&SpaceId::new(SpaceTag::TStarM, n))
        .then_some(())
        .ok_or(CoreError::WrongSpace {
            context: "energy_law_residual",
            expected: SpaceId::new(SpaceTag::TStarM, n),
            got: ext.space(),
        })?;
    let derivs = ext.derivatives()?;
    let mut worst = 0.0_f64;
    for k in 1..ext.len() - 1 {
        let c = ext.sample(k);
        let mut tqp = Vec::with_capacity(1 + 2 * n);
        tqp.push(c[0]);
        tqp.extend_from_slice(&c[1..1 + n]);
        tqp.extend_from_slice(&c[2 + n..]);
        let jet = ham.jet2(&tqp)?;
        worst = worst.max((derivs[k][1 + n] + jet.gradient[0]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1.0, 1e-3).is_ok());
        assert!(IntegratorConfig::new(0.0, 10.0, 1e-3).is_ok());
        assert!(IntegratorConfig::new(1.0, 0.0, 1e-3).is_err());
        assert!(IntegratorConfig::new(0.0, 1.0, -1e-3).is_err());
        assert!(IntegratorConfig::new(0.0, 1.0, 0.3).is_err());
        assert_eq!(
            IntegratorConfig::new(0.0, 10.0, 1e-3).unwrap().steps(),
            10000
        );
    }

    #[test]
    fn linear_flow_is_integrated_exactly() {
        let sc = scenarios::builtin("free_particle", 1).unwrap();
        let ham = sc.hamiltonian_or_derived().unwrap();
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-3).unwrap();
        let x0 = SpacePoint::new(ham.phase_space(), vec![0.0, 0.0, 1.0]).unwrap();
        let traj = integrate(hamiltonian_route_field(&ham), &x0, &cfg).unwrap();
        assert_eq!(traj.len(), 1001);
        let last = traj.last();
        assert!((last[1] - 1.0).abs() <= 1e-12);
        assert!((last[2] - 1.0).abs() <= 1e-12);
        // t-grid is exact
        for (k, s) in traj.samples().iter().enumerate() {
            assert_eq!(s[0], k as f64 * 1e-3);
        }
    }

    #[test]
    fn lagrangian_route_keeps_the_velocity_of_a_free_particle() {
        let sys = scenarios::builtin("free_particle", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-2).unwrap();
        let x0 = SpacePoint::new(sys.jet_space(), vec![0.0, 0.0, 2.0]).unwrap();
        let traj = integrate(lagrangian_route_field(&sys), &x0, &cfg).unwrap();
        for s in traj.samples() {
            assert!((s[2] - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn singular_scenario_aborts_with_partial_output() {
        let sys = scenarios::builtin("linear_velocity", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-2).unwrap();
        let x0 = SpacePoint::new(sys.jet_space(), vec![0.0, 0.0, 0.0]).unwrap();
        match integrate(lagrangian_route_field(&sys), &x0, &cfg) {
            Err(IntegrateError::Aborted {
                partial,
                failed_at_step,
                source,
            }) => {
                assert_eq!(failed_at_step, 0);
                assert_eq!(partial.len(), 1);
                assert!(matches!(source, CoreError::SingularLagrangian));
            }
            other => panic!("expected an abort, got {other:?}"),
        }
    }

    #[test]
    fn resonance_oracle_at_short_horizon() {
        // q(t) = (sin t - t cos t)/2 is the exact flow from rest
        let sc = scenarios::builtin("driven_oscillator", 1).unwrap();
        let ham = sc.hamiltonian.clone().unwrap();
        let cfg = IntegratorConfig::new(0.0, 2.0, 1e-3).unwrap();
        let x0 = SpacePoint::new(ham.phase_space(), vec![0.0, 0.0, 0.0]).unwrap();
        let traj = integrate(hamiltonian_route_field(&ham), &x0, &cfg).unwrap();
        let last = traj.last();
        let expected = 0.5 * (libm::sin(2.0) - 2.0 * libm::cos(2.0));
        assert!((last[1] - expected).abs() <= 1e-9);
    }

    #[test]
    fn equivalence_of_the_two_routes_for_the_free_particle() {
        let sys = scenarios::builtin("free_particle", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-2).unwrap();
        let x0 = SpacePoint::new(sys.jet_space(), vec![0.0, 0.2, 1.5]).unwrap();
        let report = equivalence_report(&sys, &cfg, &x0).unwrap();
        assert!(report.sup_gap <= 1e-10, "{report:?}");
        assert!(report.lemma_l1_max <= 1e-12);
        assert!(report.ec2_residual_max <= 1e-10);
    }

    #[test]
    fn equivalence_of_the_two_routes_for_caldirola_kanai() {
        let sys = scenarios::builtin("caldirola_kanai", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let cfg = IntegratorConfig::new(0.0, 2.0, 1e-3).unwrap();
        let x0 = SpacePoint::new(sys.jet_space(), vec![0.0, 1.0, 0.0]).unwrap();
        let report = equivalence_report(&sys, &cfg, &x0).unwrap();
        assert!(report.sup_gap <= 1e-8, "{report:?}");
        assert!(report.max_sl_residual <= 1e-6);
        assert!(report.max_sh_residual <= 1e-6);
        assert!(report.lemma_l1_max <= 1e-12);
        if let Some(order) = report.order_estimate {
            assert!((8.0..=32.0).contains(&order), "order {order}");
        }
    }

    #[test]
    fn caldirola_kanai_routes_agree_over_the_long_span() {
        // both integrations approximate the same flow; the divided-difference
        // membership residuals grow with the e^t-weighted momenta and are not
        // asserted at this horizon
        let sys = scenarios::builtin("caldirola_kanai", 1)
            .unwrap()
            .lagrangian
            .unwrap();
        let cfg = IntegratorConfig::new(0.0, 5.0, 1e-3).unwrap();
        let x0 = SpacePoint::new(sys.jet_space(), vec![0.0, 1.0, 0.0]).unwrap();
        let report = equivalence_report(&sys, &cfg, &x0).unwrap();
        assert!(report.sup_gap <= 1e-6, "{report:?}");
        assert!(report.lemma_l1_max <= 1e-12);
        assert!(report.ec2_residual_max <= 1e-6);
        let order = report.order_estimate.expect("truncation is measurable");
        assert!((8.0..=32.0).contains(&order), "order {order}");
    }
}
