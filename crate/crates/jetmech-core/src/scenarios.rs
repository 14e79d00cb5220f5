//! Built-in scenario registry.
//!
//! Each scenario is resolvable by name without a config file and generalizes
//! componentwise to any fiber dimension `n`:
//!
//! * `free_particle`      `L = ½ Σ v_i²`
//! * `harmonic`           `L = ½ Σ (v_i² - q_i²)`
//! * `driven_oscillator`  `L = Σ (½v_i² - ½q_i² + q_i sin t)`, with the
//!                        explicit Hamiltonian `H = Σ (½p_i² + ½q_i² - q_i sin t)`
//! * `caldirola_kanai`    `L = ½ eᵗ Σ (v_i² - q_i²)`
//! * `linear_velocity`    `L = Σ v_i` (singular; no Hamiltonian picture)

use alloc::string::String;
use alloc::vec::Vec;

use crate::jet::{FieldExpr, Jet, Real, ScalarField};
use crate::mechanics::{HamiltonianSystem, LagrangianSystem};

/// A named system: at least one of the two descriptions is present.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub lagrangian: Option<LagrangianSystem>,
    pub hamiltonian: Option<HamiltonianSystem>,
}

impl Scenario {
    /// The explicit Hamiltonian when present, otherwise the one induced by
    /// the Lagrangian through the Legendre transform.
    pub fn hamiltonian_or_derived(&self) -> Option<HamiltonianSystem> {
        if let Some(h) = &self.hamiltonian {
            return Some(h.clone());
        }
        self.lagrangian.clone().map(HamiltonianSystem::derived)
    }
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "free_particle",
    "harmonic",
    "driven_oscillator",
    "caldirola_kanai",
    "linear_velocity",
];

/// Scenario names whose Lagrangian is hyperregular on the sampling box.
pub const REGULAR_NAMES: [&str; 4] = [
    "free_particle",
    "harmonic",
    "driven_oscillator",
    "caldirola_kanai",
];

/// Looks a built-in scenario up by name.
pub fn builtin(name: &str, n: usize) -> Option<Scenario> {
    let lagrangian = |field| LagrangianSystem::new(n, name, field).expect("builtin arity");
    let scenario = |l: LagrangianSystem, h: Option<HamiltonianSystem>| Scenario {
        name: String::from(name),
        n,
        lagrangian: Some(l),
        hamiltonian: h,
    };
    match name {
        "free_particle" => Some(scenario(
            lagrangian(ScalarField::new(1 + 2 * n, FreeParticle { n })),
            None,
        )),
        "harmonic" => Some(scenario(
            lagrangian(ScalarField::new(1 + 2 * n, Harmonic { n })),
            None,
        )),
        "driven_oscillator" => {
            let h = HamiltonianSystem::explicit(
                n,
                name,
                ScalarField::new(1 + 2 * n, DrivenOscillatorH { n }),
            )
            .expect("builtin arity");
            Some(scenario(
                lagrangian(ScalarField::new(1 + 2 * n, DrivenOscillatorL { n })),
                Some(h),
            ))
        }
        "caldirola_kanai" => Some(scenario(
            lagrangian(ScalarField::new(1 + 2 * n, CaldirolaKanai { n })),
            None,
        )),
        "linear_velocity" => Some(scenario(
            lagrangian(ScalarField::new(1 + 2 * n, LinearVelocity { n })),
            None,
        )),
        _ => None,
    }
}

fn half<T: Real>(template: &T) -> T {
    template.same_shape_constant(0.5)
}

fn sum_of_squares<T: Real>(xs: &[T]) -> T {
    let mut acc = xs[0].same_shape_constant(0.0);
    for x in xs {
        acc = acc + x.clone() * x.clone();
    }
    acc
}

struct FreeParticle {
    n: usize,
}

fn free_particle<T: Real>(n: usize, x: &[T]) -> T {
    half(&x[0]) * sum_of_squares(&x[1 + n..])
}

impl FieldExpr for FreeParticle {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        free_particle(self.n, x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        free_particle(self.n, x)
    }
}

struct Harmonic {
    n: usize,
}

fn harmonic<T: Real>(n: usize, x: &[T]) -> T {
    half(&x[0]) * (sum_of_squares(&x[1 + n..]) - sum_of_squares(&x[1..1 + n]))
}

impl FieldExpr for Harmonic {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        harmonic(self.n, x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        harmonic(self.n, x)
    }
}

struct DrivenOscillatorL {
    n: usize,
}

fn driven_oscillator_l<T: Real>(n: usize, x: &[T]) -> T {
    let forcing = x[0].sin();
    let mut drive = x[0].same_shape_constant(0.0);
    for q in &x[1..1 + n] {
        drive = drive + q.clone() * forcing.clone();
    }
    harmonic(n, x) + drive
}

impl FieldExpr for DrivenOscillatorL {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        driven_oscillator_l(self.n, x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        driven_oscillator_l(self.n, x)
    }
}

struct DrivenOscillatorH {
    n: usize,
}

fn driven_oscillator_h<T: Real>(n: usize, x: &[T]) -> T {
    let forcing = x[0].sin();
    let mut drive = x[0].same_shape_constant(0.0);
    for q in &x[1..1 + n] {
        drive = drive + q.clone() * forcing.clone();
    }
    half(&x[0]) * (sum_of_squares(&x[1 + n..]) + sum_of_squares(&x[1..1 + n])) - drive
}

impl FieldExpr for DrivenOscillatorH {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        driven_oscillator_h(self.n, x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        driven_oscillator_h(self.n, x)
    }
}

struct CaldirolaKanai {
    n: usize,
}

fn caldirola_kanai<T: Real>(n: usize, x: &[T]) -> T {
    x[0].exp() * harmonic(n, x)
}

impl FieldExpr for CaldirolaKanai {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        caldirola_kanai(self.n, x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        caldirola_kanai(self.n, x)
    }
}

struct LinearVelocity {
    n: usize,
}

fn linear_velocity<T: Real>(n: usize, x: &[T]) -> T {
    let mut acc = x[0].same_shape_constant(0.0);
    for v in &x[1 + n..] {
        acc = acc + v.clone();
    }
    acc
}

impl FieldExpr for LinearVelocity {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        linear_velocity(self.n, x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        linear_velocity(self.n, x)
    }
}

/// Every built-in scenario at fiber dimension `n`, in registry order.
pub fn all_builtin(n: usize) -> Vec<Scenario> {
    BUILTIN_NAMES
        .iter()
        .map(|name| builtin(name, n).expect("registry names are valid"))
        .collect()
}

/// The hyperregular built-ins at fiber dimension `n`.
pub fn regular_builtin(n: usize) -> Vec<Scenario> {
    REGULAR_NAMES
        .iter()
        .map(|name| builtin(name, n).expect("registry names are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_every_name() {
        for name in BUILTIN_NAMES {
            let sc = builtin(name, 2).unwrap();
            assert!(sc.lagrangian.is_some());
            assert_eq!(sc.n, 2);
        }
        assert!(builtin("unknown", 1).is_none());
    }

    #[test]
    fn lagrangian_values_match_their_formulas() {
        let free = builtin("free_particle", 2).unwrap().lagrangian.unwrap();
        assert_eq!(free.field().eval(&[0.0, 1.0, 1.0, 3.0, 4.0]), 12.5);

        let ck = builtin("caldirola_kanai", 1).unwrap().lagrangian.unwrap();
        let want = 0.5 * libm::exp(1.0) * (4.0 - 0.0);
        assert!((ck.field().eval(&[1.0, 0.0, 2.0]) - want).abs() < 1e-14);

        let driven = builtin("driven_oscillator", 1).unwrap();
        let l = driven
            .lagrangian
            .unwrap()
            .field()
            .eval(&[core::f64::consts::FRAC_PI_2, 1.0, 0.0]);
        assert!((l - 0.5).abs() < 1e-15); // -½ + 1·sin(π/2)
    }

    #[test]
    fn driven_hamiltonian_is_the_legendre_dual() {
        let sc = builtin("driven_oscillator", 1).unwrap();
        let h = sc.hamiltonian.unwrap();
        // H = ½p² + ½q² - q sin t at (0, 1, 5): 12.5 + 0.5 - 0
        assert_eq!(h.value(&[0.0, 1.0, 5.0]).unwrap(), 13.0);
    }

    #[test]
    fn derived_fallback_kicks_in() {
        let sc = builtin("harmonic", 1).unwrap();
        assert!(sc.hamiltonian.is_none());
        let h = sc.hamiltonian_or_derived().unwrap();
        // H = ½p² + ½q²
        assert!((h.value(&[0.0, 1.0, 2.0]).unwrap() - 2.5).abs() < 1e-12);
    }
}
