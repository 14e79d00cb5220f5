//! Exact first- and second-order forward-mode differentiation.
//!
//! The carrier type is [`Jet`]: value, gradient and packed Hessian of a
//! function of `m` variables, propagated through arithmetic by the chain
//! rule with no truncation error. Scalar fields are evaluated generically
//! over [`Real`], so one definition serves plain `f64` evaluation and jet
//! evaluation alike.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;

/// Helper trait so generic field code can make constants matching the
/// evaluation context (jets need to know the arity).
pub trait ConstantLike: Sized {
    fn same_shape_constant(&self, c: f64) -> Self;
}

/// Scalar type over which fields can be evaluated: `f64` or [`Jet`].
pub trait Real:
    Clone
    + ConstantLike
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
    + core::ops::Neg<Output = Self>
{
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn powf(&self, e: &Self) -> Self;
}

impl ConstantLike for f64 {
    fn same_shape_constant(&self, c: f64) -> f64 {
        c
    }
}

impl Real for f64 {
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn powi(&self, k: i32) -> Self {
        powi_f64(*self, k)
    }
    fn powf(&self, e: &Self) -> Self {
        libm::pow(*self, *e)
    }
}

fn powi_f64(x: f64, k: i32) -> f64 {
    if k < 0 {
        return 1.0 / powi_f64(x, -k);
    }
    let mut acc = 1.0;
    let mut base = x;
    let mut e = k as u32;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Second-order forward number: value, gradient over `m` variables and the
/// lower triangle of the Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    v: f64,
    g: Vec<f64>,
    h: Vec<f64>, // packed lower triangle, index (i, j) with i >= j at i(i+1)/2 + j
}

fn tri(i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    i * (i + 1) / 2 + j
}

impl Jet {
    pub fn constant_of(m: usize, v: f64) -> Self {
        Self {
            v,
            g: vec![0.0; m],
            h: vec![0.0; m * (m + 1) / 2],
        }
    }

    /// The `i`-th coordinate as a jet: unit gradient seed.
    pub fn variable(m: usize, i: usize, x: f64) -> Self {
        let mut jet = Self::constant_of(m, x);
        jet.g[i] = 1.0;
        jet
    }

    pub fn value(&self) -> f64 {
        self.v
    }

    pub fn gradient(&self) -> &[f64] {
        &self.g
    }

    pub fn arity(&self) -> usize {
        self.g.len()
    }

    pub fn hessian_entry(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.h[tri(i, j)]
        } else {
            self.h[tri(j, i)]
        }
    }

    /// Lift of a smooth unary function given its first two derivatives at
    /// the inner value.
    fn unary(&self, f: f64, df: f64, ddf: f64) -> Jet {
        let m = self.arity();
        let mut out = Jet::constant_of(m, f);
        for i in 0..m {
            out.g[i] = df * self.g[i];
        }
        for i in 0..m {
            for j in 0..=i {
                out.h[tri(i, j)] = df * self.h[tri(i, j)] + ddf * self.g[i] * self.g[j];
            }
        }
        out
    }

    fn recip(&self) -> Jet {
        let inv = 1.0 / self.v;
        self.unary(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl core::ops::Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        debug_assert_eq!(self.arity(), rhs.arity());
        self.v += rhs.v;
        for (a, b) in self.g.iter_mut().zip(&rhs.g) {
            *a += b;
        }
        for (a, b) in self.h.iter_mut().zip(&rhs.h) {
            *a += b;
        }
        self
    }
}

impl core::ops::Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        debug_assert_eq!(self.arity(), rhs.arity());
        self.v -= rhs.v;
        for (a, b) in self.g.iter_mut().zip(&rhs.g) {
            *a -= b;
        }
        for (a, b) in self.h.iter_mut().zip(&rhs.h) {
            *a -= b;
        }
        self
    }
}

impl core::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let m = self.arity();
        debug_assert_eq!(m, rhs.arity());
        let mut out = Jet::constant_of(m, self.v * rhs.v);
        for i in 0..m {
            out.g[i] = self.g[i] * rhs.v + self.v * rhs.g[i];
        }
        for i in 0..m {
            for j in 0..=i {
                out.h[tri(i, j)] = self.h[tri(i, j)] * rhs.v
                    + self.g[i] * rhs.g[j]
                    + self.g[j] * rhs.g[i]
                    + self.v * rhs.h[tri(i, j)];
            }
        }
        out
    }
}

impl core::ops::Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let inv = rhs.recip();
        self * inv
    }
}

impl core::ops::Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        for a in &mut self.g {
            *a = -*a;
        }
        for a in &mut self.h {
            *a = -*a;
        }
        self
    }
}

impl ConstantLike for Jet {
    fn same_shape_constant(&self, c: f64) -> Jet {
        Jet::constant_of(self.arity(), c)
    }
}

impl Real for Jet {
    fn sin(&self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.unary(s, c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.unary(c, -s, -c)
    }
    fn exp(&self) -> Self {
        let e = libm::exp(self.v);
        self.unary(e, e, e)
    }
    fn ln(&self) -> Self {
        let inv = 1.0 / self.v;
        self.unary(libm::log(self.v), inv, -inv * inv)
    }
    fn powi(&self, k: i32) -> Self {
        match k {
            0 => Jet::constant_of(self.arity(), 1.0),
            1 => self.clone(),
            _ => {
                let f = powi_f64(self.v, k);
                let df = f64::from(k) * powi_f64(self.v, k - 1);
                let ddf = f64::from(k) * f64::from(k - 1) * powi_f64(self.v, k - 2);
                self.unary(f, df, ddf)
            }
        }
    }
    fn powf(&self, e: &Self) -> Self {
        // a^b = exp(b ln a); integer exponents take the powi path upstream
        (e.clone() * self.ln()).exp()
    }
}

/// Value, gradient and (exactly symmetric) Hessian of a scalar field at a
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Mat,
}

/// Evaluatable scalar field over both plain reals and jets.
pub trait FieldExpr: Send + Sync {
    fn eval_f64(&self, x: &[f64]) -> f64;
    fn eval_jet(&self, x: &[Jet]) -> Jet;
}

/// A real function of a coordinate tuple supporting exact first- and
/// second-order forward differentiation.
#[derive(Clone)]
pub struct ScalarField {
    arity: usize,
    expr: Arc<dyn FieldExpr>,
}

impl core::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScalarField")
            .field("arity", &self.arity)
            .finish()
    }
}

impl ScalarField {
    pub fn new(arity: usize, expr: impl FieldExpr + 'static) -> Self {
        Self {
            arity,
            expr: Arc::new(expr),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.arity, "ScalarField arity mismatch");
        self.expr.eval_f64(x)
    }

    /// Exact value/gradient/Hessian via forward mode.
    pub fn jet2(&self, x: &[f64]) -> Jet2 {
        assert_eq!(x.len(), self.arity, "ScalarField arity mismatch");
        let m = self.arity;
        let seeded: Vec<Jet> = (0..m).map(|i| Jet::variable(m, i, x[i])).collect();
        let out = self.expr.eval_jet(&seeded);
        let mut hess = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                hess[(i, j)] = out.hessian_entry(i, j);
            }
        }
        Jet2 {
            value: out.value(),
            gradient: out.gradient().to_vec(),
            hessian: hess,
        }
    }

    /// Central-difference oracle for `jet2`: gradient and Hessian are both
    /// O(h²) accurate. Test-only companion of the exact engine.
    pub fn fd_jet2(&self, x: &[f64], h: f64) -> Jet2 {
        assert!(h > 0.0);
        assert_eq!(x.len(), self.arity, "ScalarField arity mismatch");
        let m = self.arity;
        let f = |y: &[f64]| self.expr.eval_f64(y);
        let value = f(x);

        let shifted = |deltas: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(i, d) in deltas {
                y[i] += d;
            }
            f(&y)
        };

        let mut gradient = vec![0.0; m];
        let mut hessian = Mat::zeros(m, m);
        for i in 0..m {
            let fp = shifted(&[(i, h)]);
            let fm = shifted(&[(i, -h)]);
            gradient[i] = (fp - fm) / (2.0 * h);
            hessian[(i, i)] = (fp - 2.0 * value + fm) / (h * h);
        }
        for i in 0..m {
            for j in 0..i {
                let fpp = shifted(&[(i, h), (j, h)]);
                let fpm = shifted(&[(i, h), (j, -h)]);
                let fmp = shifted(&[(i, -h), (j, h)]);
                let fmm = shifted(&[(i, -h), (j, -h)]);
                let d = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                hessian[(i, j)] = d;
                hessian[(j, i)] = d;
            }
        }
        Jet2 {
            value,
            gradient,
            hessian,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // f(t, q, v) = q² v as a handwritten FieldExpr
    struct QSquaredV;
    fn q_squared_v<T: Real>(x: &[T]) -> T {
        x[1].clone() * x[1].clone() * x[2].clone()
    }
    impl FieldExpr for QSquaredV {
        fn eval_f64(&self, x: &[f64]) -> f64 {
            q_squared_v(x)
        }
        fn eval_jet(&self, x: &[Jet]) -> Jet {
            q_squared_v(x)
        }
    }

    #[test]
    fn polynomial_jet2_is_exact() {
        let f = ScalarField::new(3, QSquaredV);
        let out = f.jet2(&[0.0, 2.0, 3.0]);
        assert_eq!(out.value, 12.0);
        assert_eq!(out.gradient, alloc::vec![0.0, 12.0, 4.0]);
        assert_eq!(out.hessian[(1, 1)], 6.0);
        assert_eq!(out.hessian[(1, 2)], 4.0);
        assert_eq!(out.hessian[(2, 1)], 4.0);
        assert_eq!(out.hessian[(0, 0)], 0.0);
        assert_eq!(out.hessian[(2, 2)], 0.0);
    }

    struct SinT;
    impl FieldExpr for SinT {
        fn eval_f64(&self, x: &[f64]) -> f64 {
            x[0].sin()
        }
        fn eval_jet(&self, x: &[Jet]) -> Jet {
            x[0].sin()
        }
    }

    #[test]
    fn sine_jet2_at_zero() {
        let f = ScalarField::new(1, SinT);
        let out = f.jet2(&[0.0]);
        assert_eq!(out.value, 0.0);
        assert_eq!(out.gradient, alloc::vec![1.0]);
        assert_eq!(out.hessian[(0, 0)], 0.0);
    }

    struct Five;
    impl FieldExpr for Five {
        fn eval_f64(&self, _: &[f64]) -> f64 {
            5.0
        }
        fn eval_jet(&self, x: &[Jet]) -> Jet {
            Jet::constant_of(x[0].arity(), 5.0)
        }
    }

    #[test]
    fn constant_jet2_is_flat() {
        let f = ScalarField::new(2, Five);
        let out = f.jet2(&[1.0, -1.0]);
        assert_eq!(out.value, 5.0);
        assert_eq!(out.gradient, alloc::vec![0.0, 0.0]);
        assert_eq!(out.hessian.max_abs(), 0.0);
    }

    #[test]
    fn fd_jet2_matches_known_derivatives() {
        let f = ScalarField::new(3, QSquaredV);
        let x = [0.0, 3.0, 1.0];
        let fd = f.fd_jet2(&x, 1e-5);
        // d/dq (q² v) = 2qv = 6 at q = 3, v = 1
        assert!((fd.gradient[1] - 6.0).abs() < 1e-8);
        let sin = ScalarField::new(1, SinT);
        let fd = sin.fd_jet2(&[0.0], 1e-5);
        assert!((fd.gradient[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fd_jet2_hessian_of_linear_field_is_tiny() {
        struct Linear;
        impl FieldExpr for Linear {
            fn eval_f64(&self, x: &[f64]) -> f64 {
                2.0 * x[0] - x[1]
            }
            fn eval_jet(&self, x: &[Jet]) -> Jet {
                let two = x[0].same_shape_constant(2.0);
                two * x[0].clone() - x[1].clone()
            }
        }
        let f = ScalarField::new(2, Linear);
        let fd = f.fd_jet2(&[0.4, -0.7], 1e-5);
        assert!(fd.hessian.max_abs() < 1e-6);
    }

    #[test]
    fn jet_division_and_powers() {
        // f(x) = x³ / (1 + x²) at x = 2: value 8/5
        // f'(x) = (3x²(1+x²) - x³·2x)/(1+x²)² = (x⁴ + 3x²)/(1+x²)² = 28/25
        let m = 1;
        let x = Jet::variable(m, 0, 2.0);
        let one = Jet::constant_of(m, 1.0);
        let f = x.powi(3) / (one + x.powi(2));
        assert!((f.value() - 8.0 / 5.0).abs() < 1e-15);
        assert!((f.gradient()[0] - 28.0 / 25.0).abs() < 1e-14);
    }

    #[test]
    fn powf_matches_powi_for_integer_exponents() {
        let x = Jet::variable(1, 0, 1.7);
        let e = Jet::constant_of(1, 3.0);
        let a = x.powf(&e);
        let b = x.powi(3);
        assert!((a.value() - b.value()).abs() < 1e-13);
        assert!((a.gradient()[0] - b.gradient()[0]).abs() < 1e-12);
        assert!((a.hessian_entry(0, 0) - b.hessian_entry(0, 0)).abs() < 1e-11);
    }
}
