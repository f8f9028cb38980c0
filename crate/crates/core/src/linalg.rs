//! Small dense helpers shared by the bundle modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::{CMat, CVec, RMat};

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Frobenius norm of a flat slice of entries.
pub fn frobenius(entries: &[Complex64]) -> f64 {
    libm::sqrt(entries.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// `‖a − b‖_F / max(1, ‖b‖_F)`.
///
/// The floor of one makes identities whose exact value is zero absolute
/// checks, and all others relative.
pub fn rel_residual(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let diff = libm::sqrt(
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>(),
    );
    diff / frobenius(b).max(1.0)
}

pub fn mat_residual(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    rel_residual(a.as_slice(), b.as_slice())
}

pub fn vec_residual(a: &CVec, b: &CVec) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    rel_residual(a.as_slice(), b.as_slice())
}

/// Maximum absolute column sum.
pub fn norm_1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse together with its 1-norm condition number, or `None` when the LU
/// factorisation breaks down or the inverse is not finite.
pub fn inverse_with_condition<T>(m: &DMatrix<T>) -> Option<(DMatrix<T>, f64)>
where
    T: ComplexField<RealField = f64>,
{
    if !m.is_square() {
        return None;
    }
    let inv = m.clone().try_inverse()?;
    let cond = norm_1(m) * norm_1(&inv);
    if cond.is_finite() {
        Some((inv, cond))
    } else {
        None
    }
}

/// `[a, b]₋ = ab − ba`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn is_finite_mat(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_vec(v: &CVec) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Values that finite-difference formulas can combine linearly.
pub trait Linear: Sized {
    /// `a·self + b·other`.
    fn combine(&self, a: f64, other: &Self, b: f64) -> Self;
    fn all_finite(&self) -> bool;
}

macro_rules! impl_linear_dense {
    ($ty:ty, $scalar:expr, $finite:expr) => {
        impl Linear for $ty {
            fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
                let s = $scalar;
                self * s(a) + other * s(b)
            }
            fn all_finite(&self) -> bool {
                let f: fn(&Self) -> bool = $finite;
                f(self)
            }
        }
    };
}

impl_linear_dense!(CMat, |t| c(t, 0.0), |m| m
    .iter()
    .all(|z| z.re.is_finite() && z.im.is_finite()));
impl_linear_dense!(CVec, |t| c(t, 0.0), |m| m
    .iter()
    .all(|z| z.re.is_finite() && z.im.is_finite()));
impl_linear_dense!(RMat, |t: f64| t, |m| m.iter().all(|z| z.is_finite()));
impl_linear_dense!(DVector<f64>, |t: f64| t, |m| m
    .iter()
    .all(|z| z.is_finite()));

impl Linear for Complex64 {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        self * a + other * b
    }
    fn all_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Linear for f64 {
    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}
