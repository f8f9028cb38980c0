//! Seeded random draws: base points, complex Gaussian vectors and matrices,
//! metric-adapted Hermitian and unitary operators, and random smooth
//! objects with exact partial derivatives.

use hilbert_bundle::linalg::c;
use hilbert_bundle::{CMat, CVec, Complex64, CoordinateChart, FibreSpace, Field};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::catalog::{random_morphism, Smooth};

pub fn cnum(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| cnum(rng))
}

pub fn cmat(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| cnum(rng))
}

/// A uniformly drawn interior grid point (any point if the grid has no
/// interior).
pub fn grid_point(rng: &mut ChaCha8Rng, chart: &CoordinateChart) -> Vec<f64> {
    let index: Vec<usize> = chart
        .extents()
        .iter()
        .map(|&e| {
            if e > 2 {
                rng.random_range(1..e - 1)
            } else {
                rng.random_range(0..e)
            }
        })
        .collect();
    chart.coords_of(&index)
}

/// Hermitian with respect to the standard product of `ℂⁿ`.
pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = cmat(rng, n);
    (&a + a.adjoint()) * c(0.5, 0.)
}

/// Unitary with respect to the standard product of `ℂⁿ`.
pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    cmat(rng, n).qr().q()
}

fn adapt(space: &FibreSpace, m: CMat) -> CMat {
    let root = space.gram_root();
    let root_inv = root.clone().try_inverse().expect("Gram root is invertible");
    root_inv * m * root
}

/// Self-adjoint for the Gram product of `space`.
pub fn g_hermitian(rng: &mut ChaCha8Rng, space: &FibreSpace) -> CMat {
    adapt(space, hermitian(rng, space.dim()))
}

/// Unitary for the Gram product of `space`.
pub fn g_unitary(rng: &mut ChaCha8Rng, space: &FibreSpace) -> CMat {
    adapt(space, unitary(rng, space.dim()))
}

fn wave(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<f64>, f64) {
    let k = (0..dim)
        .map(|_| {
            let m: f64 = rng.random_range(0.5..1.5);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    (k, rng.random_range(0.0..6.0))
}

fn phase(k: &[f64], p: f64, x: &[f64]) -> f64 {
    x.iter().zip(k).map(|(a, b)| a * b).sum::<f64>() + p
}

/// `v₀ + sin(k·x + p)·v₁ + x⁰·v₂` with exact partials.
pub fn section(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Smooth<CVec> {
    let (v0, v1, v2) = (cvec(rng, n), cvec(rng, n), cvec(rng, n) * c(0.5, 0.));
    let (k, p) = wave(rng, dim);
    let value = {
        let (v0, v1, v2, k) = (v0.clone(), v1.clone(), v2.clone(), k.clone());
        Field::new(move |x: &[f64]| &v0 + &v1 * c(phase(&k, p, x).sin(), 0.) + &v2 * c(x[0], 0.))
    };
    let partials = (0..dim)
        .map(|mu| {
            let (v1, v2, k) = (v1.clone(), v2.clone(), k.clone());
            Field::new(move |x: &[f64]| {
                let d = &v1 * c(k[mu] * phase(&k, p, x).cos(), 0.);
                if mu == 0 {
                    d + &v2
                } else {
                    d
                }
            })
        })
        .collect();
    Smooth { value, partials }
}

/// `A₀ + cos(k·x + p)·A₁` with exact partials.
pub fn morphism(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Smooth<CMat> {
    let (a0, a1) = (cmat(rng, n), cmat(rng, n));
    let (k, p) = wave(rng, dim);
    random_morphism(a0, a1, k, p)
}

/// `a + b·sin(k·x + p)` with exact partials.
pub fn scalar(rng: &mut ChaCha8Rng, dim: usize) -> Smooth<Complex64> {
    let (a, b) = (cnum(rng), cnum(rng));
    let (k, p) = wave(rng, dim);
    let value = {
        let k = k.clone();
        Field::new(move |x: &[f64]| a + b * phase(&k, p, x).sin())
    };
    let partials = (0..dim)
        .map(|mu| {
            let k = k.clone();
            Field::new(move |x: &[f64]| b * (k[mu] * phase(&k, p, x).cos()))
        })
        .collect();
    Smooth { value, partials }
}
