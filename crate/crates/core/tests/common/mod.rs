#![allow(dead_code)]

use hilbert_bundle::linalg::c;
use hilbert_bundle::{
    BundleMorphism, CMat, CVec, Complex64, FibreSpace, Field, Section, Trivializer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = a.norm();
    let mut s = 0;
    while norm / f64::from(1u32 << s) > 0.25 {
        s += 1;
    }
    let scaled = a * c(1.0 / f64::from(1u32 << s), 0.);
    let mut term = CMat::identity(n, n);
    let mut out = CMat::identity(n, n);
    for k in 1..20 {
        term = &term * &scaled * c(1.0 / k as f64, 0.);
        out += &term;
    }
    for _ in 0..s {
        out = &out * &out;
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnum(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn cmat(r: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| cnum(r) * scale)
}

pub fn cvec(r: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| cnum(r))
}

pub fn point(r: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| r.random_range(-1.0..1.0)).collect()
}

pub fn hermitian(r: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = cmat(r, n, 1.0);
    (&a + a.adjoint()) * c(0.5, 0.)
}

pub fn unitary(r: &mut ChaCha8Rng, n: usize) -> CMat {
    expm(&(hermitian(r, n) * c(0., 1.)))
}

/// `B*B + I`.
pub fn gram(r: &mut ChaCha8Rng, n: usize) -> CMat {
    let b = cmat(r, n, 0.5);
    b.adjoint() * b + CMat::identity(n, n)
}

/// `L(x) = exp(K₀ + Σ_μ sin(x^μ + φ_μ)·K_μ)`, generically non-commuting.
pub fn trivializer(r: &mut ChaCha8Rng, n: usize, d: usize, with_gram: bool) -> Trivializer {
    // Generator norms stay O(1) so cond L(x) is bounded independently of n, d.
    let k0 = cmat(r, n, 0.3 / n as f64);
    let ks: Vec<CMat> = (0..d)
        .map(|_| cmat(r, n, 0.5 / (n as f64 * (d as f64).sqrt())))
        .collect();
    let phases: Vec<f64> = (0..d).map(|_| r.random_range(0.0..6.0)).collect();
    let space = if with_gram {
        FibreSpace::with_gram(gram(r, n)).unwrap()
    } else {
        FibreSpace::new(n).unwrap()
    };
    Trivializer::new(
        space,
        d,
        Field::new(move |x: &[f64]| {
            let mut g = k0.clone();
            for (mu, k) in ks.iter().enumerate() {
                g += k * c((x[mu] + phases[mu]).sin(), 0.);
            }
            expm(&g)
        }),
    )
}

fn trig_coeffs(r: &mut ChaCha8Rng, d: usize) -> (Vec<f64>, Vec<f64>) {
    let k = (0..d).map(|_| r.random_range(-1.5..1.5)).collect();
    let p = (0..d).map(|_| r.random_range(0.0..6.0)).collect();
    (k, p)
}

fn phase(k: &[f64], p: &[f64], x: &[f64]) -> f64 {
    x.iter().zip(k).zip(p).map(|((x, k), p)| x * k + p).sum()
}

/// `Y(x) = v₀ + sin(k·x + p)·v₁ + x^0·v₂`.
pub fn section(r: &mut ChaCha8Rng, n: usize, d: usize) -> Section {
    let (v0, v1, v2) = (cvec(r, n), cvec(r, n), cvec(r, n));
    let (k, p) = trig_coeffs(r, d);
    Section::from_fn(move |x: &[f64]| &v0 + &v1 * c(phase(&k, &p, x).sin(), 0.) + &v2 * c(x[0], 0.))
}

/// `A(x) = A₀ + cos(k·x + p)·A₁`.
pub fn morphism_field(r: &mut ChaCha8Rng, n: usize, d: usize) -> Field<CMat> {
    let (a0, a1) = (cmat(r, n, 1.0), cmat(r, n, 1.0));
    let (k, p) = trig_coeffs(r, d);
    Field::new(move |x: &[f64]| &a0 + &a1 * c(phase(&k, &p, x).cos(), 0.))
}

pub fn morphism(r: &mut ChaCha8Rng, n: usize, d: usize) -> BundleMorphism {
    BundleMorphism::new(morphism_field(r, n, d))
}

/// `f(x) = a + b·sin(k·x + p)`, with its exact partial derivatives.
pub fn scalar(r: &mut ChaCha8Rng, d: usize) -> (Field<Complex64>, Vec<Field<Complex64>>) {
    let (a, b) = (cnum(r), cnum(r));
    let (k, p) = trig_coeffs(r, d);
    let kk = k.clone();
    let pp = p.clone();
    let f = Field::new(move |x: &[f64]| a + b * phase(&kk, &pp, x).sin());
    let df = (0..d)
        .map(|mu| {
            let (k, p) = (k.clone(), p.clone());
            Field::new(move |x: &[f64]| b * k[mu] * phase(&k, &p, x).cos())
        })
        .collect();
    (f, df)
}
