//! Parametric families for trivializers, sections, morphisms, field
//! components, test functions and coordinate changes.
//!
//! Every smooth family carries its exact partial derivatives, which serve as
//! the reference for the finite-difference suites.

use std::hash::{Hash, Hasher};

use hilbert_bundle::linalg::{c, inverse_with_condition};
use hilbert_bundle::{
    CMat, CVec, Complex64, CoordinateChange, CoordinateChart, Field, SupportBox, TestFunction,
    Trivializer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::spec::{
    complex_matrix, complex_vector, invalid, params, poly, BundleSpec, ComplexIn, FamilyIn,
    LoadError, MonomialIn, NamedFamilyIn,
};

/// Condition-number bound for trivializers and basis changes on the grid.
pub const COND_BOUND: f64 = 1e8;

/// Stable 64-bit hash of a label, for deriving sub-seeds.
pub fn label_hash(label: &str) -> u64 {
    // DefaultHasher's algorithm is unspecified across releases; FNV-1a is not.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

struct Fnv(u64);

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h = Fnv(label_hash(label));
    seed.hash(&mut h);
    h.finish()
}

/// A field together with its exact partial derivatives.
#[derive(Debug, Clone)]
pub struct Smooth<T> {
    pub value: Field<T>,
    pub partials: Vec<Field<T>>,
}

impl<T: Clone + Send + Sync + 'static> Smooth<T> {
    pub fn eval(&self, x: &[f64]) -> hilbert_bundle::Result<T> {
        self.value.eval(x)
    }

    pub fn partial(&self, mu: usize, x: &[f64]) -> hilbert_bundle::Result<T> {
        self.partials[mu].eval(x)
    }
}

/// Complex polynomial in the base coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    terms: Vec<(Complex64, Vec<u32>)>,
}

impl Poly {
    pub fn new(terms: Vec<(Complex64, Vec<u32>)>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(coef, pow)| {
                let mono: f64 = pow.iter().zip(x).map(|(p, v)| v.powi(*p as i32)).product();
                coef * mono
            })
            .sum()
    }

    pub fn partial(&self, mu: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, pow)| pow[mu] > 0)
            .map(|(coef, pow)| {
                let mut p = pow.clone();
                p[mu] -= 1;
                (coef * f64::from(pow[mu]), p)
            })
            .collect();
        Poly { terms }
    }
}

fn poly_matrix(entries: &[Vec<Poly>], x: &[f64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| entries[i][j].eval(x))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale
    })
}

/// `exp(X)` and its derivative along `K`, from the upper-right block of
/// `exp([[X, K], [0, X]])`.
pub fn exp_with_derivative(x: &CMat, k: &CMat) -> (CMat, CMat) {
    let n = x.nrows();
    let mut big = CMat::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(x);
    big.view_mut((0, n), (n, n)).copy_from(k);
    big.view_mut((n, n), (n, n)).copy_from(x);
    let e = big.exp();
    (
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
    )
}

/// Matrix-valued families: trivializers, basis changes and field components.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFamily {
    Identity {
        n: usize,
    },
    /// `diag(exp(i·p_k(x)))`.
    DiagonalPhase {
        phases: Vec<Poly>,
    },
    /// `exp(K₀ + Σ_μ x^μ K_μ)`.
    ExpGenerator {
        generators: Vec<CMat>,
    },
    Polynomial {
        entries: Vec<Vec<Poly>>,
    },
    Constant {
        matrix: CMat,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalPhaseIn {
    phases: Vec<Vec<MonomialIn>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpGeneratorIn {
    generators: Option<Vec<Vec<Vec<ComplexIn>>>>,
    random_scale: Option<f64>,
    generator_seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialMatrixIn {
    entries: Vec<Vec<Vec<MonomialIn>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantMatrixIn {
    matrix: Vec<Vec<ComplexIn>>,
}

impl MatrixFamily {
    pub fn parse(
        what: &str,
        fam: &FamilyIn,
        n: usize,
        dim: usize,
        seed: u64,
    ) -> Result<Self, LoadError> {
        match fam.family.as_str() {
            "identity" => {
                params::<NoParams>(what, &fam.params)?;
                Ok(MatrixFamily::Identity { n })
            }
            "diagonal_phase" => {
                let p: DiagonalPhaseIn = params(what, &fam.params)?;
                if p.phases.len() != n {
                    return Err(invalid(format!(
                        "{what}: {} phases for fibre dimension {n}",
                        p.phases.len()
                    )));
                }
                let phases = p
                    .phases
                    .iter()
                    .map(|m| poly(what, m, dim))
                    .collect::<Result<_, _>>()?;
                Ok(MatrixFamily::DiagonalPhase { phases })
            }
            "exp_generator" => {
                let p: ExpGeneratorIn = params(what, &fam.params)?;
                let generators = match (p.generators, p.random_scale) {
                    (Some(gens), None) => {
                        if gens.len() != dim + 1 {
                            return Err(invalid(format!(
                                "{what}: expected {} generators (K0 plus one per axis), found {}",
                                dim + 1,
                                gens.len()
                            )));
                        }
                        gens.iter()
                            .map(|g| complex_matrix(what, g, n))
                            .collect::<Result<_, _>>()?
                    }
                    (None, Some(scale)) => {
                        if !(scale.is_finite() && scale >= 0.0) {
                            return Err(invalid(format!(
                                "{what}: random_scale must be finite and non-negative"
                            )));
                        }
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            p.generator_seed.unwrap_or(sub_seed(seed, what)),
                        );
                        (0..=dim)
                            .map(|_| gaussian_matrix(&mut rng, n, scale / n as f64))
                            .collect()
                    }
                    _ => {
                        return Err(invalid(format!(
                            "{what}: give exactly one of `generators` and `random_scale`"
                        )))
                    }
                };
                Ok(MatrixFamily::ExpGenerator { generators })
            }
            "polynomial" => {
                let p: PolynomialMatrixIn = params(what, &fam.params)?;
                if p.entries.len() != n || p.entries.iter().any(|r| r.len() != n) {
                    return Err(invalid(format!(
                        "{what}: expected {n}x{n} polynomial entries"
                    )));
                }
                let entries = p
                    .entries
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|m| poly(what, m, dim))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?;
                Ok(MatrixFamily::Polynomial { entries })
            }
            "constant" => {
                let p: ConstantMatrixIn = params(what, &fam.params)?;
                Ok(MatrixFamily::Constant {
                    matrix: complex_matrix(what, &p.matrix, n)?,
                })
            }
            other => Err(LoadError::UnknownFamily {
                kind: "matrix",
                name: other.to_string(),
            }),
        }
    }

    /// `C(x) = exp(x⁰·K)` with a fixed non-normal, non-unitary `K`.
    pub fn default_basis_change(n: usize, dim: usize) -> Self {
        let k = CMat::from_fn(n, n, |i, j| {
            if j == i + 1 {
                c(0.3, 0.0)
            } else if i == j {
                c(0.1 * i as f64, 0.2 * (i as f64 + 1.0))
            } else {
                c(0.0, 0.0)
            }
        });
        let mut generators = vec![CMat::zeros(n, n); dim + 1];
        generators[1] = k;
        MatrixFamily::ExpGenerator { generators }
    }

    pub fn smooth(&self, dim: usize) -> Smooth<CMat> {
        match self {
            MatrixFamily::Identity { n } => Smooth {
                value: Field::constant(CMat::identity(*n, *n)),
                partials: vec![Field::constant(CMat::zeros(*n, *n)); dim],
            },
            MatrixFamily::DiagonalPhase { phases } => {
                let p = phases.clone();
                let value = Field::new(move |x: &[f64]| {
                    CMat::from_diagonal(&CVec::from_iterator(
                        p.len(),
                        p.iter().map(|q| (c(0., 1.) * q.eval(x)).exp()),
                    ))
                });
                let partials = (0..dim)
                    .map(|mu| {
                        let p = phases.clone();
                        let dp: Vec<Poly> = phases.iter().map(|q| q.partial(mu)).collect();
                        Field::new(move |x: &[f64]| {
                            CMat::from_diagonal(&CVec::from_iterator(
                                p.len(),
                                p.iter().zip(&dp).map(|(q, d)| {
                                    c(0., 1.) * d.eval(x) * (c(0., 1.) * q.eval(x)).exp()
                                }),
                            ))
                        })
                    })
                    .collect();
                Smooth { value, partials }
            }
            MatrixFamily::ExpGenerator { generators } => {
                let exponent = {
                    let g = generators.clone();
                    move |x: &[f64]| {
                        let mut e = g[0].clone();
                        for (mu, k) in g[1..].iter().enumerate() {
                            e += k * c(x[mu], 0.);
                        }
                        e
                    }
                };
                let ex = exponent.clone();
                let value = Field::new(move |x: &[f64]| ex(x).exp());
                let partials = (0..dim)
                    .map(|mu| {
                        let ex = exponent.clone();
                        let k = generators[mu + 1].clone();
                        Field::new(move |x: &[f64]| exp_with_derivative(&ex(x), &k).1)
                    })
                    .collect();
                Smooth { value, partials }
            }
            MatrixFamily::Polynomial { entries } => {
                let e = entries.clone();
                let value = Field::new(move |x: &[f64]| poly_matrix(&e, x));
                let partials = (0..dim)
                    .map(|mu| {
                        let d: Vec<Vec<Poly>> = entries
                            .iter()
                            .map(|row| row.iter().map(|q| q.partial(mu)).collect())
                            .collect();
                        Field::new(move |x: &[f64]| poly_matrix(&d, x))
                    })
                    .collect();
                Smooth { value, partials }
            }
            MatrixFamily::Constant { matrix } => {
                let n = matrix.nrows();
                Smooth {
                    value: Field::constant(matrix.clone()),
                    partials: vec![Field::constant(CMat::zeros(n, n)); dim],
                }
            }
        }
    }

    /// Rejects families that are singular or badly conditioned somewhere on
    /// the grid.
    pub fn check_invertible_on(&self, chart: &CoordinateChart, n: usize) -> Result<(), LoadError> {
        let value = self.smooth(chart.dim()).value;
        let lo = vec![0; chart.dim()];
        let hi: Vec<usize> = chart.extents().iter().map(|e| e - 1).collect();
        for p in chart.box_points(&lo, &hi) {
            let m = value.eval(&p.coords).map_err(|e| invalid(e.to_string()))?;
            if m.nrows() != n || m.ncols() != n {
                return Err(invalid(format!(
                    "matrix family yields {}x{} matrices, fibre is {n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            match inverse_with_condition(&m) {
                Some((_, cond)) if cond.is_finite() && cond <= COND_BOUND => {}
                other => {
                    return Err(invalid(format!(
                        "matrix family is singular or ill-conditioned at {:?} (condition {:e})",
                        p.coords,
                        other.map_or(f64::INFINITY, |o| o.1)
                    )))
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SectionFamily {
    Constant {
        values: CVec,
    },
    Polynomial {
        entries: Vec<Poly>,
    },
    /// `a·exp(i k·x)`.
    PlaneWave {
        amplitude: CVec,
        wavevector: Vec<f64>,
    },
    /// The transported section through `value ∈ fibre_at`.
    Transported {
        at: Vec<f64>,
        value: CVec,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantSectionIn {
    values: Vec<ComplexIn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialSectionIn {
    entries: Vec<Vec<MonomialIn>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneWaveIn {
    amplitude: Vec<ComplexIn>,
    wavevector: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportedSectionIn {
    at: Vec<f64>,
    value: Vec<ComplexIn>,
}

fn check_point(what: &str, at: &[f64], dim: usize) -> Result<(), LoadError> {
    if at.len() != dim || at.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!(
            "{what}: `at` must be {dim} finite coordinates"
        )));
    }
    Ok(())
}

impl SectionFamily {
    pub fn parse(
        s: &NamedFamilyIn,
        n: usize,
        dim: usize,
        _chart: &CoordinateChart,
    ) -> Result<Self, LoadError> {
        let what = format!("section `{}`", s.name);
        match s.family.as_str() {
            "constant" => {
                let p: ConstantSectionIn = params(&what, &s.params)?;
                Ok(SectionFamily::Constant {
                    values: complex_vector(&what, &p.values, n)?,
                })
            }
            "polynomial" => {
                let p: PolynomialSectionIn = params(&what, &s.params)?;
                if p.entries.len() != n {
                    return Err(invalid(format!("{what}: expected {n} polynomial entries")));
                }
                let entries = p
                    .entries
                    .iter()
                    .map(|m| poly(&what, m, dim))
                    .collect::<Result<_, _>>()?;
                Ok(SectionFamily::Polynomial { entries })
            }
            "plane_wave" => {
                let p: PlaneWaveIn = params(&what, &s.params)?;
                if p.wavevector.len() != dim {
                    return Err(invalid(format!(
                        "{what}: wavevector must have {dim} components"
                    )));
                }
                Ok(SectionFamily::PlaneWave {
                    amplitude: complex_vector(&what, &p.amplitude, n)?,
                    wavevector: p.wavevector,
                })
            }
            "transported" => {
                let p: TransportedSectionIn = params(&what, &s.params)?;
                check_point(&what, &p.at, dim)?;
                Ok(SectionFamily::Transported {
                    at: p.at,
                    value: complex_vector(&what, &p.value, n)?,
                })
            }
            other => Err(LoadError::UnknownFamily {
                kind: "section",
                name: other.to_string(),
            }),
        }
    }

    pub fn smooth(&self, triv: &Trivializer, l: &Smooth<CMat>) -> Result<Smooth<CVec>, LoadError> {
        let dim = triv.base_dim();
        Ok(match self {
            SectionFamily::Constant { values } => Smooth {
                value: Field::constant(values.clone()),
                partials: vec![Field::constant(CVec::zeros(values.len())); dim],
            },
            SectionFamily::Polynomial { entries } => {
                let e = entries.clone();
                let value = Field::new(move |x: &[f64]| {
                    CVec::from_iterator(e.len(), e.iter().map(|q| q.eval(x)))
                });
                let partials = (0..dim)
                    .map(|mu| {
                        let d: Vec<Poly> = entries.iter().map(|q| q.partial(mu)).collect();
                        Field::new(move |x: &[f64]| {
                            CVec::from_iterator(d.len(), d.iter().map(|q| q.eval(x)))
                        })
                    })
                    .collect();
                Smooth { value, partials }
            }
            SectionFamily::PlaneWave {
                amplitude,
                wavevector,
            } => {
                let phase = {
                    let k = wavevector.clone();
                    move |x: &[f64]| {
                        (c(0., 1.) * x.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>()).exp()
                    }
                };
                let (a, ph) = (amplitude.clone(), phase.clone());
                let value = Field::new(move |x: &[f64]| &a * ph(x));
                let partials = (0..dim)
                    .map(|mu| {
                        let (a, ph, km) = (amplitude.clone(), phase.clone(), wavevector[mu]);
                        Field::new(move |x: &[f64]| &a * (c(0., km) * ph(x)))
                    })
                    .collect();
                Smooth { value, partials }
            }
            SectionFamily::Transported { at, value } => {
                let x0 = triv.matrix_at(at).map_err(|e| invalid(e.to_string()))? * value;
                let (t, a) = (triv.clone(), x0.clone());
                let val = Field::fallible(move |x: &[f64]| Ok(t.inverse_at(x)? * &a));
                let partials = (0..dim)
                    .map(|mu| {
                        let (t, a, l) = (triv.clone(), x0.clone(), l.clone());
                        Field::fallible(move |x: &[f64]| {
                            let inv = t.inverse_at(x)?;
                            Ok(-(&inv * l.partial(mu, x)? * &inv * &a))
                        })
                    })
                    .collect();
                Smooth {
                    value: val,
                    partials,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MorphismFamily {
    Constant {
        matrix: CMat,
    },
    Polynomial {
        entries: Vec<Vec<Poly>>,
    },
    /// `l°_at(source)`.
    TransportedFrom {
        source: usize,
        at: Vec<f64>,
    },
    /// `A₀ + cos(k·x + p)·A₁` with Gaussian `A₀, A₁`.
    Random {
        a0: CMat,
        a1: CMat,
        k: Vec<f64>,
        p: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportedFromIn {
    source: String,
    at: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomMorphismIn {
    #[serde(default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

impl MorphismFamily {
    pub fn parse(
        m: &NamedFamilyIn,
        n: usize,
        dim: usize,
        seed: u64,
        earlier: &[(String, MorphismFamily)],
    ) -> Result<Self, LoadError> {
        let what = format!("morphism `{}`", m.name);
        match m.family.as_str() {
            "constant" => {
                let p: ConstantMatrixIn = params(&what, &m.params)?;
                Ok(MorphismFamily::Constant {
                    matrix: complex_matrix(&what, &p.matrix, n)?,
                })
            }
            "polynomial" => match MatrixFamily::parse(
                &what,
                &FamilyIn {
                    family: "polynomial".to_string(),
                    params: m.params.clone(),
                },
                n,
                dim,
                seed,
            )? {
                MatrixFamily::Polynomial { entries } => Ok(MorphismFamily::Polynomial { entries }),
                _ => unreachable!("polynomial family parses to a polynomial"),
            },
            "transported_from" => {
                let p: TransportedFromIn = params(&what, &m.params)?;
                check_point(&what, &p.at, dim)?;
                let source = earlier
                    .iter()
                    .position(|(name, _)| *name == p.source)
                    .ok_or_else(|| {
                        invalid(format!(
                            "{what}: source `{}` is not an earlier morphism",
                            p.source
                        ))
                    })?;
                Ok(MorphismFamily::TransportedFrom { source, at: p.at })
            }
            "random" => {
                let p: RandomMorphismIn = params(&what, &m.params)?;
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &what));
                Ok(MorphismFamily::Random {
                    a0: gaussian_matrix(&mut rng, n, p.scale),
                    a1: gaussian_matrix(&mut rng, n, p.scale),
                    k: (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect(),
                    p: rng.random_range(0.0..6.0),
                })
            }
            other => Err(LoadError::UnknownFamily {
                kind: "morphism",
                name: other.to_string(),
            }),
        }
    }

    pub fn smooth(
        &self,
        triv: &Trivializer,
        l: &Smooth<CMat>,
        earlier: &[Smooth<CMat>],
    ) -> Result<Smooth<CMat>, LoadError> {
        let dim = triv.base_dim();
        Ok(match self {
            MorphismFamily::Constant { matrix } => MatrixFamily::Constant {
                matrix: matrix.clone(),
            }
            .smooth(dim),
            MorphismFamily::Polynomial { entries } => MatrixFamily::Polynomial {
                entries: entries.clone(),
            }
            .smooth(dim),
            MorphismFamily::TransportedFrom { source, at } => {
                let (lx, lx_inv) = triv.pair_at(at).map_err(|e| invalid(e.to_string()))?;
                let anchor = lx
                    * earlier[*source]
                        .eval(at)
                        .map_err(|e| invalid(e.to_string()))?
                    * lx_inv;
                let (t, a, lf) = (triv.clone(), anchor.clone(), l.clone());
                let value = Field::fallible(move |y: &[f64]| {
                    let inv = t.inverse_at(y)?;
                    Ok(inv * &a * lf.eval(y)?)
                });
                let partials = (0..dim)
                    .map(|mu| {
                        let (t, a, lf) = (triv.clone(), anchor.clone(), l.clone());
                        Field::fallible(move |y: &[f64]| {
                            let (ly, inv) = t.pair_at(y)?;
                            let dl = lf.partial(mu, y)?;
                            Ok(&inv * &a * &dl - &inv * &dl * &inv * &a * ly)
                        })
                    })
                    .collect();
                Smooth { value, partials }
            }
            MorphismFamily::Random { a0, a1, k, p } => {
                random_morphism(a0.clone(), a1.clone(), k.clone(), *p)
            }
        })
    }
}

/// `A₀ + cos(k·x + p)·A₁` with exact partials.
pub fn random_morphism(a0: CMat, a1: CMat, k: Vec<f64>, p: f64) -> Smooth<CMat> {
    let dim = k.len();
    let phase = {
        let k = k.clone();
        move |x: &[f64]| x.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>() + p
    };
    let (b0, b1, ph) = (a0.clone(), a1.clone(), phase.clone());
    let value = Field::new(move |x: &[f64]| &b0 + &b1 * c(ph(x).cos(), 0.));
    let partials = (0..dim)
        .map(|mu| {
            let (b1, ph, km) = (a1.clone(), phase.clone(), k[mu]);
            Field::new(move |x: &[f64]| &b1 * c(-km * ph(x).sin(), 0.))
        })
        .collect();
    Smooth { value, partials }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunctionShape {
    Indicator,
    /// Product of tent functions vanishing on the box faces.
    Hat,
    /// `exp(−|y − center|²/(2·width²))`, cut off outside the box.
    GaussianTruncated {
        center: Vec<f64>,
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionFamily {
    pub shape: TestFunctionShape,
    pub support: SupportBox,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TestFunctionIn {
    lo: Vec<usize>,
    hi: Vec<usize>,
    amplitudes: Option<Vec<ComplexIn>>,
    center: Option<Vec<f64>>,
    width: Option<f64>,
}

impl TestFunctionFamily {
    pub fn parse(
        t: &NamedFamilyIn,
        chart: &CoordinateChart,
        n_comp: usize,
    ) -> Result<Self, LoadError> {
        let what = format!("test function `{}`", t.name);
        let p: TestFunctionIn = params(&what, &t.params)?;
        let dim = chart.dim();
        if p.lo.len() != dim || p.hi.len() != dim || p.lo.iter().zip(&p.hi).any(|(a, b)| a > b) {
            return Err(invalid(format!(
                "{what}: lo/hi must be {dim}-D with lo <= hi"
            )));
        }
        if !chart.contains_box(&p.lo, &p.hi) {
            return Err(invalid(format!("{what}: support box leaves the grid")));
        }
        let amplitudes = match p.amplitudes {
            None => vec![c(1., 0.); n_comp],
            Some(a) if a.len() == n_comp => a.iter().map(|z| z.value()).collect(),
            Some(a) => {
                return Err(invalid(format!(
                    "{what}: {} amplitudes for {n_comp} components",
                    a.len()
                )))
            }
        };
        let shape = match t.family.as_str() {
            "indicator" | "hat" if p.center.is_some() || p.width.is_some() => {
                return Err(invalid(format!(
                    "{what}: center/width only apply to gaussian_truncated"
                )))
            }
            "indicator" => TestFunctionShape::Indicator,
            "hat" => TestFunctionShape::Hat,
            "gaussian_truncated" => {
                let center = p.center.unwrap_or_else(|| {
                    let lo = chart.coords_of(&p.lo);
                    let hi = chart.coords_of(&p.hi);
                    lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
                });
                let width = p.width.unwrap_or(1.0);
                if center.len() != dim || !(width > 0.0) {
                    return Err(invalid(format!(
                        "{what}: center must be {dim}-D and width positive"
                    )));
                }
                TestFunctionShape::GaussianTruncated { center, width }
            }
            other => {
                return Err(LoadError::UnknownFamily {
                    kind: "test function",
                    name: other.to_string(),
                })
            }
        };
        Ok(Self {
            shape,
            support: SupportBox::new(p.lo, p.hi),
            amplitudes,
        })
    }

    pub fn profile(
        &self,
        chart: &CoordinateChart,
    ) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
        let lo = chart.coords_of(&self.support.lo);
        let hi = chart.coords_of(&self.support.hi);
        let shape = self.shape.clone();
        move |y: &[f64]| match &shape {
            TestFunctionShape::Indicator => 1.0,
            TestFunctionShape::Hat => y
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let (m, r) = (0.5 * (lo[k] + hi[k]), 0.5 * (hi[k] - lo[k]));
                    if r == 0.0 {
                        1.0
                    } else {
                        (1.0 - (v - m).abs() / r).max(0.0)
                    }
                })
                .product(),
            TestFunctionShape::GaussianTruncated { center, width } => {
                let r2: f64 = y.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                (-r2 / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn build(&self, chart: &CoordinateChart) -> TestFunction {
        let profile = self.profile(chart);
        let amps = self.amplitudes.clone();
        TestFunction::new(chart.clone(), self.support.clone(), move |i, y| {
            amps.get(i).copied().unwrap_or(c(0., 0.)) * profile(y)
        })
        .expect("support validated at load")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateChangeFamily {
    Identity,
    Scale { factors: Vec<f64> },
    Cubic { a: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleIn {
    factors: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CubicIn {
    a: f64,
}

impl CoordinateChangeFamily {
    pub fn parse(f: &FamilyIn, dim: usize) -> Result<Self, LoadError> {
        let what = "coordinate_change";
        match f.family.as_str() {
            "identity" => {
                params::<NoParams>(what, &f.params)?;
                Ok(CoordinateChangeFamily::Identity)
            }
            "scale" => {
                let p: ScaleIn = params(what, &f.params)?;
                if p.factors.len() != dim || p.factors.iter().any(|s| !(s.is_finite() && *s != 0.0))
                {
                    return Err(invalid(format!(
                        "{what}: need {dim} finite non-zero factors"
                    )));
                }
                Ok(CoordinateChangeFamily::Scale { factors: p.factors })
            }
            "cubic" => {
                let p: CubicIn = params(what, &f.params)?;
                if !(p.a.is_finite() && p.a >= 0.0) {
                    return Err(invalid(format!(
                        "{what}: cubic coefficient must be non-negative"
                    )));
                }
                Ok(CoordinateChangeFamily::Cubic { a: p.a })
            }
            other => Err(LoadError::UnknownFamily {
                kind: "coordinate change",
                name: other.to_string(),
            }),
        }
    }

    pub fn build(&self, dim: usize) -> CoordinateChange {
        match self {
            CoordinateChangeFamily::Identity => CoordinateChange::identity(dim),
            CoordinateChangeFamily::Scale { factors } => CoordinateChange::scaling(factors.clone()),
            CoordinateChangeFamily::Cubic { a } => CoordinateChange::cubic(*a),
        }
    }
}

/// Everything a spec describes, instantiated.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: BundleSpec,
    pub triv: Trivializer,
    /// `L` with exact partials.
    pub l: Smooth<CMat>,
    pub sections: Vec<(String, Smooth<CVec>)>,
    pub morphisms: Vec<(String, Smooth<CMat>)>,
    /// Operator fields `φ_i` of the typical fibre.
    pub fields: Option<Vec<Smooth<CMat>>>,
    pub test_functions: Vec<(String, TestFunction)>,
    pub change: CoordinateChange,
    pub basis: Smooth<CMat>,
}

impl Model {
    pub fn build(spec: &BundleSpec) -> Result<Model, LoadError> {
        let dim = spec.dim();
        let l = spec.trivializer.smooth(dim);
        let triv =
            Trivializer::new(spec.fibre.clone(), dim, l.value.clone()).with_cond_bound(COND_BOUND);
        let sections = spec
            .sections
            .iter()
            .map(|(name, f)| Ok((name.clone(), f.smooth(&triv, &l)?)))
            .collect::<Result<Vec<_>, LoadError>>()?;
        let mut built: Vec<Smooth<CMat>> = Vec::new();
        for (_, f) in &spec.morphisms {
            let s = f.smooth(&triv, &l, &built)?;
            built.push(s);
        }
        let morphisms = spec
            .morphisms
            .iter()
            .map(|(n, _)| n.clone())
            .zip(built)
            .collect();
        let fields = spec
            .fields
            .as_ref()
            .map(|f| f.components.iter().map(|m| m.smooth(dim)).collect());
        let test_functions = spec
            .test_functions
            .iter()
            .map(|(name, t)| (name.clone(), t.build(&spec.chart)))
            .collect();
        Ok(Model {
            spec: spec.clone(),
            change: spec.coordinate_change.build(dim),
            basis: spec.basis_change.smooth(dim),
            triv,
            l,
            sections,
            morphisms,
            fields,
            test_functions,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }
}
