//! Bundle morphisms, the morphisms of sections they generate, the bundle of
//! restricted morphisms and the transport `l°` associated to `l`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bundle::{FibreVector, Section, Trivializer};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{partial_derivative, DifferenceScheme};
use crate::CMat;

/// A fibre-preserving morphism `A` (a B-morphism), by its restrictions
/// `A_x = A|_{fibre_x}` written in the fibre bases `{e_i(x)}`.
#[derive(Debug, Clone)]
pub struct BundleMorphism {
    field: Field<CMat>,
}

impl BundleMorphism {
    pub fn new(field: Field<CMat>) -> Self {
        Self { field }
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        Self::new(Field::new(f))
    }

    pub fn constant(m: CMat) -> Self {
        Self::new(Field::constant(m))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMat::identity(n, n))
    }

    pub fn field(&self) -> &Field<CMat> {
        &self.field
    }

    /// `A_x`.
    pub fn eval(&self, x: &[f64]) -> Result<CMat> {
        self.field.eval(x)
    }

    /// `A_x(u)`; the image stays in the fibre over `u.at`.
    pub fn apply(&self, u: &FibreVector) -> Result<FibreVector> {
        let a = self.eval(&u.at)?;
        if a.ncols() != u.components.len() {
            return Err(Error::DimensionMismatch {
                expected: a.ncols(),
                found: u.components.len(),
            });
        }
        Ok(FibreVector::new(u.at.clone(), a * &u.components))
    }

    /// Pointwise composition `self ∘ other`.
    pub fn compose(&self, other: &BundleMorphism) -> BundleMorphism {
        let a = self.clone();
        let b = other.clone();
        BundleMorphism::new(Field::fallible(move |x| Ok(a.eval(x)? * b.eval(x)?)))
    }
}

type SectionFunctional = dyn Fn(&Section) -> Section + Send + Sync;

/// A morphism of the set of sections.
#[derive(Clone)]
pub enum SectionMorphism {
    /// `Â(X) = A ∘ X` for a bundle morphism `A`.
    Generated(BundleMorphism),
    /// Any other map on sections.
    General(Arc<SectionFunctional>),
}

impl fmt::Debug for SectionMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectionMorphism::Generated(a) => f.debug_tuple("Generated").field(a).finish(),
            SectionMorphism::General(_) => f.write_str("General(..)"),
        }
    }
}

impl SectionMorphism {
    pub fn generated(a: BundleMorphism) -> Self {
        SectionMorphism::Generated(a)
    }

    pub fn general<F>(f: F) -> Self
    where
        F: Fn(&Section) -> Section + Send + Sync + 'static,
    {
        SectionMorphism::General(Arc::new(f))
    }

    pub fn generator(&self) -> Result<&BundleMorphism> {
        match self {
            SectionMorphism::Generated(a) => Ok(a),
            SectionMorphism::General(_) => Err(Error::UnsupportedMorphism),
        }
    }

    /// `Â(X)`; for a generated morphism `(Â(X))(x) = A_x(X(x))`.
    pub fn apply(&self, section: &Section) -> Section {
        match self {
            SectionMorphism::Generated(a) => {
                let a = a.clone();
                let s = section.clone();
                Section::new(Field::fallible(move |x| {
                    let ax = a.eval(x)?;
                    let sx = s.eval(x)?;
                    if ax.ncols() != sx.len() {
                        return Err(Error::DimensionMismatch {
                            expected: ax.ncols(),
                            found: sx.len(),
                        });
                    }
                    Ok(ax * sx)
                }))
            }
            SectionMorphism::General(f) => f(section),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SectionMorphism) -> SectionMorphism {
        match (self, other) {
            (SectionMorphism::Generated(a), SectionMorphism::Generated(c)) => {
                SectionMorphism::Generated(a.compose(c))
            }
            _ => {
                let outer = self.clone();
                let inner = other.clone();
                SectionMorphism::general(move |s| outer.apply(&inner.apply(s)))
            }
        }
    }
}

/// A section of the bundle of restricted morphisms: `x ↦ χ_x`, an
/// endomorphism of the fibre over `x`.
#[derive(Debug, Clone)]
pub struct MorphismSection {
    field: Field<CMat>,
}

impl MorphismSection {
    pub fn new(field: Field<CMat>) -> Self {
        Self { field }
    }

    pub fn eval(&self, x: &[f64]) -> Result<CMat> {
        self.field.eval(x)
    }

    pub fn field(&self) -> &Field<CMat> {
        &self.field
    }
}

/// `χ: A ↦ (b ↦ A|_{fibre_b})`. Both sides carry the same matrix field; only
/// the role changes.
pub fn chi(a: &BundleMorphism) -> MorphismSection {
    MorphismSection::new(a.field.clone())
}

/// The inverse of [`chi`]: the morphism whose restriction to each fibre is the
/// section's value there.
pub fn chi_inverse(section: &MorphismSection) -> BundleMorphism {
    BundleMorphism::new(section.field.clone())
}

/// `l°_{x→y}(χ_x) = l_{x→y}∘χ_x∘l_{y→x} = L(y)⁻¹·(L(x)·χ_x·L(x)⁻¹)·L(y)`.
pub fn assoc_transport(triv: &Trivializer, x: &[f64], y: &[f64], chi_x: &CMat) -> Result<CMat> {
    triv.space().check_operator(chi_x)?;
    let (lx, lx_inv) = triv.pair_at(x)?;
    let (ly, ly_inv) = triv.pair_at(y)?;
    Ok(ly_inv * (lx * chi_x * lx_inv) * ly)
}

/// The `l°`-transported morphism `y ↦ l°_{x0→y}(χ₀)`.
pub fn transported_morphism(triv: &Trivializer, x0: &[f64], chi0: &CMat) -> Result<BundleMorphism> {
    triv.space().check_operator(chi0)?;
    let (l0, l0_inv) = triv.pair_at(x0)?;
    let anchor = l0 * chi0 * l0_inv;
    let triv = triv.clone();
    Ok(BundleMorphism::new(Field::fallible(move |y| {
        let (ly, ly_inv) = triv.pair_at(y)?;
        Ok(ly_inv * &anchor * ly)
    })))
}

/// `l°_x(A)`: the transported morphism seeded by `A`'s restriction at `x`.
pub fn transported_from_morphism(
    triv: &Trivializer,
    x: &[f64],
    a: &BundleMorphism,
) -> Result<BundleMorphism> {
    transported_morphism(triv, x, &a.eval(x)?)
}

/// `D°_μ` by its defining limit,
/// `lim_{ε→0} [l°_{x(ε,μ)→x}(A_{x(ε,μ)}) − A_x] / ε`.
pub fn d_circ_mu_limit(
    triv: &Trivializer,
    a: &MorphismSection,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<CMat> {
    partial_derivative(
        |z: &[f64]| assoc_transport(triv, z, x, &a.eval(z)?),
        x,
        mu,
        scheme,
    )
}

/// `D°_μ` in closed form, `L⁻¹·∂_μ(L·A·L⁻¹)·L` at `x`.
pub fn d_circ_mu(
    triv: &Trivializer,
    a: &MorphismSection,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<CMat> {
    let (l, l_inv) = triv.pair_at(x)?;
    let d: CMat = partial_derivative(
        |z: &[f64]| {
            let (lz, lz_inv) = triv.pair_at(z)?;
            Ok(lz * a.eval(z)? * lz_inv)
        },
        x,
        mu,
        scheme,
    )?;
    Ok(l_inv * d * l)
}

/// `l̆_x Â`: maps a section `Y` and a point `y` to the vector
/// `l_{y→x}(A_y(Y(y))) − A_x(l_{y→x}(Y(y)))` of the fibre over `x`.
#[derive(Debug, Clone)]
pub struct BreveL {
    triv: Trivializer,
    morphism: BundleMorphism,
    x: Vec<f64>,
    a_x: CMat,
}

pub fn breve_l(triv: &Trivializer, a_hat: &SectionMorphism, x: &[f64]) -> Result<BreveL> {
    let morphism = a_hat.generator()?.clone();
    let a_x = morphism.eval(x)?;
    triv.space().check_operator(&a_x)?;
    Ok(BreveL {
        triv: triv.clone(),
        morphism,
        x: x.to_vec(),
        a_x,
    })
}

impl BreveL {
    pub fn base_point(&self) -> &[f64] {
        &self.x
    }

    pub fn eval(&self, section: &Section, y: &[f64]) -> Result<FibreVector> {
        let to_x = self.triv.transport(y, &self.x)?.matrix;
        let yy = section.eval(y)?;
        let a_y = self.morphism.eval(y)?;
        let value = &to_x * (a_y * &yy) - &self.a_x * (to_x * yy);
        Ok(FibreVector::new(self.x.clone(), value))
    }

    /// `∂/∂y^μ` of `y ↦ ((l̆_xÂ)(Y))(y)` at `y = x`.
    pub fn derivative_at_base(
        &self,
        section: &Section,
        mu: usize,
        scheme: &DifferenceScheme,
    ) -> Result<FibreVector> {
        let d = partial_derivative(
            |y: &[f64]| Ok(self.eval(section, y)?.components),
            &self.x,
            mu,
            scheme,
        )?;
        Ok(FibreVector::new(self.x.clone(), d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::FibreSpace;
    use crate::linalg::{c, mat_residual};
    use crate::{CVec, Complex64};
    use alloc::vec;

    fn phase_triv() -> Trivializer {
        Trivializer::new(
            FibreSpace::new(2).unwrap(),
            1,
            Field::new(|x: &[f64]| {
                CMat::from_diagonal(&CVec::from_vec(vec![
                    c(1., 0.),
                    Complex64::from_polar(1., x[0]),
                ]))
            }),
        )
    }

    fn raising() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
    }

    #[test]
    fn assoc_transport_examples() {
        let t = phase_triv();
        let m = raising();
        assert_eq!(assoc_transport(&t, &[0.3], &[0.3], &m).unwrap(), m);
        let id = CMat::identity(2, 2);
        assert!(mat_residual(&assoc_transport(&t, &[0.3], &[1.0], &id).unwrap(), &id) < 1e-15);
        let tt = 0.8;
        let expected = CMat::from_row_slice(
            2,
            2,
            &[
                c(0., 0.),
                Complex64::from_polar(1., tt),
                c(0., 0.),
                c(0., 0.),
            ],
        );
        assert!(mat_residual(&assoc_transport(&t, &[0.0], &[tt], &m).unwrap(), &expected) < 1e-15);
    }

    #[test]
    fn transported_morphism_is_anchored() {
        let t = phase_triv();
        let m = raising();
        let a = transported_morphism(&t, &[0.4], &m).unwrap();
        assert!(mat_residual(&a.eval(&[0.4]).unwrap(), &m) < 1e-15);
        let id_triv = Trivializer::identity(FibreSpace::new(2).unwrap(), 1);
        let b = transported_morphism(&id_triv, &[0.4], &m).unwrap();
        assert_eq!(b.eval(&[3.0]).unwrap(), m);
    }

    #[test]
    fn chi_round_trip_is_identity() {
        let a = BundleMorphism::from_fn(|x: &[f64]| CMat::identity(2, 2) * c(x[0], 1.0));
        let back = chi_inverse(&chi(&a));
        for x in [[0.0], [0.5], [-2.0]] {
            assert_eq!(back.eval(&x).unwrap(), a.eval(&x).unwrap());
        }
        let id = chi(&BundleMorphism::identity(3));
        assert_eq!(id.eval(&[1.0]).unwrap(), CMat::identity(3, 3));
    }

    #[test]
    fn d_circ_reduces_to_derivative_for_identity_trivializer() {
        let t = Trivializer::identity(FibreSpace::new(2).unwrap(), 1);
        let b = raising();
        let bb = b.clone();
        let a = chi(&BundleMorphism::from_fn(move |x: &[f64]| &bb * c(x[0], 0.)));
        let s = DifferenceScheme::default();
        assert!(mat_residual(&d_circ_mu(&t, &a, &[0.7], 0, &s).unwrap(), &b) < 1e-9);
        assert!(mat_residual(&d_circ_mu_limit(&t, &a, &[0.7], 0, &s).unwrap(), &b) < 1e-9);
    }

    #[test]
    fn d_circ_annihilates_transported_morphisms() {
        let t = phase_triv();
        let a = transported_morphism(&t, &[0.1], &raising()).unwrap();
        let s = DifferenceScheme::default();
        let d = d_circ_mu(&t, &chi(&a), &[0.9], 0, &s).unwrap();
        assert!(d.norm() < 1e-9);
    }

    #[test]
    fn breve_l_vanishes_at_base_point() {
        let t = phase_triv();
        let a = SectionMorphism::generated(BundleMorphism::from_fn(|x: &[f64]| {
            CMat::from_row_slice(2, 2, &[c(x[0], 0.), c(1., 0.), c(0., 2.), c(-1., 0.)])
        }));
        let y = Section::from_fn(|x: &[f64]| CVec::from_vec(vec![c(x[0], 1.), c(1., -x[0])]));
        let b = breve_l(&t, &a, &[0.5]).unwrap();
        assert_eq!(b.eval(&y, &[0.5]).unwrap().components, CVec::zeros(2));
        let general = SectionMorphism::general(|s| s.clone());
        assert!(matches!(
            breve_l(&t, &general, &[0.5]),
            Err(Error::UnsupportedMorphism)
        ));
    }

    #[test]
    fn section_morphism_composition_stays_generated() {
        let a = SectionMorphism::generated(BundleMorphism::constant(raising()));
        let b = SectionMorphism::generated(BundleMorphism::identity(2));
        assert!(matches!(a.compose(&b), SectionMorphism::Generated(_)));
        let g = SectionMorphism::general(|s| s.clone());
        assert!(matches!(a.compose(&g), SectionMorphism::General(_)));
        let y = Section::from_fn(|_| CVec::from_vec(vec![c(0., 0.), c(1., 0.)]));
        let out = a.compose(&g).apply(&y).eval(&[0.0]).unwrap();
        assert_eq!(out, CVec::from_vec(vec![c(1., 0.), c(0., 0.)]));
    }
}
