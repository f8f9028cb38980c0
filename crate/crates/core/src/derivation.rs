//! Derivations generated by the bundle transport.
//!
//! `D_μ` acts on sections and `D̂_μ = [D_μ, ·]₋` on section morphisms
//! generated by bundle morphisms. Each has a limit form (built from the
//! transport), a closed form through the trivializer, and a component form
//! through the connection coefficients `Γ_μ = L⁻¹∂_μL`. The forms are kept
//! separate so they can be checked against each other.

use alloc::vec::Vec;

use crate::bundle::{FibreVector, Section, Trivializer};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{partial_derivative, CoordinateChange, DifferenceScheme};
use crate::linalg::{commutator, inverse_with_condition};
use crate::morphism::{BundleMorphism, SectionMorphism};
use crate::{CMat, CVec};

/// `Γ_μ(x) = [Γ^i_{jμ}(x)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    pub at: Vec<f64>,
    pub mu: usize,
    pub matrix: CMat,
}

/// A tangent vector field `V = V^μ ∂/∂x^μ` on the base.
#[derive(Debug, Clone)]
pub struct DirectionalField {
    field: Field<Vec<f64>>,
}

impl DirectionalField {
    pub fn new(field: Field<Vec<f64>>) -> Self {
        Self { field }
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(Field::new(f))
    }

    pub fn components(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.field.eval(x)?;
        if v.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: v.len(),
            });
        }
        Ok(v)
    }

    /// Components in primed coordinates, `V′^μ = (∂x′^μ/∂x^ν)·V^ν`, as a
    /// field over the primed chart.
    pub fn in_chart(&self, change: &CoordinateChange) -> DirectionalField {
        let v = self.clone();
        let change = change.clone();
        DirectionalField::new(Field::fallible(move |xp| {
            let x = change.inverse(xp);
            let jac = change.jacobian(&x)?;
            let comps = nalgebra::DVector::from_vec(v.components(&x)?);
            Ok((jac * comps).iter().copied().collect())
        }))
    }
}

/// `Γ_μ(x) = L(x)⁻¹·∂_μL(x)`.
pub fn gamma(
    triv: &Trivializer,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<ConnectionCoefficients> {
    let inv = triv.inverse_at(x)?;
    let dl: CMat = partial_derivative(|z: &[f64]| triv.matrix_at(z), x, mu, scheme)?;
    Ok(ConnectionCoefficients {
        at: x.to_vec(),
        mu,
        matrix: inv * dl,
    })
}

/// `Γ_μ(x)` as `∂/∂z^μ` of the transport matrix `l(x, z) = L(x)⁻¹L(z)` at
/// `z = x`.
pub fn gamma_via_transport(
    triv: &Trivializer,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<CMat> {
    partial_derivative(|z: &[f64]| Ok(triv.transport(z, x)?.matrix), x, mu, scheme)
}

/// `D_μY(x)` by its limit definition: the derivative at `ε = 0` of
/// `l_{x(ε,μ)→x}(Y(x(ε,μ)))`. The forward scheme gives the one-sided
/// quotient literally; the central scheme takes the symmetric one.
pub fn d_mu_limit(
    triv: &Trivializer,
    y: &Section,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<FibreVector> {
    let d = partial_derivative(
        |z: &[f64]| {
            let m = triv.transport(z, x)?.matrix;
            Ok(m * y.eval(z)?)
        },
        x,
        mu,
        scheme,
    )?;
    Ok(FibreVector::new(x.to_vec(), d))
}

/// `D_μY(x) = L(x)⁻¹·∂_μ[L·Y](x)`.
pub fn d_mu_analytic(
    triv: &Trivializer,
    y: &Section,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<FibreVector> {
    let inv = triv.inverse_at(x)?;
    let d: CVec = partial_derivative(
        |z: &[f64]| Ok(triv.matrix_at(z)? * y.eval(z)?),
        x,
        mu,
        scheme,
    )?;
    Ok(FibreVector::new(x.to_vec(), inv * d))
}

/// `D_μY(x) = (∂_μY^i + Γ^i_{jμ}Y^j) e_i`.
pub fn d_mu_components(
    triv: &Trivializer,
    y: &Section,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<FibreVector> {
    let g = gamma(triv, x, mu, scheme)?;
    let dy: CVec = partial_derivative(|z: &[f64]| y.eval(z), x, mu, scheme)?;
    Ok(FibreVector::new(x.to_vec(), dy + g.matrix * y.eval(x)?))
}

/// The section `x ↦ (D_μY)(x)` (closed form), evaluated lazily.
pub fn d_mu_section(
    triv: &Trivializer,
    y: &Section,
    mu: usize,
    scheme: &DifferenceScheme,
) -> Section {
    let triv = triv.clone();
    let y = y.clone();
    let scheme = *scheme;
    Section::new(Field::fallible(move |x| {
        Ok(d_mu_analytic(&triv, &y, x, mu, &scheme)?.components)
    }))
}

/// Transformed coefficients under `e′_i = C_i^j e_j` and `x ↦ x′`:
/// `Γ′_μ = (C⁻¹Γ_νC + C⁻¹∂_νC)·∂x^ν/∂x′^μ`, evaluated at the unprimed point
/// `x`.
pub fn gamma_transform<G>(
    gamma_field: G,
    basis_change: &Field<CMat>,
    change: &CoordinateChange,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<CMat>
where
    G: Fn(&[f64], usize) -> Result<CMat>,
{
    let dim = x.len();
    if mu >= dim {
        return Err(Error::AxisOutOfRange { axis: mu, dim });
    }
    let c = basis_change.eval(x)?;
    let (c_inv, cond) = inverse_with_condition(&c).ok_or_else(|| Error::SingularBasisChange {
        at: x.to_vec(),
        condition: f64::INFINITY,
    })?;
    if cond > Trivializer::DEFAULT_COND_BOUND {
        return Err(Error::SingularBasisChange {
            at: x.to_vec(),
            condition: cond,
        });
    }
    let jac_inv = change.jacobian_inverse(x)?;
    let n = c.nrows();
    let mut out = CMat::zeros(n, n);
    for nu in 0..dim {
        let weight = jac_inv[(nu, mu)];
        if weight == 0.0 {
            continue;
        }
        let g = gamma_field(x, nu)?;
        let dc: CMat = partial_derivative(|z: &[f64]| basis_change.eval(z), x, nu, scheme)?;
        let term = &c_inv * g * &c + &c_inv * dc;
        out += term * crate::linalg::c(weight, 0.0);
    }
    Ok(out)
}

/// Matrix of `(D̂_μÂ)` at `x` in closed form, `L⁻¹·∂_μ(L·A·L⁻¹)·L`.
pub fn d_hat_mu_matrix(
    triv: &Trivializer,
    a: &BundleMorphism,
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

/// Matrix of `(D̂_μÂ)` at `x` in components, `∂_μ[A] + [Γ_μ, [A]]₋`.
pub fn d_hat_mu_components(
    triv: &Trivializer,
    a: &BundleMorphism,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<CMat> {
    let g = gamma(triv, x, mu, scheme)?;
    let da: CMat = partial_derivative(|z: &[f64]| a.eval(z), x, mu, scheme)?;
    Ok(da + commutator(&g.matrix, &a.eval(x)?))
}

/// `D̂_μÂ` as a section morphism, generated by the closed-form matrix field.
/// Only morphisms generated by a bundle morphism are accepted.
pub fn d_hat_mu(
    triv: &Trivializer,
    a_hat: &SectionMorphism,
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<SectionMorphism> {
    let a = a_hat.generator()?.clone();
    if mu >= triv.base_dim() {
        return Err(Error::AxisOutOfRange {
            axis: mu,
            dim: triv.base_dim(),
        });
    }
    let triv = triv.clone();
    let scheme = *scheme;
    Ok(SectionMorphism::generated(BundleMorphism::new(
        Field::fallible(move |x| d_hat_mu_matrix(&triv, &a, x, mu, &scheme)),
    )))
}

/// `((D̂_μÂ)(Y))(x) = D_μ(Â(Y))(x) − A_x(D_μY(x))`, straight from the
/// commutator.
pub fn d_hat_mu_commutator(
    triv: &Trivializer,
    a_hat: &SectionMorphism,
    y: &Section,
    x: &[f64],
    mu: usize,
    scheme: &DifferenceScheme,
) -> Result<FibreVector> {
    let a = a_hat.generator()?;
    let ay = a_hat.apply(y);
    let first = d_mu_limit(triv, &ay, x, mu, scheme)?;
    let second = a.apply(&d_mu_limit(triv, y, x, mu, scheme)?)?;
    Ok(FibreVector::new(
        x.to_vec(),
        first.components - second.components,
    ))
}

/// `D_V Y(x) = V^μ(x)·(D_μY)(x)`.
pub fn d_directional_section(
    triv: &Trivializer,
    y: &Section,
    v: &DirectionalField,
    x: &[f64],
    scheme: &DifferenceScheme,
) -> Result<FibreVector> {
    let comps = v.components(x)?;
    let mut acc = CVec::zeros(triv.n());
    for (mu, vm) in comps.iter().enumerate() {
        if *vm != 0.0 {
            acc += d_mu_analytic(triv, y, x, mu, scheme)?.components * crate::linalg::c(*vm, 0.0);
        }
    }
    Ok(FibreVector::new(x.to_vec(), acc))
}

/// Matrix of `D̂_V Â` at `x`, `V^μ(x)·[D̂_μÂ]`.
pub fn d_directional_morphism(
    triv: &Trivializer,
    a_hat: &SectionMorphism,
    v: &DirectionalField,
    x: &[f64],
    scheme: &DifferenceScheme,
) -> Result<CMat> {
    let a = a_hat.generator()?;
    let comps = v.components(x)?;
    let n = triv.n();
    let mut acc = CMat::zeros(n, n);
    for (mu, vm) in comps.iter().enumerate() {
        if *vm != 0.0 {
            acc += d_hat_mu_matrix(triv, a, x, mu, scheme)? * crate::linalg::c(*vm, 0.0);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::FibreSpace;
    use crate::linalg::{c, mat_residual, vec_residual};
    use crate::Complex64;
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

    fn diag_0_i() -> CMat {
        CMat::from_diagonal(&CVec::from_vec(vec![c(0., 0.), c(0., 1.)]))
    }

    #[test]
    fn gamma_examples() {
        let s = DifferenceScheme::default();
        let t = phase_triv();
        for x in [0.0, 0.6, -1.3] {
            assert!(mat_residual(&gamma(&t, &[x], 0, &s).unwrap().matrix, &diag_0_i()) < 1e-9);
            assert!(
                mat_residual(&gamma_via_transport(&t, &[x], 0, &s).unwrap(), &diag_0_i()) < 1e-9
            );
        }
        let constant = Trivializer::new(
            FibreSpace::new(2).unwrap(),
            1,
            Field::constant(CMat::from_row_slice(
                2,
                2,
                &[c(2., 0.), c(1., 1.), c(0., 0.), c(1., 0.)],
            )),
        );
        assert!(gamma(&constant, &[0.2], 0, &s).unwrap().matrix.norm() < 1e-12);
    }

    #[test]
    fn d_mu_examples() {
        let s = DifferenceScheme::default();
        let id = Trivializer::identity(FibreSpace::new(2).unwrap(), 1);
        let y = Section::from_fn(|x: &[f64]| CVec::from_vec(vec![c(x[0], 0.), c(1., 0.)]));
        let e = CVec::from_vec(vec![c(1., 0.), c(0., 0.)]);
        assert!(vec_residual(&d_mu_limit(&id, &y, &[0.4], 0, &s).unwrap().components, &e) < 1e-9);

        let t = phase_triv();
        let constant = Section::from_fn(|_| CVec::from_vec(vec![c(0., 0.), c(1., 0.)]));
        let expected = CVec::from_vec(vec![c(0., 0.), c(0., 1.)]);
        for route in [d_mu_limit, d_mu_analytic, d_mu_components] {
            let d = route(&t, &constant, &[0.9], 0, &s).unwrap();
            assert!(vec_residual(&d.components, &expected) < 1e-9);
        }
    }

    #[test]
    fn d_hat_reduces_to_derivative_for_identity_trivializer() {
        let s = DifferenceScheme::default();
        let id = Trivializer::identity(FibreSpace::new(2).unwrap(), 1);
        let b = CMat::from_row_slice(2, 2, &[c(0., 1.), c(2., 0.), c(0., 0.), c(-1., 0.)]);
        let bb = b.clone();
        let a =
            SectionMorphism::generated(BundleMorphism::from_fn(move |x: &[f64]| &bb * c(x[0], 0.)));
        let dh = d_hat_mu(&id, &a, 0, &s).unwrap();
        let m = dh.generator().unwrap().eval(&[0.3]).unwrap();
        assert!(mat_residual(&m, &b) < 1e-9);
        let ident = SectionMorphism::generated(BundleMorphism::identity(2));
        let t = phase_triv();
        let z = d_hat_mu(&t, &ident, 0, &s).unwrap();
        assert!(z.generator().unwrap().eval(&[0.3]).unwrap().norm() < 1e-9);
    }

    #[test]
    fn d_hat_rejects_general_functionals() {
        let s = DifferenceScheme::default();
        let t = phase_triv();
        let general = SectionMorphism::general(|y| y.clone());
        assert!(matches!(
            d_hat_mu(&t, &general, 0, &s),
            Err(Error::UnsupportedMorphism)
        ));
        let y = Section::from_fn(|_| CVec::from_vec(vec![c(1., 0.), c(0., 0.)]));
        assert!(matches!(
            d_hat_mu_commutator(&t, &general, &y, &[0.0], 0, &s),
            Err(Error::UnsupportedMorphism)
        ));
    }

    #[test]
    fn pure_gauge_transform() {
        let s = DifferenceScheme::default();
        let zero = |_: &[f64], _: usize| Ok(CMat::zeros(2, 2));
        let basis = Field::new(|x: &[f64]| {
            CMat::from_diagonal(&CVec::from_vec(vec![
                c(1., 0.),
                Complex64::from_polar(1., x[0]),
            ]))
        });
        let g =
            gamma_transform(zero, &basis, &CoordinateChange::identity(1), &[0.5], 0, &s).unwrap();
        assert!(mat_residual(&g, &diag_0_i()) < 1e-9);

        let t = phase_triv();
        let gf = |x: &[f64], mu| Ok(gamma(&t, x, mu, &s)?.matrix);
        let ident = Field::constant(CMat::identity(2, 2));
        let unchanged =
            gamma_transform(gf, &ident, &CoordinateChange::identity(1), &[0.5], 0, &s).unwrap();
        assert!(mat_residual(&unchanged, &diag_0_i()) < 1e-9);
        let halved = gamma_transform(
            gf,
            &ident,
            &CoordinateChange::scaling(vec![2.0]),
            &[0.5],
            0,
            &s,
        )
        .unwrap();
        assert!(mat_residual(&halved, &(diag_0_i() * c(0.5, 0.))) < 1e-9);
    }

    #[test]
    fn singular_basis_change_is_rejected() {
        let s = DifferenceScheme::default();
        let zero = |_: &[f64], _: usize| Ok(CMat::zeros(2, 2));
        let basis = Field::constant(CMat::zeros(2, 2));
        assert!(matches!(
            gamma_transform(zero, &basis, &CoordinateChange::identity(1), &[0.5], 0, &s),
            Err(Error::SingularBasisChange { .. })
        ));
    }

    #[test]
    fn directional_derivative_basics() {
        let s = DifferenceScheme::default();
        let t = phase_triv();
        let y = Section::from_fn(|x: &[f64]| CVec::from_vec(vec![c(x[0] * x[0], 0.), c(1., x[0])]));
        let zero = DirectionalField::from_fn(|_| vec![0.0]);
        assert_eq!(
            d_directional_section(&t, &y, &zero, &[0.2], &s)
                .unwrap()
                .components,
            CVec::zeros(2)
        );
        let unit = DirectionalField::from_fn(|_| vec![1.0]);
        let dv = d_directional_section(&t, &y, &unit, &[0.2], &s).unwrap();
        let dm = d_mu_analytic(&t, &y, &[0.2], 0, &s).unwrap();
        assert_eq!(dv.components, dm.components);
    }
}
