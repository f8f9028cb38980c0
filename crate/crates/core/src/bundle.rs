//! The compatible Hilbert bundle generated by a trivializer field.
//!
//! A fibre vector is stored by its components in the (implicit) fibre basis
//! `{e_i(x)}` together with its base point; `l_x` acts as the matrix `L(x)`.
//! The fibre metric is always induced from the typical fibre,
//! `⟨u|v⟩_x = ≺L(x)u | L(x)v≻`, so every bundle built here is compatible.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::CoordinateChange;
use crate::hilbert::FibreSpace;
use crate::linalg::{inverse_with_condition, is_finite_mat, is_finite_vec, mat_residual, norm_1};
use crate::morphism::BundleMorphism;
use crate::{CMat, CVec};

/// The point-trivializing isomorphisms `l_x`, as a matrix field `x ↦ L(x)`.
#[derive(Debug, Clone)]
pub struct Trivializer {
    space: FibreSpace,
    base_dim: usize,
    matrix: Field<CMat>,
    inverse: Option<Field<CMat>>,
    cond_bound: f64,
}

impl Trivializer {
    pub const DEFAULT_COND_BOUND: f64 = 1e8;

    pub fn new(space: FibreSpace, base_dim: usize, matrix: Field<CMat>) -> Self {
        Self {
            space,
            base_dim,
            matrix,
            inverse: None,
            cond_bound: Self::DEFAULT_COND_BOUND,
        }
    }

    pub fn identity(space: FibreSpace, base_dim: usize) -> Self {
        let n = space.dim();
        let id = Field::constant(CMat::identity(n, n));
        Self::new(space, base_dim, id.clone()).with_inverse(id)
    }

    /// Supplies `x ↦ L(x)⁻¹` in closed form instead of LU inversion.
    pub fn with_inverse(mut self, inverse: Field<CMat>) -> Self {
        self.inverse = Some(inverse);
        self
    }

    pub fn with_cond_bound(mut self, bound: f64) -> Self {
        self.cond_bound = bound;
        self
    }

    pub fn space(&self) -> &FibreSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.dim()
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn cond_bound(&self) -> f64 {
        self.cond_bound
    }

    pub fn matrix_field(&self) -> &Field<CMat> {
        &self.matrix
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.base_dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.base_dim,
                found: x.len(),
            })
        }
    }

    fn checked_matrix(&self, field: &Field<CMat>, x: &[f64]) -> Result<CMat> {
        self.check_point(x)?;
        let m = field.eval(x)?;
        self.space.check_operator(&m)?;
        if !is_finite_mat(&m) {
            return Err(Error::EvaluationFailure {
                at: x.to_vec(),
                reason: "trivializer matrix is not finite".to_string(),
            });
        }
        Ok(m)
    }

    /// `L(x)`.
    pub fn matrix_at(&self, x: &[f64]) -> Result<CMat> {
        self.checked_matrix(&self.matrix, x)
    }

    /// `(L(x), L(x)⁻¹)`, rejecting points where the condition number exceeds
    /// the bound.
    pub fn pair_at(&self, x: &[f64]) -> Result<(CMat, CMat)> {
        let l = self.matrix_at(x)?;
        let singular = |condition| Error::SingularTrivializer {
            at: x.to_vec(),
            condition,
        };
        let (inv, cond) = match &self.inverse {
            Some(field) => {
                let inv = self.checked_matrix(field, x)?;
                let cond = norm_1(&l) * norm_1(&inv);
                (inv, cond)
            }
            None => inverse_with_condition(&l).ok_or_else(|| singular(f64::INFINITY))?,
        };
        if !(cond <= self.cond_bound) {
            return Err(singular(cond));
        }
        Ok((l, inv))
    }

    /// `L(x)⁻¹`.
    pub fn inverse_at(&self, x: &[f64]) -> Result<CMat> {
        self.pair_at(x).map(|(_, inv)| inv)
    }

    /// Matrix `M_x = L(x)*·G·L(x)` of the fibre metric, `⟨u|v⟩_x = u*·M_x·v`.
    pub fn metric_at(&self, x: &[f64]) -> Result<CMat> {
        let (l, _) = self.pair_at(x)?;
        Ok(l.adjoint() * self.space.gram() * l)
    }

    /// `⟨u|v⟩_x = ≺L(x)u | L(x)v≻`.
    pub fn fibre_inner(&self, u: &FibreVector, v: &FibreVector) -> Result<Complex64> {
        if u.at != v.at {
            return Err(Error::BasePointMismatch {
                left: u.at.clone(),
                right: v.at.clone(),
            });
        }
        let (l, _) = self.pair_at(&u.at)?;
        self.space.check_vector(&u.components)?;
        self.space.check_vector(&v.components)?;
        self.space
            .inner(&(&l * &u.components), &(&l * &v.components))
    }

    /// `l_x(u) ∈ F`.
    pub fn to_typical(&self, u: &FibreVector) -> Result<CVec> {
        let (l, _) = self.pair_at(&u.at)?;
        self.space.check_vector(&u.components)?;
        Ok(l * &u.components)
    }

    /// `l_x⁻¹(φ)`, a vector in the fibre over `x`.
    pub fn from_typical(&self, x: &[f64], phi: &CVec) -> Result<FibreVector> {
        self.space.check_vector(phi)?;
        let inv = self.inverse_at(x)?;
        Ok(FibreVector::new(x.to_vec(), inv * phi))
    }

    /// The bundle transport `l_{x→y} = l_y⁻¹∘l_x`, matrix `L(y)⁻¹L(x)`.
    pub fn transport(&self, x: &[f64], y: &[f64]) -> Result<FibreMap> {
        let (lx, _) = self.pair_at(x)?;
        let (_, ly_inv) = self.pair_at(y)?;
        Ok(FibreMap {
            from: x.to_vec(),
            to: y.to_vec(),
            matrix: ly_inv * lx,
        })
    }

    /// ‡-conjugate of a point map `A_x: fibre_x → F`, the map `F → fibre_x`
    /// with matrix `L(x)⁻¹·(A_x·L(x)⁻¹)†`.
    pub fn herm_conj_point_map(&self, x: &[f64], a: &CMat) -> Result<CMat> {
        self.space.check_operator(a)?;
        let (_, inv) = self.pair_at(x)?;
        Ok(&inv * self.space.adjoint(&(a * &inv))?)
    }

    /// ‡-conjugate of a fibre map `A: fibre_y → fibre_x`, the map
    /// `fibre_x → fibre_y` with matrix `L(y)⁻¹·(L(x)·A·L(y)⁻¹)†·L(x)`.
    pub fn herm_conj_fibre_map(&self, a: &FibreMap) -> Result<FibreMap> {
        self.space.check_operator(&a.matrix)?;
        let (l_to, _) = self.pair_at(&a.to)?;
        let (_, from_inv) = self.pair_at(&a.from)?;
        let inner = &l_to * &a.matrix * &from_inv;
        Ok(FibreMap {
            from: a.to.clone(),
            to: a.from.clone(),
            matrix: from_inv * self.space.adjoint(&inner)? * l_to,
        })
    }

    /// Whether `A: fibre_y → fibre_x` preserves the fibre scalar products,
    /// `⟨Au|Av⟩_x = ⟨u|v⟩_y` for all `u, v`; checked as `A*·M_x·A = M_y` in
    /// relative Frobenius norm.
    pub fn is_fibre_unitary(&self, a: &FibreMap, tol: f64) -> Result<bool> {
        self.space.check_operator(&a.matrix)?;
        let m_to = self.metric_at(&a.to)?;
        let m_from = self.metric_at(&a.from)?;
        let pulled = a.matrix.adjoint() * m_to * &a.matrix;
        Ok(mat_residual(&pulled, &m_from) <= tol)
    }

    /// `(A‡)_x = L(x)⁻¹·(L(x)·A_x·L(x)⁻¹)†·L(x)` for an endomorphism of the
    /// fibre over `x`.
    pub fn herm_conj_morphism_at(&self, x: &[f64], a: &CMat) -> Result<CMat> {
        self.space.check_operator(a)?;
        let (l, inv) = self.pair_at(x)?;
        let op = &l * a * &inv;
        Ok(&inv * self.space.adjoint(&op)? * l)
    }

    /// The ‡-conjugate bundle morphism, evaluated pointwise.
    pub fn herm_conj_morphism(&self, a: &BundleMorphism) -> BundleMorphism {
        let triv = self.clone();
        let a = a.clone();
        BundleMorphism::new(Field::fallible(move |x| {
            let ax = a.eval(x)?;
            triv.herm_conj_morphism_at(x, &ax)
        }))
    }

    /// The `l`-transported section through `u0`: `Y(y) = l_{x0→y}(u0)`.
    pub fn transported_section(&self, u0: &FibreVector) -> Result<Section> {
        let anchor = self.to_typical(u0)?;
        Ok(self.lifted_section(anchor))
    }

    /// `Y(y) = L(y)⁻¹·X₀` for a fixed vector of the typical fibre.
    pub(crate) fn lifted_section(&self, anchor: CVec) -> Section {
        let triv = self.clone();
        Section::new(Field::fallible(move |y| Ok(triv.inverse_at(y)? * &anchor)))
    }

    /// The same trivializer read in primed coordinates, `L′(x′) = L(x(x′))`.
    pub fn in_chart(&self, change: &CoordinateChange) -> Trivializer {
        let inverse_map = change.inverse_map();
        let back = move |xp: &[f64]| inverse_map(xp);
        let back2 = back.clone();
        Trivializer {
            space: self.space.clone(),
            base_dim: self.base_dim,
            matrix: self.matrix.pullback(back),
            inverse: self.inverse.as_ref().map(|inv| inv.pullback(back2)),
            cond_bound: self.cond_bound,
        }
    }

    /// The trivializer for the fibre basis `e′_i = C_i^j e_j`, i.e.
    /// `L′(x) = L(x)·C(x)`.
    pub fn rebased(&self, basis_change: &Field<CMat>) -> Trivializer {
        let l = self.matrix.clone();
        let c = basis_change.clone();
        let matrix = Field::fallible(move |x| Ok(l.eval(x)? * c.eval(x)?));
        Trivializer::new(self.space.clone(), self.base_dim, matrix).with_cond_bound(self.cond_bound)
    }
}

/// An element of the fibre over `at`, by its components in `{e_i(at)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreVector {
    pub at: Vec<f64>,
    pub components: CVec,
}

impl FibreVector {
    pub fn new(at: Vec<f64>, components: CVec) -> Self {
        Self { at, components }
    }
}

/// A linear map between two fibres, `fibre_from → fibre_to`.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreMap {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub matrix: CMat,
}

impl FibreMap {
    pub fn new(from: Vec<f64>, to: Vec<f64>, matrix: CMat) -> Self {
        Self { from, to, matrix }
    }

    pub fn apply(&self, v: &FibreVector) -> Result<FibreVector> {
        if v.at != self.from {
            return Err(Error::BasePointMismatch {
                left: self.from.clone(),
                right: v.at.clone(),
            });
        }
        if v.components.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: v.components.len(),
            });
        }
        Ok(FibreVector::new(
            self.to.clone(),
            &self.matrix * &v.components,
        ))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FibreMap) -> Result<FibreMap> {
        if self.to != next.from {
            return Err(Error::BasePointMismatch {
                left: self.to.clone(),
                right: next.from.clone(),
            });
        }
        Ok(FibreMap {
            from: self.from.clone(),
            to: next.to.clone(),
            matrix: &next.matrix * &self.matrix,
        })
    }

    pub fn inverse(&self) -> Option<FibreMap> {
        inverse_with_condition(&self.matrix).map(|(inv, _)| FibreMap {
            from: self.to.clone(),
            to: self.from.clone(),
            matrix: inv,
        })
    }

    pub fn scaled(&self, s: Complex64) -> FibreMap {
        FibreMap {
            from: self.from.clone(),
            to: self.to.clone(),
            matrix: &self.matrix * s,
        }
    }
}

/// A section `x ↦ Y(x)`, by its component field.
#[derive(Debug, Clone)]
pub struct Section {
    field: Field<CVec>,
}

impl Section {
    pub fn new(field: Field<CVec>) -> Self {
        Self { field }
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> CVec + Send + Sync + 'static,
    {
        Self::new(Field::new(f))
    }

    pub fn field(&self) -> &Field<CVec> {
        &self.field
    }

    pub fn eval(&self, x: &[f64]) -> Result<CVec> {
        let v = self.field.eval(x)?;
        if !is_finite_vec(&v) {
            return Err(Error::EvaluationFailure {
                at: x.to_vec(),
                reason: "section value is not finite".to_string(),
            });
        }
        Ok(v)
    }

    pub fn at(&self, x: &[f64]) -> Result<FibreVector> {
        Ok(FibreVector::new(x.to_vec(), self.eval(x)?))
    }

    /// `x ↦ f(x)·Y(x)` for a scalar field `f`.
    pub fn scaled_by(&self, f: &Field<Complex64>) -> Section {
        let y = self.clone();
        let f = f.clone();
        Section::new(Field::fallible(move |x| Ok(y.eval(x)? * f.eval(x)?)))
    }

    /// `x ↦ a·Y(x) + b·Z(x)`.
    pub fn linear_combination(&self, a: Complex64, other: &Section, b: Complex64) -> Section {
        let y = self.clone();
        let z = other.clone();
        Section::new(Field::fallible(
            move |x| Ok(y.eval(x)? * a + z.eval(x)? * b),
        ))
    }

    /// The section read in primed coordinates, `Y′(x′) = Y(x(x′))`.
    pub fn in_chart(&self, change: &CoordinateChange) -> Section {
        let inverse_map = change.inverse_map();
        Section::new(self.field.pullback(move |xp| inverse_map(xp)))
    }
}
