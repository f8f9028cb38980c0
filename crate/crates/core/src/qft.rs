//! Quantum-field dictionary: states, operators and field components lifted
//! onto the bundle, plus smearing against test functions by quadrature.
//!
//! Operators are x-dependent (Heisenberg picture) and state vectors are
//! fixed elements `X₀` of the typical fibre.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bundle::{Section, Trivializer};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::CoordinateChart;
use crate::morphism::{assoc_transport, BundleMorphism, SectionMorphism};
use crate::{CMat, CVec, Complex64};

/// Non-smeared components `φ_i(y)`, one operator field per component.
#[derive(Debug, Clone)]
pub struct FieldComponents {
    components: Vec<Field<CMat>>,
}

impl FieldComponents {
    pub fn new(components: Vec<Field<CMat>>) -> Self {
        Self { components }
    }

    pub fn n_comp(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> Option<&Field<CMat>> {
        self.components.get(i)
    }

    pub fn eval(&self, i: usize, y: &[f64]) -> Result<CMat> {
        let f = self.components.get(i).ok_or(Error::DimensionMismatch {
            expected: self.components.len(),
            found: i + 1,
        })?;
        f.eval(y)
    }

    pub fn components(&self) -> &[Field<CMat>] {
        &self.components
    }
}

/// Index box `lo..=hi` on a chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl SupportBox {
    pub fn new(lo: Vec<usize>, hi: Vec<usize>) -> Self {
        Self { lo, hi }
    }

    /// Coordinate-space containment on `chart`, with a small slack for
    /// rounding at the box faces.
    pub fn contains_coords(&self, chart: &CoordinateChart, y: &[f64]) -> bool {
        if y.len() != self.lo.len() {
            return false;
        }
        let lo = chart.coords_of(&self.lo);
        let hi = chart.coords_of(&self.hi);
        y.iter().enumerate().all(|(k, &v)| {
            let slack = 1e-12 * chart.spacing()[k];
            v >= lo[k] - slack && v <= hi[k] + slack
        })
    }
}

type ScalarFn = dyn Fn(usize, &[f64]) -> Complex64 + Send + Sync;

/// Vector-valued test function `f = (f¹, …, fⁿ)`, vanishing outside its
/// support box.
#[derive(Clone)]
pub struct TestFunction {
    f: Arc<ScalarFn>,
    chart: CoordinateChart,
    support: SupportBox,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    pub fn new<F>(chart: CoordinateChart, support: SupportBox, f: F) -> Result<Self>
    where
        F: Fn(usize, &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        if support.lo.len() != chart.dim() || support.hi.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                found: support.lo.len(),
            });
        }
        if !chart.contains_box(&support.lo, &support.hi) {
            return Err(Error::SupportOutOfGrid {
                lo: support.lo.clone(),
                hi: support.hi.clone(),
            });
        }
        Ok(Self {
            f: Arc::new(f),
            chart,
            support,
        })
    }

    pub fn zero(chart: CoordinateChart) -> Self {
        let hi = chart.extents().iter().map(|e| e - 1).collect();
        let support = SupportBox::new(alloc::vec![0; chart.dim()], hi);
        Self {
            f: Arc::new(|_, _| Complex64::new(0.0, 0.0)),
            chart,
            support,
        }
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }

    pub fn chart(&self) -> &CoordinateChart {
        &self.chart
    }

    /// `f^i(y)`; zero outside the support.
    pub fn eval(&self, i: usize, y: &[f64]) -> Complex64 {
        if self.support.contains_coords(&self.chart, y) {
            (self.f)(i, y)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `αf + βg` on the bounding box of both supports.
    pub fn linear_combination(
        &self,
        a: Complex64,
        other: &TestFunction,
        b: Complex64,
    ) -> TestFunction {
        let lo = self
            .support
            .lo
            .iter()
            .zip(&other.support.lo)
            .map(|(p, q)| *p.min(q))
            .collect();
        let hi = self
            .support
            .hi
            .iter()
            .zip(&other.support.hi)
            .map(|(p, q)| *p.max(q))
            .collect();
        let (f, g) = (self.clone(), other.clone());
        TestFunction {
            f: Arc::new(move |i, y| a * f.eval(i, y) + b * g.eval(i, y)),
            chart: self.chart.clone(),
            support: SupportBox::new(lo, hi),
        }
    }
}

/// Finite realization of `∫d^d y (·)` as `Σ w(y)·(·)` over grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<(Vec<f64>, f64)>,
}

impl QuadratureRule {
    /// Product trapezoid over `support`; weights sum to the box volume.
    pub fn trapezoid(chart: &CoordinateChart, support: &SupportBox) -> Result<Self> {
        if support.lo.len() != chart.dim() || support.hi.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                expected: chart.dim(),
                found: support.lo.len(),
            });
        }
        if !chart.contains_box(&support.lo, &support.hi) {
            return Err(Error::SupportOutOfGrid {
                lo: support.lo.clone(),
                hi: support.hi.clone(),
            });
        }
        let nodes = chart
            .box_points(&support.lo, &support.hi)
            .into_iter()
            .map(|p| {
                let mut w = 1.0;
                for k in 0..chart.dim() {
                    let (lo, hi, i) = (support.lo[k], support.hi[k], p.index[k]);
                    let h = chart.spacing()[k];
                    // A degenerate axis contributes a unit factor.
                    w *= if lo == hi {
                        1.0
                    } else if i == lo || i == hi {
                        0.5 * h
                    } else {
                        h
                    };
                }
                (p.coords, w)
            })
            .collect();
        Ok(Self { nodes })
    }

    pub fn point_mass(coords: Vec<f64>, weight: f64) -> Self {
        Self {
            nodes: alloc::vec![(coords, weight)],
        }
    }

    pub fn from_nodes(nodes: Vec<(Vec<f64>, f64)>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[(Vec<f64>, f64)] {
        &self.nodes
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}

/// `X(x) = L(x)⁻¹X₀`.
pub fn lift_state(triv: &Trivializer, x0: &CVec) -> Result<Section> {
    triv.space().check_vector(x0)?;
    Ok(triv.lifted_section(x0.clone()))
}

/// `A_x = L(x)⁻¹·A(x)·L(x)`.
pub fn lift_operator(triv: &Trivializer, a: &Field<CMat>) -> BundleMorphism {
    let triv = triv.clone();
    let a = a.clone();
    BundleMorphism::new(Field::fallible(move |x| {
        let m = a.eval(x)?;
        triv.space().check_operator(&m)?;
        let (l, l_inv) = triv.pair_at(x)?;
        Ok(l_inv * m * l)
    }))
}

/// `Φ_i|_x = L(x)⁻¹·φ_i(x)·L(x)` for every component.
pub fn lift_field(triv: &Trivializer, fields: &FieldComponents) -> Vec<BundleMorphism> {
    fields
        .components()
        .iter()
        .map(|f| lift_operator(triv, f))
        .collect()
}

fn check_nodes(f: &TestFunction, quad: &QuadratureRule) -> Result<()> {
    let chart = f.chart();
    let lo = chart.coords_of(&alloc::vec![0; chart.dim()]);
    let hi: Vec<usize> = chart.extents().iter().map(|e| e - 1).collect();
    let hi_c = chart.coords_of(&hi);
    for (y, _) in quad.nodes() {
        let inside = y.len() == chart.dim()
            && y.iter().enumerate().all(|(k, &v)| {
                let slack = 1e-12 * chart.spacing()[k];
                v >= lo[k] - slack && v <= hi_c[k] + slack
            });
        if !inside {
            return Err(Error::SupportOutOfGrid {
                lo: f.support().lo.clone(),
                hi: f.support().hi.clone(),
            });
        }
    }
    Ok(())
}

/// `φ(f) ≈ Σ_y Σ_i w(y)·f^i(y)·φ_i(y)`.
pub fn smear_conventional(
    fields: &FieldComponents,
    f: &TestFunction,
    quad: &QuadratureRule,
) -> Result<CMat> {
    check_nodes(f, quad)?;
    let mut acc: Option<CMat> = None;
    for (y, w) in quad.nodes() {
        for i in 0..fields.n_comp() {
            let fi = f.eval(i, y);
            let phi = fields.eval(i, y)?;
            let term = phi * (fi * *w);
            match acc.as_mut() {
                Some(a) => *a += term,
                None => acc = Some(term),
            }
        }
    }
    acc.ok_or(Error::DimensionMismatch {
        expected: 1,
        found: 0,
    })
}

/// `Φ_x(f) ≈ Σ_y Σ_i w(y)·f^i(y)·l°_{y→x}(Φ_i(y))`.
pub fn smear_bundle(
    triv: &Trivializer,
    lifted: &[BundleMorphism],
    f: &TestFunction,
    quad: &QuadratureRule,
    x: &[f64],
) -> Result<CMat> {
    check_nodes(f, quad)?;
    let n = triv.n();
    let mut acc = CMat::zeros(n, n);
    for (y, w) in quad.nodes() {
        for (i, phi) in lifted.iter().enumerate() {
            let fi = f.eval(i, y);
            if fi == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += assoc_transport(triv, y, x, &phi.eval(y)?)? * (fi * *w);
        }
    }
    Ok(acc)
}

/// `Â(X) = A∘X`.
pub fn apply_section_morphism(a_hat: &SectionMorphism, x: &Section) -> Section {
    a_hat.apply(x)
}
