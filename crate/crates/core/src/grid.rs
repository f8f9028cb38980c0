//! The discretized base: a single rectangular chart, grid points, coordinate
//! changes and the finite-difference machinery behind every `∂/∂x^μ`.

use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{inverse_with_condition, Linear};
use crate::RMat;

/// Rectangular grid over one global coordinate chart.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChart {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    extents: Vec<usize>,
}

impl CoordinateChart {
    /// Central differences need interior points, so every extent must be at
    /// least three.
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, extents: Vec<usize>) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 {
            return Err(Error::InvalidChart(
                "dimension must be at least 1".to_string(),
            ));
        }
        if spacing.len() != dim || extents.len() != dim {
            return Err(Error::InvalidChart(format!(
                "origin, spacing and extents must all have length {dim}"
            )));
        }
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidChart(format!("spacing {h} is not positive")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidChart("origin must be finite".to_string()));
        }
        if let Some(e) = extents.iter().find(|e| **e < 3) {
            return Err(Error::InvalidChart(format!(
                "extent {e} is below 3; central differences need interior points"
            )));
        }
        Ok(Self {
            origin,
            spacing,
            extents,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn coords_of(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .zip(self.origin.iter().zip(&self.spacing))
            .map(|(&i, (o, h))| o + i as f64 * h)
            .collect()
    }

    pub fn point(&self, index: &[usize]) -> Result<GridPoint> {
        if index.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: index.len(),
            });
        }
        if index.iter().zip(&self.extents).any(|(i, e)| i >= e) {
            return Err(Error::InvalidChart(format!(
                "index {index:?} outside the grid"
            )));
        }
        Ok(GridPoint {
            coords: self.coords_of(index),
            index: index.to_vec(),
        })
    }

    pub fn num_points(&self) -> usize {
        self.extents.iter().product()
    }

    /// Points with `1 ≤ index^μ ≤ extent^μ − 2` on every axis, in
    /// lexicographic order (last axis fastest).
    pub fn interior_points(&self) -> Vec<GridPoint> {
        let lo = vec![1; self.dim()];
        let hi: Vec<usize> = self.extents.iter().map(|e| e - 2).collect();
        self.box_points(&lo, &hi)
    }

    /// All grid points in the closed index box `lo..=hi`.
    pub fn box_points(&self, lo: &[usize], hi: &[usize]) -> Vec<GridPoint> {
        let mut out = Vec::new();
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return out;
        }
        let mut idx = lo.to_vec();
        loop {
            out.push(GridPoint {
                coords: self.coords_of(&idx),
                index: idx.clone(),
            });
            let mut axis = idx.len();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if idx[axis] < hi[axis] {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = lo[axis];
            }
        }
    }

    pub fn contains_box(&self, lo: &[usize], hi: &[usize]) -> bool {
        lo.len() == self.dim()
            && hi.len() == self.dim()
            && lo.iter().zip(hi).all(|(l, h)| l <= h)
            && hi.iter().zip(&self.extents).all(|(h, e)| h < e)
    }

    /// Largest `|x^μ|` over the grid.
    pub fn max_abs_coord(&self) -> f64 {
        self.origin
            .iter()
            .zip(self.spacing.iter().zip(&self.extents))
            .map(|(o, (h, e))| o.abs().max((o + (*e as f64 - 1.0) * h).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
}

impl GridPoint {
    /// The off-grid point `x(ε, μ)`.
    pub fn displaced(&self, mu: usize, eps: f64) -> Result<Vec<f64>> {
        displace(&self.coords, mu, eps)
    }
}

/// Coordinates of `x(ε, μ)`: `x^ν + ε·δ^ν_μ`.
pub fn displace(x: &[f64], mu: usize, eps: f64) -> Result<Vec<f64>> {
    if mu >= x.len() {
        return Err(Error::AxisOutOfRange {
            axis: mu,
            dim: x.len(),
        });
    }
    let mut y = x.to_vec();
    y[mu] += eps;
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeOrder {
    /// `(f(x + h) − f(x)) / h`; a negative step gives the backward quotient.
    Forward,
    /// `(f(x + h) − f(x − h)) / 2h`.
    Central,
}

impl SchemeOrder {
    pub fn order(self) -> u32 {
        match self {
            SchemeOrder::Forward => 1,
            SchemeOrder::Central => 2,
        }
    }
}

/// How the `ε → 0` limits are realized numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceScheme {
    /// Relative step; the step along axis `μ` at `x` is `ε·max(1, |x^μ|)`.
    pub epsilon: f64,
    pub order: SchemeOrder,
    pub richardson_levels: u32,
    /// Lower bound on `|ε|`.
    pub floor: f64,
}

pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-7;

impl Default for DifferenceScheme {
    fn default() -> Self {
        Self {
            epsilon: libm::cbrt(f64::EPSILON),
            order: SchemeOrder::Central,
            richardson_levels: 0,
            floor: DEFAULT_EPSILON_FLOOR,
        }
    }
}

impl DifferenceScheme {
    pub fn central(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn forward(epsilon: f64) -> Self {
        Self {
            epsilon,
            order: SchemeOrder::Forward,
            ..Self::default()
        }
    }

    pub fn with_richardson(mut self, levels: u32) -> Self {
        self.richardson_levels = levels;
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon == 0.0 {
            return Err(Error::InvalidScheme(format!(
                "epsilon {} must be finite and non-zero",
                self.epsilon
            )));
        }
        if !(self.floor >= 0.0) {
            return Err(Error::InvalidScheme(
                "floor must be non-negative".to_string(),
            ));
        }
        if self.epsilon.abs() < self.floor {
            return Err(Error::EpsilonTooSmall {
                epsilon: self.epsilon,
                floor: self.floor,
            });
        }
        Ok(())
    }

    pub fn step(&self, x: &[f64], mu: usize) -> f64 {
        self.epsilon * x.get(mu).map_or(1.0, |c| c.abs().max(1.0))
    }

    /// Leading truncation order, including Richardson levels.
    pub fn convergence_order(&self) -> u32 {
        match self.order {
            SchemeOrder::Forward => 1 + self.richardson_levels,
            SchemeOrder::Central => 2 * (1 + self.richardson_levels),
        }
    }

    /// `max(1e-8, 10·h^p)` for the largest step `h` taken at coordinates
    /// bounded by `max_abs_coord`, `p` the convergence order (so `10·h²` for
    /// the plain central scheme).
    pub fn fd_tolerance(&self, max_abs_coord: f64) -> f64 {
        let h = self.epsilon.abs() * max_abs_coord.max(1.0);
        (10.0 * libm::pow(h, f64::from(self.convergence_order()))).max(1e-8)
    }
}

fn eval_checked<T, F>(f: &F, x: &[f64]) -> Result<T>
where
    T: Linear,
    F: Fn(&[f64]) -> Result<T>,
{
    let v = f(x)?;
    if v.all_finite() {
        Ok(v)
    } else {
        Err(Error::EvaluationFailure {
            at: x.to_vec(),
            reason: "non-finite value".to_string(),
        })
    }
}

fn raw_difference<T, F>(
    f: &F,
    x: &[f64],
    mu: usize,
    h: f64,
    order: SchemeOrder,
    center: Option<&T>,
) -> Result<T>
where
    T: Linear,
    F: Fn(&[f64]) -> Result<T>,
{
    let plus = eval_checked(f, &displace(x, mu, h)?)?;
    match order {
        SchemeOrder::Forward => {
            let inv = 1.0 / h;
            match center {
                Some(c) => Ok(plus.combine(inv, c, -inv)),
                None => {
                    let c = eval_checked(f, x)?;
                    Ok(plus.combine(inv, &c, -inv))
                }
            }
        }
        SchemeOrder::Central => {
            let minus = eval_checked(f, &displace(x, mu, -h)?)?;
            let inv = 0.5 / h;
            Ok(plus.combine(inv, &minus, -inv))
        }
    }
}

/// `∂f/∂x^μ` at `x` by the configured scheme, Richardson-extrapolated over
/// successively halved steps when `richardson_levels > 0`.
pub fn partial_derivative<T, F>(f: F, x: &[f64], mu: usize, scheme: &DifferenceScheme) -> Result<T>
where
    T: Linear,
    F: Fn(&[f64]) -> Result<T>,
{
    scheme.validate()?;
    if mu >= x.len() {
        return Err(Error::AxisOutOfRange {
            axis: mu,
            dim: x.len(),
        });
    }
    let h0 = scheme.step(x, mu);
    let center = match scheme.order {
        SchemeOrder::Forward => Some(eval_checked(&f, x)?),
        SchemeOrder::Central => None,
    };
    let levels = scheme.richardson_levels as usize;
    let mut table: Vec<T> = Vec::with_capacity(levels + 1);
    let mut h = h0;
    for _ in 0..=levels {
        table.push(raw_difference(&f, x, mu, h, scheme.order, center.as_ref())?);
        h *= 0.5;
    }
    // Each sweep removes the next error term: h, h², ... for forward
    // differences and h², h⁴, ... for central ones.
    for level in 1..=levels {
        let exponent = match scheme.order {
            SchemeOrder::Forward => level as i32,
            SchemeOrder::Central => 2 * level as i32,
        };
        let factor = libm::pow(2.0, exponent as f64);
        let denom = factor - 1.0;
        for i in (level..=levels).rev() {
            let refined = table[i].combine(factor / denom, &table[i - 1], -1.0 / denom);
            table[i] = refined;
        }
    }
    Ok(table.pop().expect("table has at least one entry"))
}

type CoordMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianMap = dyn Fn(&[f64]) -> RMat + Send + Sync;

/// A change of coordinates `x ↦ x′` on the chart.
#[derive(Clone)]
pub struct CoordinateChange {
    forward: Arc<CoordMap>,
    inverse: Arc<CoordMap>,
    /// `[∂x^ν/∂x′^μ]` (row ν, column μ) as a function of the unprimed point.
    jacobian_inverse: Option<Arc<JacobianMap>>,
    pub cond_bound: f64,
}

impl fmt::Debug for CoordinateChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoordinateChange")
            .field("analytic_jacobian", &self.jacobian_inverse.is_some())
            .field("cond_bound", &self.cond_bound)
            .finish()
    }
}

impl CoordinateChange {
    pub const DEFAULT_COND_BOUND: f64 = 1e8;

    /// A change given by its forward and inverse maps; the Jacobian is taken
    /// by central differences of the inverse map.
    pub fn new<F, G>(forward: F, inverse: G) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            jacobian_inverse: None,
            cond_bound: Self::DEFAULT_COND_BOUND,
        }
    }

    pub fn with_jacobian_inverse<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64]) -> RMat + Send + Sync + 'static,
    {
        self.jacobian_inverse = Some(Arc::new(jac));
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(|x| x.to_vec(), |x| x.to_vec())
            .with_jacobian_inverse(move |_| RMat::identity(dim, dim))
    }

    /// `x′^μ = s_μ·x^μ`.
    pub fn scaling(factors: Vec<f64>) -> Self {
        let fwd = factors.clone();
        let inv = factors.clone();
        Self::new(
            move |x| x.iter().zip(&fwd).map(|(a, s)| a * s).collect(),
            move |x| x.iter().zip(&inv).map(|(a, s)| a / s).collect(),
        )
        .with_jacobian_inverse(move |_| {
            RMat::from_diagonal(&nalgebra::DVector::from_iterator(
                factors.len(),
                factors.iter().map(|s| 1.0 / s),
            ))
        })
    }

    /// `x′^μ = x^μ + a·(x^μ)³` on every axis (`a ≥ 0` keeps it monotone).
    pub fn cubic(a: f64) -> Self {
        fn solve(target: f64, a: f64) -> f64 {
            // t + a t³ = target is strictly increasing for a ≥ 0.
            let mut t = target;
            for _ in 0..100 {
                let g = t + a * t * t * t - target;
                let dg = 1.0 + 3.0 * a * t * t;
                let next = t - g / dg;
                if (next - t).abs() <= 1e-16 * next.abs().max(1.0) {
                    return next;
                }
                t = next;
            }
            t
        }
        Self::new(
            move |x| x.iter().map(|t| t + a * t * t * t).collect(),
            move |xp| xp.iter().map(|s| solve(*s, a)).collect(),
        )
        .with_jacobian_inverse(move |x| {
            RMat::from_diagonal(&nalgebra::DVector::from_iterator(
                x.len(),
                x.iter().map(|t| 1.0 / (1.0 + 3.0 * a * t * t)),
            ))
        })
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (self.forward)(x)
    }

    pub fn inverse(&self, xp: &[f64]) -> Vec<f64> {
        (self.inverse)(xp)
    }

    pub fn inverse_map(&self) -> Arc<CoordMap> {
        Arc::clone(&self.inverse)
    }

    /// `[∂x^ν/∂x′^μ]` at the unprimed point `x`, checked for conditioning.
    pub fn jacobian_inverse(&self, x: &[f64]) -> Result<RMat> {
        let jac = match &self.jacobian_inverse {
            Some(j) => j(x),
            None => {
                let dim = x.len();
                let xp = self.forward(x);
                let scheme = DifferenceScheme::default();
                let mut jac = RMat::zeros(dim, dim);
                for mu in 0..dim {
                    let col: nalgebra::DVector<f64> = partial_derivative(
                        |p: &[f64]| Ok(nalgebra::DVector::from_vec(self.inverse(p))),
                        &xp,
                        mu,
                        &scheme,
                    )?;
                    jac.set_column(mu, &col);
                }
                jac
            }
        };
        match inverse_with_condition(&jac) {
            Some((_, cond)) if cond <= self.cond_bound => Ok(jac),
            Some((_, cond)) => Err(Error::SingularCoordinateChange {
                at: x.to_vec(),
                condition: cond,
            }),
            None => Err(Error::SingularCoordinateChange {
                at: x.to_vec(),
                condition: f64::INFINITY,
            }),
        }
    }

    /// `[∂x′^μ/∂x^ν]` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<RMat> {
        let jinv = self.jacobian_inverse(x)?;
        inverse_with_condition(&jinv)
            .map(|(j, _)| j)
            .ok_or(Error::SingularCoordinateChange {
                at: x.to_vec(),
                condition: f64::INFINITY,
            })
    }
}
