use alloc::sync::Arc;
use core::fmt;

use crate::error::Result;

type FieldFn<T> = dyn Fn(&[f64]) -> Result<T> + Send + Sync;

/// A smooth field over real base coordinates.
///
/// Fields are shared closures: cloning is cheap and evaluation is stateless,
/// so the same field may be evaluated from several threads at once.
pub struct Field<T> {
    eval: Arc<FieldFn<T>>,
}

impl<T> Clone for Field<T> {
    fn clone(&self) -> Self {
        Self {
            eval: Arc::clone(&self.eval),
        }
    }
}

impl<T> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Field(..)")
    }
}

impl<T: 'static> Field<T> {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> T + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(move |x| Ok(f(x))),
        }
    }

    /// A field whose evaluation may fail (outside its domain, singular, ...).
    pub fn fallible<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<T> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f) }
    }

    pub fn constant(value: T) -> Self
    where
        T: Clone + Send + Sync,
    {
        Self::new(move |_| value.clone())
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> Result<T> {
        (self.eval)(x)
    }

    /// Pointwise post-composition.
    pub fn map<U: 'static, G>(&self, g: G) -> Field<U>
    where
        G: Fn(T) -> U + Send + Sync + 'static,
    {
        let inner = self.clone();
        Field::fallible(move |x| inner.eval(x).map(&g))
    }

    /// Pre-composition with a coordinate map, `x ↦ self(φ(x))`.
    pub fn pullback<P>(&self, phi: P) -> Field<T>
    where
        P: Fn(&[f64]) -> alloc::vec::Vec<f64> + Send + Sync + 'static,
    {
        let inner = self.clone();
        Field::fallible(move |x| inner.eval(&phi(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_and_pullback_compose() {
        let f = Field::new(|x: &[f64]| x[0] * x[0]);
        let g = f.map(|v| v + 1.0).pullback(|x| alloc::vec![2.0 * x[0]]);
        assert_eq!(g.eval(&[3.0]).unwrap(), 37.0);
        assert_eq!(Field::constant(4u8).eval(&[]).unwrap(), 4);
    }
}
