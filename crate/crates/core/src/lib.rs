//! Calculus on finite-dimensional Hilbert bundles over a discretized base.
//!
//! A bundle is generated by a single object, the [`Trivializer`]: a smooth
//! field `x ↦ L(x)` of invertible complex matrices identifying the fibre over
//! `x` with the typical fibre `F = ℂⁿ`. Everything else is derived from it:
//!
//! * fibre metrics `⟨u|v⟩_x = ≺L(x)u | L(x)v≻` and the ‡-conjugation of point
//!   maps, fibre maps and bundle morphisms ([`bundle`]),
//! * the flat bundle transport `l_{x→y} = L(y)⁻¹L(x)` and transported sections,
//! * connection coefficients `Γ_μ = L⁻¹∂_μL` and the derivations `D_μ`, `D̂_μ`
//!   ([`derivation`]),
//! * the associated transport `l°` on fibre endomorphisms and its derivation
//!   `D°_μ` ([`morphism`]),
//! * lifting of states, operators and fields of the typical fibre into
//!   sections and bundle morphisms ([`qft`]).
//!
//! Fields are closures over real base coordinates rather than grid tables, so
//! finite-difference limits never interpolate. The crate is `no_std` and only
//! needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bundle;
pub mod derivation;
pub mod error;
pub mod field;
pub mod grid;
pub mod hilbert;
pub mod linalg;
pub mod morphism;
pub mod qft;

pub use num_complex::Complex64;

pub use bundle::{FibreMap, FibreVector, Section, Trivializer};
pub use derivation::{ConnectionCoefficients, DirectionalField};
pub use error::{Error, Result};
pub use field::Field;
pub use grid::{CoordinateChange, CoordinateChart, DifferenceScheme, GridPoint, SchemeOrder};
pub use hilbert::FibreSpace;
pub use morphism::{BundleMorphism, MorphismSection, SectionMorphism};
pub use qft::{FieldComponents, QuadratureRule, SupportBox, TestFunction};

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<Complex64>;
/// Dense real matrix (Jacobians of coordinate changes).
pub type RMat = nalgebra::DMatrix<f64>;

/// Vector of the typical fibre.
pub type StateVector = CVec;
/// Operator on the typical fibre.
pub type Operator = CMat;
