use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by bundle operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional base")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("fibre vectors live over different base points {left:?} and {right:?}")]
    BasePointMismatch { left: Vec<f64>, right: Vec<f64> },

    #[error("trivializer is singular at {at:?} (condition number {condition:e})")]
    SingularTrivializer { at: Vec<f64>, condition: f64 },

    #[error("basis change is singular at {at:?} (condition number {condition:e})")]
    SingularBasisChange { at: Vec<f64>, condition: f64 },

    #[error(
        "coordinate change has a singular Jacobian at {at:?} (condition number {condition:e})"
    )]
    SingularCoordinateChange { at: Vec<f64>, condition: f64 },

    #[error("difference step {epsilon:e} is below the guard {floor:e}")]
    EpsilonTooSmall { epsilon: f64, floor: f64 },

    #[error("field evaluation failed at {at:?}: {reason}")]
    EvaluationFailure { at: Vec<f64>, reason: String },

    #[error("D-hat is only defined on section morphisms generated by a bundle morphism")]
    UnsupportedMorphism,

    #[error("support box {lo:?}..={hi:?} leaves the grid")]
    SupportOutOfGrid { lo: Vec<usize>, hi: Vec<usize> },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid fibre space: {0}")]
    InvalidFibreSpace(String),

    #[error("invalid difference scheme: {0}")]
    InvalidScheme(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
