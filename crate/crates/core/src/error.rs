use thiserror::Error;

use crate::gl2z::Mat2Z;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integer overflow in exact matrix arithmetic")]
    Overflow,
    #[error("matrix {0} has determinant {1}, expected ±1")]
    NotUnimodular(Mat2Z, i64),
    #[error("matrix {matrix} is not a member of {group}")]
    NotMember { group: &'static str, matrix: Mat2Z },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("phase step {step:.4} rad at sample {index} reaches π; loop is undersampled")]
    Undersampled { step: f64, index: usize },
    #[error("curve leaves the torus: radial deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    OffTorus { deviation: f64, tolerance: f64 },
    #[error("plane at sample {index} is not Lagrangian (residual {residual:.3e})")]
    NonLagrangian { residual: f64, index: usize },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("curve and surface come within {distance:.3e} (margin {margin:.3e})")]
    Touching { distance: f64, margin: f64 },
    #[error("degree integral inconclusive: raw {raw:.4}, residual {residual:.4}; refine the grid")]
    Inconclusive { raw: f64, residual: f64 },
    #[error("direction is not a regular value at grid resolution")]
    NonRegular,
    #[error("decomposition stalled at {0}; reduction measure failed to decrease")]
    Stalled(Mat2Z),
}
