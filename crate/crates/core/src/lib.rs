//! Monodromy groups of Lagrangian tori in ℝ⁴.
//!
//! Exact group algorithms over GL(2,ℤ) ([`gl2z`], [`monodromy_groups`]) and
//! numerical invariants of loops and tori in ℂ² ([`geometry`], [`maslov`],
//! [`linking`]), tied together by simulated isotopies whose induced maps on
//! H₁ are read off as integer matrices ([`isotopy_lab`]).

pub mod error;
pub mod geometry;
pub mod gl2z;
pub mod isotopy_lab;
pub mod linking;
pub mod maslov;
pub mod monodromy_groups;
pub mod phase;

pub use error::{Error, Result};
pub use gl2z::{GeneratorWord, H1Class, Letter, MaslovCovector, Mat2Z};
