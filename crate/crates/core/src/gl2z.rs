//! Exact 2×2 integer matrices and words over the monodromy generators.
//!
//! Matrices act on H₁(T,ℤ) by left multiplication on column vectors over the
//! basis {γ₁, γ₂}; the columns of a matrix are the images of γ₁ and γ₂.
//! Cohomology classes (the Maslov class and its pullbacks) are row vectors and
//! compose on the right.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2×2 integer matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2Z {
    pub a11: i64,
    pub a12: i64,
    pub a21: i64,
    pub a22: i64,
}

impl Mat2Z {
    pub const IDENTITY: Mat2Z = Mat2Z::new(1, 0, 0, 1);
    pub const NEG_IDENTITY: Mat2Z = Mat2Z::new(-1, 0, 0, -1);

    pub const fn new(a11: i64, a12: i64, a21: i64, a22: i64) -> Self {
        Mat2Z { a11, a12, a21, a22 }
    }

    /// Matrix whose columns are the given classes.
    pub fn from_columns(c1: H1Class, c2: H1Class) -> Self {
        Mat2Z::new(c1.n1, c2.n1, c1.n2, c2.n2)
    }

    pub fn columns(&self) -> (H1Class, H1Class) {
        (H1Class::new(self.a11, self.a21), H1Class::new(self.a12, self.a22))
    }

    pub fn det(&self) -> Result<i64> {
        let p = self.a11.checked_mul(self.a22).ok_or(Error::Overflow)?;
        let q = self.a12.checked_mul(self.a21).ok_or(Error::Overflow)?;
        p.checked_sub(q).ok_or(Error::Overflow)
    }

    /// Determinant, rejecting anything outside GL(2,ℤ).
    pub fn unimodular_det(&self) -> Result<i64> {
        match self.det()? {
            d @ (1 | -1) => Ok(d),
            d => Err(Error::NotUnimodular(*self, d)),
        }
    }

    pub fn checked_mul(&self, rhs: &Mat2Z) -> Result<Mat2Z> {
        fn dot(a: i64, b: i64, c: i64, d: i64) -> Result<i64> {
            let x = a.checked_mul(b).ok_or(Error::Overflow)?;
            let y = c.checked_mul(d).ok_or(Error::Overflow)?;
            x.checked_add(y).ok_or(Error::Overflow)
        }
        Ok(Mat2Z::new(
            dot(self.a11, rhs.a11, self.a12, rhs.a21)?,
            dot(self.a11, rhs.a12, self.a12, rhs.a22)?,
            dot(self.a21, rhs.a11, self.a22, rhs.a21)?,
            dot(self.a21, rhs.a12, self.a22, rhs.a22)?,
        ))
    }

    /// Inverse via the adjugate divided by the determinant.
    pub fn inverse(&self) -> Result<Mat2Z> {
        let d = self.unimodular_det()?;
        // d = ±1, so dividing by d is multiplying by d.
        let scale = |x: i64| x.checked_mul(d).ok_or(Error::Overflow);
        let neg = |x: i64| x.checked_neg().ok_or(Error::Overflow);
        Ok(Mat2Z::new(
            scale(self.a22)?,
            scale(neg(self.a12)?)?,
            scale(neg(self.a21)?)?,
            scale(self.a11)?,
        ))
    }

    pub fn checked_pow(&self, n: u32) -> Result<Mat2Z> {
        let mut acc = Mat2Z::IDENTITY;
        for _ in 0..n {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, c: H1Class) -> Result<H1Class> {
        let m = self.checked_mul(&Mat2Z::new(c.n1, 0, c.n2, 0))?;
        Ok(H1Class::new(m.a11, m.a21))
    }
}

impl Mul for Mat2Z {
    type Output = Mat2Z;

    /// Panics on overflow; use [`Mat2Z::checked_mul`] where entries may grow.
    fn mul(self, rhs: Mat2Z) -> Mat2Z {
        self.checked_mul(&rhs).expect("Mat2Z multiplication overflowed")
    }
}

impl fmt::Display for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a11, self.a12, self.a21, self.a22)
    }
}

impl FromStr for Mat2Z {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("matrix {s:?}: {e}")))?;
        match parts[..] {
            [a11, a12, a21, a22] => Ok(Mat2Z::new(a11, a12, a21, a22)),
            _ => Err(Error::InvalidInput(format!(
                "matrix {s:?}: expected four comma-separated integers"
            ))),
        }
    }
}

impl Serialize for Mat2Z {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Mat2Z {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A class in H₁(T,ℤ), as a column vector over {γ₁, γ₂}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct H1Class {
    pub n1: i64,
    pub n2: i64,
}

impl H1Class {
    pub const fn new(n1: i64, n2: i64) -> Self {
        H1Class { n1, n2 }
    }
}

/// A class in H¹(T,ℤ), as a row vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaslovCovector {
    pub m1: i64,
    pub m2: i64,
}

impl MaslovCovector {
    /// Maslov class of a Clifford torus in the standard basis.
    pub const CLIFFORD: MaslovCovector = MaslovCovector::new(2, 2);

    pub const fn new(m1: i64, m2: i64) -> Self {
        MaslovCovector { m1, m2 }
    }

    /// Pullback `self ∘ m`.
    pub fn compose(&self, m: &Mat2Z) -> Result<MaslovCovector> {
        let row = Mat2Z::new(self.m1, self.m2, 0, 0).checked_mul(m)?;
        Ok(MaslovCovector::new(row.a11, row.a12))
    }

    pub fn evaluate(&self, c: H1Class) -> Result<i64> {
        let x = self.m1.checked_mul(c.n1).ok_or(Error::Overflow)?;
        let y = self.m2.checked_mul(c.n2).ok_or(Error::Overflow)?;
        x.checked_add(y).ok_or(Error::Overflow)
    }

    pub fn divisible_by(&self, k: i64) -> bool {
        self.m1 % k == 0 && self.m2 % k == 0
    }
}

impl fmt::Display for MaslovCovector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.m1, self.m2)
    }
}

impl FromStr for MaslovCovector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("covector {s:?}: {e}")))?;
        match parts[..] {
            [m1, m2] => Ok(MaslovCovector::new(m1, m2)),
            _ => Err(Error::InvalidInput(format!(
                "covector {s:?}: expected two comma-separated integers"
            ))),
        }
    }
}

/// Generator alphabet.
///
/// `F0`, `F1` generate G_μ; `R1`, `R2` are the reflections r̄₁, r̄₂; the `T`
/// letters are the squared Dehn twists τ₁^{±2}, τ₂^{±2} generating ℰ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    F0,
    F1,
    R1,
    R2,
    T1P2,
    T1M2,
    T2P2,
    T2M2,
}

impl Letter {
    pub const ALL: [Letter; 8] = [
        Letter::F0,
        Letter::F1,
        Letter::R1,
        Letter::R2,
        Letter::T1P2,
        Letter::T1M2,
        Letter::T2P2,
        Letter::T2M2,
    ];

    pub const fn matrix(self) -> Mat2Z {
        match self {
            Letter::F0 => Mat2Z::new(1, 2, 0, -1),
            Letter::F1 => Mat2Z::new(0, 1, 1, 0),
            Letter::R1 => Mat2Z::new(-1, 0, 0, 1),
            Letter::R2 => Mat2Z::new(1, 0, 0, -1),
            Letter::T1P2 => Mat2Z::new(1, 2, 0, 1),
            Letter::T1M2 => Mat2Z::new(1, -2, 0, 1),
            Letter::T2P2 => Mat2Z::new(1, 0, -2, 1),
            Letter::T2M2 => Mat2Z::new(1, 0, 2, 1),
        }
    }

    pub const fn inverse(self) -> Letter {
        match self {
            Letter::T1P2 => Letter::T1M2,
            Letter::T1M2 => Letter::T1P2,
            Letter::T2P2 => Letter::T2M2,
            Letter::T2M2 => Letter::T2P2,
            involution => involution,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Letter::F0 => "F0",
            Letter::F1 => "F1",
            Letter::R1 => "R1",
            Letter::R2 => "R2",
            Letter::T1P2 => "T1P2",
            Letter::T1M2 => "T1M2",
            Letter::T2P2 => "T2P2",
            Letter::T2M2 => "T2M2",
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Letter::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown generator letter {s:?}")))
    }
}

/// Finite word over [`Letter`], evaluated left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorWord(pub Vec<Letter>);

impl GeneratorWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        GeneratorWord(letters)
    }

    pub fn empty() -> Self {
        GeneratorWord(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self) -> Result<Mat2Z> {
        self.0
            .iter()
            .try_fold(Mat2Z::IDENTITY, |acc, l| acc.checked_mul(&l.matrix()))
    }

    pub fn concat(&self, other: &GeneratorWord) -> GeneratorWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        GeneratorWord(v)
    }

    /// Reverse the word and invert each letter.
    pub fn inverse(&self) -> GeneratorWord {
        GeneratorWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// No letter is immediately followed by its inverse.
    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0].inverse() != w[1])
    }

    /// Cancel adjacent inverse pairs until none remain.
    pub fn freely_reduce(&self) -> GeneratorWord {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GeneratorWord(out)
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|l| l.name()).collect();
        write!(f, "[{}]", names.join(" "))
    }
}

impl From<Vec<Letter>> for GeneratorWord {
    fn from(v: Vec<Letter>) -> Self {
        GeneratorWord(v)
    }
}
