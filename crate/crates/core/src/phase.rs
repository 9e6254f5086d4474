//! Winding numbers of sampled closed phase curves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    /// Accumulated phase divided by 2π.
    pub raw: f64,
    pub turns: i64,
    /// |raw − turns|.
    pub residual: f64,
    pub max_step: f64,
}

/// Nearest-branch unwrapped winding of a closed loop of angles.
///
/// The last sample connects back to the first. A step of π or more is an
/// error, since the branch choice would be ambiguous.
pub fn winding_of_angles(angles: &[f64]) -> Result<Winding> {
    if angles.is_empty() {
        return Err(Error::InvalidInput("empty phase sequence".into()));
    }
    let n = angles.len();
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..n {
        let step = wrap(angles[(i + 1) % n] - angles[i]);
        if step.abs() >= PI {
            return Err(Error::Undersampled { step, index: i });
        }
        max_step = max_step.max(step.abs());
        total += step;
    }
    let raw = total / TAU;
    let turns = raw.round() as i64;
    Ok(Winding {
        raw,
        turns,
        residual: (raw - turns as f64).abs(),
        max_step,
    })
}

/// Winding of a closed loop of nonzero complex numbers about the origin.
pub fn winding_of_complex(values: &[Complex64]) -> Result<Winding> {
    if let Some(i) = values.iter().position(|z| z.norm() == 0.0 || !z.is_finite()) {
        return Err(Error::Degenerate(format!("phase sample {i} is zero or non-finite")));
    }
    let angles: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    winding_of_angles(&angles)
}

/// Unwrapped phase trace (for plotting), starting at the first sample's angle.
pub fn unwrap_open(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut acc = match angles.first() {
        Some(&a) => a,
        None => return out,
    };
    out.push(acc);
    for w in angles.windows(2) {
        acc += wrap(w[1] - w[0]);
        out.push(acc);
    }
    out
}

/// Representative of x modulo 2π in (−π, π].
pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}
