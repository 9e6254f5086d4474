//! Maslov indices of loops of Lagrangian planes in ℂ².
//!
//! A Lagrangian plane with orthonormal basis (u, v) gives a unitary matrix U
//! whose columns are u and v read as vectors in ℂ². det(U)² does not depend on
//! the choice of basis, and its winding number around a loop of planes is the
//! Maslov index. The sign is calibrated so that the γ₁ cycle of a Clifford
//! torus has index +2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    rotate_in_line, symplectic_normal_frame, tangent_line, to_c2, uniform_grid,
    CliffordTorus, FrameLoop, LoopR4, Vec4, MIN_LOOP_SAMPLES,
};
use crate::phase::{winding_of_complex, Winding};

/// Tolerance on U†U − I for the Lagrangian check.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

/// Tolerance on σ lying in the symplectic normal plane.
pub const FRAMING_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaslovIndex(i64);

impl MaslovIndex {
    pub fn new(value: i64) -> Result<Self> {
        if value % 2 != 0 {
            return Err(Error::Degenerate(format!("odd framing index {value}")));
        }
        Ok(MaslovIndex(value))
    }

    pub fn value(self) -> i64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaslovReport {
    pub index: i64,
    pub samples: usize,
    pub max_phase_step: f64,
    pub residual: f64,
}

impl MaslovReport {
    fn from_winding(w: Winding, samples: usize) -> Self {
        MaslovReport {
            index: w.turns,
            samples,
            max_phase_step: w.max_step,
            residual: w.residual,
        }
    }
}

/// det(U)² at every sample, after Gram–Schmidt and the unitarity check.
pub fn det_squared(planes: &FrameLoop) -> Result<Vec<Complex64>> {
    planes
        .u
        .iter()
        .zip(&planes.v)
        .enumerate()
        .map(|(i, (u, v))| {
            let nu = u.norm();
            if !(nu > 0.0) {
                return Err(Error::Degenerate(format!("zero vector in plane {i}")));
            }
            let e1 = u / nu;
            let w = v - e1 * v.dot(&e1);
            let nw = w.norm();
            if !(nw > 1e-12 * v.norm().max(1e-300)) {
                return Err(Error::Degenerate(format!("plane {i} is degenerate")));
            }
            let e2 = w / nw;
            let (a1, a2) = to_c2(&e1);
            let (b1, b2) = to_c2(&e2);
            // Off-diagonal entry of U†U; the diagonal is 1 by construction.
            let off = a1.conj() * b1 + a2.conj() * b2;
            if off.norm() > UNITARITY_TOLERANCE {
                return Err(Error::NonLagrangian {
                    residual: off.norm(),
                    index: i,
                });
            }
            let det = a1 * b2 - a2 * b1;
            Ok(det * det)
        })
        .collect()
}

/// Unwrapped det² phase trace, for plotting.
pub fn det_squared_phase_trace(planes: &FrameLoop) -> Result<Vec<f64>> {
    let d = det_squared(planes)?;
    let angles: Vec<f64> = d.iter().map(|z| z.arg()).collect();
    Ok(crate::phase::unwrap_open(&angles))
}

/// Maslov index of a closed loop of Lagrangian planes.
pub fn maslov_index_loop(planes: &FrameLoop) -> Result<MaslovReport> {
    let d = det_squared(planes)?;
    let w = winding_of_complex(&d)?;
    Ok(MaslovReport::from_winding(w, planes.len()))
}

/// Tangent planes of T_{a,b} along the (n1, n2) curve, spanned by the two
/// coordinate-angle tangent vectors.
pub fn torus_tangent_frames(torus: &CliffordTorus, n1: i64, n2: i64, n: usize) -> Result<FrameLoop> {
    let t = uniform_grid(n);
    let (u, v): (Vec<Vec4>, Vec<Vec4>) = t
        .iter()
        .map(|&s| torus.partials(n1 as f64 * s, n2 as f64 * s))
        .unzip();
    FrameLoop::new(t, u, v)
}

/// Maslov class of T_{a,b} evaluated on n1γ₁ + n2γ₂; equals 2(n1 + n2).
pub fn maslov_class_eval(torus: &CliffordTorus, n1: i64, n2: i64, n: usize) -> Result<MaslovReport> {
    if n1 == 0 && n2 == 0 {
        return Err(Error::InvalidInput("class (0, 0) has no representing loop".into()));
    }
    let needed = 64 * (n1.unsigned_abs() + n2.unsigned_abs()) as usize;
    if n < needed {
        return Err(Error::InvalidInput(format!(
            "class ({n1}, {n2}) needs at least {needed} samples, got {n}"
        )));
    }
    maslov_index_loop(&torus_tangent_frames(torus, n1, n2, n)?)
}

/// A unit section of the symplectic normal bundle of a loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Framing {
    pub t: Vec<f64>,
    pub sigma: Vec<Vec4>,
}

impl Framing {
    /// Validate σ against the loop at the uniform grid points.
    pub fn new(curve: &LoopR4, sigma: Vec<Vec4>) -> Result<Self> {
        let n = sigma.len();
        if n < MIN_LOOP_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "framing needs at least {MIN_LOOP_SAMPLES} samples"
            )));
        }
        let t = uniform_grid(n);
        for (i, (s, &ti)) in sigma.iter().zip(&t).enumerate() {
            let (c, jc) = tangent_line(&curve.velocity(ti))?;
            let bad = (s.norm() - 1.0).abs().max(s.dot(&c).abs()).max(s.dot(&jc).abs());
            if bad > FRAMING_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "framing sample {i} is not a unit vector in the symplectic normal plane ({bad:.2e})"
                )));
            }
        }
        Ok(Framing { t, sigma })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// e^{i·m·t}σ(t); shifts the framing index by 2m.
    pub fn twisted(&self, m: i64) -> Framing {
        let sigma = self
            .sigma
            .iter()
            .zip(&self.t)
            .map(|(s, &t)| rotate_in_line(s, m as f64 * t))
            .collect();
        Framing {
            t: self.t.clone(),
            sigma,
        }
    }
}

/// Plane loop Ċ(t) ∧ σ(t).
pub fn framing_planes(curve: &LoopR4, sigma: &Framing) -> Result<FrameLoop> {
    let u: Vec<Vec4> = sigma
        .t
        .iter()
        .map(|&t| tangent_line(&curve.velocity(t)).map(|l| l.0))
        .collect::<Result<_>>()?;
    FrameLoop::new(sigma.t.clone(), u, sigma.sigma.clone())
}

/// μ_C(σ), the Maslov index of Ċ ∧ σ.
pub fn framing_index(curve: &LoopR4, sigma: &Framing) -> Result<MaslovIndex> {
    let report = maslov_index_loop(&framing_planes(curve, sigma)?)?;
    MaslovIndex::new(report.index)
}

/// A framing of index 2m, obtained by twisting the transported normal frame.
pub fn make_m_framing(curve: &LoopR4, m: i64, n: usize) -> Result<Framing> {
    let frame = symplectic_normal_frame(curve, n)?;
    let base = Framing::new(curve, frame.e1().to_vec())?;
    let k = framing_index(curve, &base)?.value() / 2;
    if k == m {
        return Ok(base);
    }
    Ok(base.twisted(m - k))
}

/// The fiber-tangent section of the torus tangent plane along a basis
/// curve: the unit ∂/∂t1 direction, which lies in T L ∩ N^ω along γ₂-type
/// curves.
pub fn fiber_tangent_framing(torus: &CliffordTorus, n: usize) -> Result<(LoopR4, Framing)> {
    let curve = crate::geometry::basis_curve(torus, 0, 1)?;
    // The curve sits at t1 = 0, where ∂/∂t1 is constant.
    let (d1, _) = torus.partials(0.0, 0.0);
    let f = Framing::new(&curve, vec![d1 / d1.norm(); n])?;
    Ok((curve, f))
}

/// Rotate every plane basis by t-dependent angles; used as a basis change.
pub fn rotate_plane_bases(planes: &FrameLoop, angles: &[f64]) -> FrameLoop {
    let (u, v) = planes
        .u
        .iter()
        .zip(&planes.v)
        .zip(angles)
        .map(|((u, v), &a)| (u * a.cos() + v * a.sin(), -u * a.sin() + v * a.cos()))
        .unzip();
    FrameLoop {
        t: planes.t.clone(),
        u,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{basis_curve, vec4};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c0(b: f64) -> LoopR4 {
        LoopR4::Circle {
            center: Vec4::zeros(),
            u: vec4(0.0, 0.0, b, 0.0),
            v: vec4(0.0, 0.0, 0.0, b),
        }
    }

    fn tori() -> Vec<CliffordTorus> {
        [(1.0, 1.0), (1.0, 3.0), (2.0, 0.5)]
            .into_iter()
            .map(|(a, b)| CliffordTorus::new(a, b).unwrap())
            .collect()
    }

    #[test]
    fn constant_plane_has_index_zero() {
        let n = 64;
        let t = uniform_grid(n);
        let planes = FrameLoop::new(
            t,
            vec![vec4(1.0, 0.0, 0.0, 0.0); n],
            vec![vec4(0.0, 0.0, 1.0, 0.0); n],
        )
        .unwrap();
        assert_eq!(maslov_index_loop(&planes).unwrap().index, 0);
    }

    #[test]
    fn clifford_basis_values() {
        for t in tori() {
            for ((n1, n2), want) in [((1, 0), 2), ((0, 1), 2), ((-1, 1), 0), ((1, 1), 4)] {
                let r = maslov_class_eval(&t, n1, n2, 256).unwrap();
                assert_eq!(r.index, want, "{t:?} ({n1},{n2})");
                assert!(r.residual < 0.05);
            }
        }
    }

    #[test]
    fn class_eval_validates_inputs() {
        let t = CliffordTorus::new(1.0, 1.0).unwrap();
        assert!(maslov_class_eval(&t, 0, 0, 256).is_err());
        assert!(maslov_class_eval(&t, 3, 2, 256).is_err());
    }

    #[test]
    fn non_lagrangian_plane_rejected() {
        let n = 32;
        let planes = FrameLoop::new(
            uniform_grid(n),
            vec![vec4(1.0, 0.0, 0.0, 0.0); n],
            vec![vec4(0.0, 1.0, 0.0, 0.0); n],
        )
        .unwrap();
        assert!(matches!(
            maslov_index_loop(&planes),
            Err(Error::NonLagrangian { .. })
        ));
    }

    #[test]
    fn c0_framing_indices() {
        let n = 128;
        let curve = c0(1.5);
        let constant = Framing::new(&curve, vec![vec4(1.0, 0.0, 0.0, 0.0); n]).unwrap();
        assert_eq!(framing_index(&curve, &constant).unwrap().value(), 2);
        let sigma = uniform_grid(n)
            .into_iter()
            .map(|t| vec4(t.cos(), -t.sin(), 0.0, 0.0))
            .collect();
        let untwisted = Framing::new(&curve, sigma).unwrap();
        assert_eq!(framing_index(&curve, &untwisted).unwrap().value(), 0);
    }

    #[test]
    fn fiber_tangent_framing_is_mu_over_two() {
        let t = CliffordTorus::new(0.05, 1.0).unwrap();
        let (curve, f) = fiber_tangent_framing(&t, 128).unwrap();
        assert_eq!(framing_index(&curve, &f).unwrap().value(), 2);
    }

    #[test]
    fn m_framings() {
        let curve = c0(1.0);
        let base = symplectic_normal_frame(&curve, 128).unwrap();
        let base_framing = Framing::new(&curve, base.e1().to_vec()).unwrap();
        let k = framing_index(&curve, &base_framing).unwrap().value() / 2;
        assert_eq!(make_m_framing(&curve, k, 128).unwrap(), base_framing);
        for m in [-2, 0, 1, 3] {
            let f = make_m_framing(&curve, m, 128).unwrap();
            assert_eq!(framing_index(&curve, &f).unwrap().value(), 2 * m);
        }
        let torus = CliffordTorus::new(1.0, 2.0).unwrap();
        let curve = basis_curve(&torus, 1, 2).unwrap();
        let f = make_m_framing(&curve, -1, 512).unwrap();
        assert_eq!(framing_index(&curve, &f).unwrap().value(), -2);
    }

    #[test]
    fn framing_validation() {
        let curve = c0(1.0);
        assert!(Framing::new(&curve, vec![vec4(0.0, 0.0, 1.0, 0.0); 32]).is_err());
        assert!(Framing::new(&curve, vec![vec4(2.0, 0.0, 0.0, 0.0); 32]).is_err());
    }

    #[test]
    fn linearity_and_divisibility() {
        for t in tori() {
            let e1 = maslov_class_eval(&t, 1, 0, 64).unwrap().index;
            let e2 = maslov_class_eval(&t, 0, 1, 64).unwrap().index;
            assert_eq!(num_integer::gcd(e1, e2), 2);
            for n1 in -4i64..=4 {
                for n2 in -4i64..=4 {
                    if n1 == 0 && n2 == 0 {
                        continue;
                    }
                    let n = 64 * (n1.abs() + n2.abs()) as usize;
                    let r = maslov_class_eval(&t, n1, n2, n).unwrap();
                    assert_eq!(r.index, n1 * e1 + n2 * e2);
                    assert_eq!(r.index % 2, 0);
                }
            }
        }
    }

    #[test]
    fn resampling_and_start_point_do_not_change_index() {
        let t = CliffordTorus::new(1.0, 3.0).unwrap();
        for (n1, n2) in [(1, 0), (2, -1), (1, 1)] {
            let base = maslov_class_eval(&t, n1, n2, 256).unwrap().index;
            assert_eq!(maslov_class_eval(&t, n1, n2, 512).unwrap().index, base);
            let mut planes = torus_tangent_frames(&t, n1, n2, 256).unwrap();
            planes.u.rotate_left(37);
            planes.v.rotate_left(37);
            assert_eq!(maslov_index_loop(&planes).unwrap().index, base);
        }
    }

    proptest! {
        #[test]
        fn zero_winding_basis_rotation_is_invisible(
            amp in 0.0f64..2.0, phase in 0.0f64..TAU, freq in 1u32..4, n1 in -2i64..=2, n2 in -2i64..=2
        ) {
            prop_assume!(n1 != 0 || n2 != 0);
            let t = CliffordTorus::new(1.0, 2.0).unwrap();
            let planes = torus_tangent_frames(&t, n1, n2, 512).unwrap();
            let angles: Vec<f64> = planes.t.iter().map(|&s| amp * (freq as f64 * s + phase).sin()).collect();
            let rotated = rotate_plane_bases(&planes, &angles);
            prop_assert_eq!(
                maslov_index_loop(&rotated).unwrap().index,
                maslov_index_loop(&planes).unwrap().index
            );
        }

        #[test]
        fn twisting_shifts_framing_index(m in -3i64..=3) {
            let curve = c0(1.0);
            let f = make_m_framing(&curve, 0, 256).unwrap();
            prop_assert_eq!(framing_index(&curve, &f.twisted(m)).unwrap().value(), 2 * m);
        }
    }
}
