//! Loops, Clifford tori and frames in ℝ⁴ ≅ ℂ².
//!
//! Coordinates are ordered (x1, y1, x2, y2) with z₁ = x1 + i·y1 and
//! z₂ = x2 + i·y2. The symplectic form is ω = dx1∧dy1 + dx2∧dy2 and the
//! complex structure is J₀(x1, y1, x2, y2) = (−y1, x1, −y2, x2), so that
//! ω(u, v) = ⟨J₀u, v⟩.
//!
//! Loops are parametrized over t ∈ [0, 2π).

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::gl2z::H1Class;
use crate::phase::{winding_of_angles, Winding};

pub type Vec4 = Vector4<f64>;

/// Minimum sample count for a sampled loop.
pub const MIN_LOOP_SAMPLES: usize = 16;

/// Default radial tolerance for deciding that a curve lies on a torus.
pub const ON_TORUS_TOLERANCE: f64 = 1e-6;

pub fn vec4(x1: f64, y1: f64, x2: f64, y2: f64) -> Vec4 {
    Vec4::new(x1, y1, x2, y2)
}

pub fn j0(v: &Vec4) -> Vec4 {
    Vec4::new(-v[1], v[0], -v[3], v[2])
}

/// Matrix of J₀ acting on column vectors.
pub fn j0_matrix() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

pub fn omega(u: &Vec4, v: &Vec4) -> f64 {
    u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2]
}

pub fn to_c2(v: &Vec4) -> (Complex64, Complex64) {
    (Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
}

pub fn from_c2(z1: Complex64, z2: Complex64) -> Vec4 {
    Vec4::new(z1.re, z1.im, z2.re, z2.im)
}

/// Uniform grid t_k = 2πk/n.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// T_{a,b} = {|z₁| = a, |z₂| = b}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordTorus {
    pub a: f64,
    pub b: f64,
}

impl CliffordTorus {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Clifford torus radii must be positive, got a={a}, b={b}"
            )));
        }
        Ok(CliffordTorus { a, b })
    }

    pub fn point(&self, t1: f64, t2: f64) -> Vec4 {
        vec4(
            self.a * t1.cos(),
            self.a * t1.sin(),
            self.b * t2.cos(),
            self.b * t2.sin(),
        )
    }

    /// (∂/∂t1, ∂/∂t2).
    pub fn partials(&self, t1: f64, t2: f64) -> (Vec4, Vec4) {
        (
            vec4(-self.a * t1.sin(), self.a * t1.cos(), 0.0, 0.0),
            vec4(0.0, 0.0, -self.b * t2.sin(), self.b * t2.cos()),
        )
    }

    /// Largest radial deviation of the points from the torus.
    pub fn deviation(&self, points: &[Vec4]) -> f64 {
        points
            .iter()
            .map(|p| {
                let (z1, z2) = to_c2(p);
                (z1.norm() - self.a).abs().max((z2.norm() - self.b).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// A closed curve t ↦ point(t), t ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub enum LoopR4 {
    /// t ↦ (a e^{i n1 t}, b e^{i n2 t}), a curve in the class n1γ₁ + n2γ₂ of T_{a,b}.
    TorusCurve { a: f64, b: f64, n1: i64, n2: i64 },
    /// t ↦ center + cos t · u + sin t · v.
    Circle { center: Vec4, u: Vec4, v: Vec4 },
    /// C + ε J₀(Ċ/|Ċ|).
    PushOff { base: Box<LoopR4>, eps: f64 },
    /// t ↦ base(−t).
    Reversed(Box<LoopR4>),
    /// t ↦ base(t) + offset.
    Translated { base: Box<LoopR4>, offset: Vec4 },
    /// t ↦ map · base(t).
    Linear { base: Box<LoopR4>, map: Matrix4<f64> },
    Sampled(SampledLoop),
}

impl LoopR4 {
    pub fn point(&self, t: f64) -> Vec4 {
        match self {
            LoopR4::TorusCurve { a, b, n1, n2 } => {
                let (p, q) = (*n1 as f64 * t, *n2 as f64 * t);
                vec4(a * p.cos(), a * p.sin(), b * q.cos(), b * q.sin())
            }
            LoopR4::Circle { center, u, v } => center + u * t.cos() + v * t.sin(),
            LoopR4::PushOff { base, eps } => {
                let d = base.velocity(t);
                base.point(t) + j0(&d) * (*eps / d.norm())
            }
            LoopR4::Reversed(base) => base.point(-t),
            LoopR4::Translated { base, offset } => base.point(t) + offset,
            LoopR4::Linear { base, map } => map * base.point(t),
            LoopR4::Sampled(s) => s.eval(t).0,
        }
    }

    pub fn velocity(&self, t: f64) -> Vec4 {
        match self {
            LoopR4::TorusCurve { a, b, n1, n2 } => {
                let (k1, k2) = (*n1 as f64, *n2 as f64);
                let (p, q) = (k1 * t, k2 * t);
                vec4(
                    -a * k1 * p.sin(),
                    a * k1 * p.cos(),
                    -b * k2 * q.sin(),
                    b * k2 * q.cos(),
                )
            }
            LoopR4::Circle { u, v, .. } => -u * t.sin() + v * t.cos(),
            LoopR4::PushOff { base, eps } => {
                let d = base.velocity(t);
                let dd = base.acceleration(t);
                let n = d.norm();
                let unit_rate = dd / n - d * (d.dot(&dd) / (n * n * n));
                d + j0(&unit_rate) * *eps
            }
            LoopR4::Reversed(base) => -base.velocity(-t),
            LoopR4::Translated { base, .. } => base.velocity(t),
            LoopR4::Linear { base, map } => map * base.velocity(t),
            LoopR4::Sampled(s) => s.eval(t).1,
        }
    }

    pub fn acceleration(&self, t: f64) -> Vec4 {
        match self {
            LoopR4::TorusCurve { a, b, n1, n2 } => {
                let (k1, k2) = (*n1 as f64, *n2 as f64);
                let (p, q) = (k1 * t, k2 * t);
                vec4(
                    -a * k1 * k1 * p.cos(),
                    -a * k1 * k1 * p.sin(),
                    -b * k2 * k2 * q.cos(),
                    -b * k2 * k2 * q.sin(),
                )
            }
            LoopR4::Circle { u, v, .. } => -u * t.cos() - v * t.sin(),
            LoopR4::PushOff { .. } => {
                let h = 1e-5;
                (self.velocity(t + h) - self.velocity(t - h)) / (2.0 * h)
            }
            LoopR4::Reversed(base) => base.acceleration(-t),
            LoopR4::Translated { base, .. } => base.acceleration(t),
            LoopR4::Linear { base, map } => map * base.acceleration(t),
            LoopR4::Sampled(s) => s.eval(t).2,
        }
    }

    pub fn points(&self, n: usize) -> Vec<Vec4> {
        uniform_grid(n).into_iter().map(|t| self.point(t)).collect()
    }

    pub fn velocities(&self, n: usize) -> Vec<Vec4> {
        uniform_grid(n).into_iter().map(|t| self.velocity(t)).collect()
    }

    pub fn reversed(self) -> LoopR4 {
        LoopR4::Reversed(Box::new(self))
    }

    pub fn translated(self, offset: Vec4) -> LoopR4 {
        LoopR4::Translated {
            base: Box::new(self),
            offset,
        }
    }

    pub fn push_off(self, eps: f64) -> LoopR4 {
        LoopR4::PushOff {
            base: Box::new(self),
            eps,
        }
    }

    pub fn mapped(self, map: Matrix4<f64>) -> LoopR4 {
        LoopR4::Linear {
            base: Box::new(self),
            map,
        }
    }

    /// Native sample count for sampled loops.
    pub fn native_samples(&self) -> Option<usize> {
        match self {
            LoopR4::Sampled(s) => Some(s.len()),
            _ => None,
        }
    }
}

/// A loop given by samples on the uniform grid, closed implicitly.
///
/// Evaluated off-grid by periodic Catmull–Rom interpolation, whose
/// derivative at the nodes is the central difference.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLoop {
    points: Vec<Vec4>,
}

impl SampledLoop {
    pub fn new(points: Vec<Vec4>) -> Result<Self> {
        if points.len() < MIN_LOOP_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "sampled loop needs at least {MIN_LOOP_SAMPLES} points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if (points[i] - points[j]).norm() <= 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "loop is not embedded: samples {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(SampledLoop { points })
    }

    /// Resample (t, point) pairs over [0, 2π) onto a uniform grid of the same
    /// size by periodic linear interpolation.
    pub fn from_timed(samples: &[(f64, Vec4)]) -> Result<Self> {
        let n = samples.len();
        if n < MIN_LOOP_SAMPLES {
            return Self::new(samples.iter().map(|s| s.1).collect());
        }
        let mut sorted: Vec<(f64, Vec4)> = samples.to_vec();
        if sorted.iter().any(|s| !s.0.is_finite()) {
            return Err(Error::InvalidInput("non-finite t value".into()));
        }
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        if sorted[0].0 < 0.0 || sorted[n - 1].0 >= TAU {
            return Err(Error::InvalidInput("t values must lie in [0, 2π)".into()));
        }
        if sorted.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput("t values must be distinct".into()));
        }
        let step = TAU / n as f64;
        let uniform = sorted
            .iter()
            .enumerate()
            .all(|(k, s)| (s.0 - step * k as f64).abs() <= 1e-9);
        if uniform {
            return Self::new(sorted.into_iter().map(|s| s.1).collect());
        }
        let mut out = Vec::with_capacity(n);
        let mut j = 0;
        for t in uniform_grid(n) {
            while j < n && sorted[j].0 <= t {
                j += 1;
            }
            // Bracket t between sorted[j-1] and sorted[j], wrapping around.
            let (t0, p0) = if j == 0 {
                (sorted[n - 1].0 - TAU, sorted[n - 1].1)
            } else {
                sorted[j - 1]
            };
            let (t1, p1) = if j == n {
                (sorted[0].0 + TAU, sorted[0].1)
            } else {
                sorted[j]
            };
            let w = (t - t0) / (t1 - t0);
            out.push(p0 * (1.0 - w) + p1 * w);
        }
        Self::new(out)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec4] {
        &self.points
    }

    /// Point, first and second derivative at t.
    fn eval(&self, t: f64) -> (Vec4, Vec4, Vec4) {
        let n = self.points.len();
        let h = TAU / n as f64;
        let u = t.rem_euclid(TAU) / h;
        let i = (u.floor() as usize).min(n - 1);
        let f = u - i as f64;
        let at = |k: isize| self.points[(i as isize + k).rem_euclid(n as isize) as usize];
        let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
        let c1 = (p2 - p0) * 0.5;
        let c2 = (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * 0.5;
        let c3 = (-p0 + p1 * 3.0 - p2 * 3.0 + p3) * 0.5;
        let point = p1 + c1 * f + c2 * (f * f) + c3 * (f * f * f);
        let vel = (c1 + c2 * (2.0 * f) + c3 * (3.0 * f * f)) / h;
        let acc = (c2 * 2.0 + c3 * (6.0 * f)) / (h * h);
        (point, vel, acc)
    }
}

/// The curve t ↦ (a e^{i n1 t}, b e^{i n2 t}) on T_{a,b}.
pub fn basis_curve(torus: &CliffordTorus, n1: i64, n2: i64) -> Result<LoopR4> {
    if n1 == 0 && n2 == 0 {
        return Err(Error::InvalidInput(
            "basis curve needs (n1, n2) ≠ (0, 0)".into(),
        ));
    }
    Ok(LoopR4::TorusCurve {
        a: torus.a,
        b: torus.b,
        n1,
        n2,
    })
}

pub fn torus_point(torus: &CliffordTorus, t1: f64, t2: f64) -> Vec4 {
    torus.point(t1, t2)
}

/// A sampled loop of oriented 2-planes, span(u(t), v(t)).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLoop {
    pub t: Vec<f64>,
    pub u: Vec<Vec4>,
    pub v: Vec<Vec4>,
}

impl FrameLoop {
    pub fn new(t: Vec<f64>, u: Vec<Vec4>, v: Vec<Vec4>) -> Result<Self> {
        if t.len() != u.len() || t.len() != v.len() || t.is_empty() {
            return Err(Error::InvalidInput("frame loop arrays differ in length".into()));
        }
        Ok(FrameLoop { t, u, v })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Transported orthonormal frame (e₁, e₂ = J₀e₁) of the symplectic normal
/// bundle, closed up by a uniform rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFrame {
    pub frame: FrameLoop,
    /// Rotation of e₁ accumulated by the transport around the full loop
    /// before closing up, in radians.
    pub holonomy: f64,
}

impl NormalFrame {
    pub fn e1(&self) -> &[Vec4] {
        &self.frame.u
    }

    pub fn e2(&self) -> &[Vec4] {
        &self.frame.v
    }
}

/// Orthonormal basis {c, J₀c} of the complex line spanned by a velocity.
pub fn tangent_line(velocity: &Vec4) -> Result<(Vec4, Vec4)> {
    let n = velocity.norm();
    if !(n > 1e-12) || !n.is_finite() {
        return Err(Error::Degenerate("curve velocity vanishes".into()));
    }
    let c = velocity / n;
    Ok((c, j0(&c)))
}

/// Project onto the orthogonal complement of span{c, J₀c}, the Euclidean
/// model of the symplectic normal plane.
pub fn project_normal(v: &Vec4, line: &(Vec4, Vec4)) -> Vec4 {
    v - line.0 * v.dot(&line.0) - line.1 * v.dot(&line.1)
}

/// Rotate x by angle φ inside the complex line it spans: cos φ·x + sin φ·J₀x.
pub fn rotate_in_line(x: &Vec4, phi: f64) -> Vec4 {
    x * phi.cos() + j0(x) * phi.sin()
}

/// Normal-frame seed: the first standard basis vector with a non-negligible
/// component in the normal plane, projected and normalized.
pub fn seed_normal_vector(line: &(Vec4, Vec4)) -> Result<Vec4> {
    for i in 0..4 {
        let mut e = Vec4::zeros();
        e[i] = 1.0;
        let p = project_normal(&e, line);
        let n = p.norm();
        if n > 1e-3 {
            return Ok(p / n);
        }
    }
    Err(Error::Degenerate("no standard basis vector meets the normal plane".into()))
}

/// Project a unit vector onto the normal plane and renormalize.
///
/// A projection shorter than 1/2 means consecutive planes differ by more
/// than 60°, which is treated as a too-coarse step.
pub fn transport_step(prev: &Vec4, line: &(Vec4, Vec4)) -> Result<Vec4> {
    let p = project_normal(prev, line);
    let n = p.norm();
    if n < 0.5 {
        return Err(Error::Degenerate(format!(
            "frame transport projection degenerated (norm {n:.3e}); step too coarse"
        )));
    }
    Ok(p / n)
}

/// Signed angle from `from` to `to`, both unit vectors in a common complex
/// line, measured with the orientation (x, J₀x).
pub fn angle_in_line(from: &Vec4, to: &Vec4) -> f64 {
    to.dot(&j0(from)).atan2(to.dot(from))
}

/// Symplectic normal frame of a loop sampled at n points.
pub fn symplectic_normal_frame(curve: &LoopR4, n: usize) -> Result<NormalFrame> {
    if n < MIN_LOOP_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "normal frame needs at least {MIN_LOOP_SAMPLES} samples"
        )));
    }
    let t = uniform_grid(n);
    let lines = t
        .iter()
        .map(|&s| tangent_line(&curve.velocity(s)))
        .collect::<Result<Vec<_>>>()?;
    let mut e1 = Vec::with_capacity(n);
    e1.push(seed_normal_vector(&lines[0])?);
    for k in 1..n {
        let next = transport_step(&e1[k - 1], &lines[k])?;
        e1.push(next);
    }
    let back = transport_step(&e1[n - 1], &lines[0])?;
    let holonomy = angle_in_line(&e1[0], &back);
    let closed: Vec<Vec4> = e1
        .iter()
        .enumerate()
        .map(|(k, e)| rotate_in_line(e, -holonomy * k as f64 / n as f64))
        .collect();
    let e2: Vec<Vec4> = closed.iter().map(j0).collect();
    Ok(NormalFrame {
        frame: FrameLoop::new(t, closed, e2)?,
        holonomy,
    })
}

/// Winding numbers of arg z₁ and arg z₂ around a closed sampled loop.
pub fn complex_windings(points: &[Vec4]) -> Result<(Winding, Winding)> {
    let (a1, a2): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|p| {
            let (z1, z2) = to_c2(p);
            (z1.arg(), z2.arg())
        })
        .unzip();
    Ok((winding_of_angles(&a1)?, winding_of_angles(&a2)?))
}

/// Class in H₁(T_{a,b}) of a closed sampled curve lying on the torus.
pub fn homology_class_of_points(
    points: &[Vec4],
    torus: &CliffordTorus,
    tolerance: f64,
) -> Result<H1Class> {
    let deviation = torus.deviation(points);
    if !(deviation <= tolerance) {
        return Err(Error::OffTorus {
            deviation,
            tolerance,
        });
    }
    let (w1, w2) = complex_windings(points)?;
    Ok(H1Class::new(w1.turns, w2.turns))
}

pub fn homology_class_on_torus(
    curve: &LoopR4,
    torus: &CliffordTorus,
    n: usize,
) -> Result<H1Class> {
    let tol = ON_TORUS_TOLERANCE * torus.a.max(torus.b).max(1.0);
    homology_class_of_points(&curve.points(n), torus, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng) -> Vec4 {
        Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn omega_matches_j0_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10_000 {
            let (u, v) = (random_vec(&mut rng), random_vec(&mut rng));
            assert!((omega(&u, &v) - j0(&u).dot(&v)).abs() < 1e-12);
            assert!((j0(&j0(&u)) + u).norm() < 1e-15);
            assert!((omega(&j0(&u), &j0(&v)) - omega(&u, &v)).abs() < 1e-12);
            assert!((j0_matrix() * u - j0(&u)).norm() < 1e-15);
        }
    }

    #[test]
    fn torus_points() {
        let close = |p: Vec4, q: Vec4| (p - q).norm() < 1e-12;
        let t = CliffordTorus::new(1.0, 1.0).unwrap();
        assert!(close(torus_point(&t, 0.0, 0.0), vec4(1.0, 0.0, 1.0, 0.0)));
        let t = CliffordTorus::new(2.0, 1.0).unwrap();
        assert!(close(
            torus_point(&t, std::f64::consts::FRAC_PI_2, 0.0),
            vec4(0.0, 2.0, 1.0, 0.0)
        ));
        let t = CliffordTorus::new(1.0, 3.0).unwrap();
        let pi = std::f64::consts::PI;
        assert!(close(torus_point(&t, pi, pi), vec4(-1.0, 0.0, -3.0, 0.0)));
        assert!(CliffordTorus::new(0.0, 1.0).is_err());
    }

    #[test]
    fn basis_curve_classes() {
        let t = CliffordTorus::new(1.3, 0.7).unwrap();
        for n1 in -5..=5 {
            for n2 in -5..=5 {
                if n1 == 0 && n2 == 0 {
                    assert!(basis_curve(&t, 0, 0).is_err());
                    continue;
                }
                let c = basis_curve(&t, n1, n2).unwrap();
                assert_eq!(homology_class_on_torus(&c, &t, 64).unwrap(), H1Class::new(n1, n2));
            }
        }
    }

    #[test]
    fn swap_map_sends_gamma1_to_gamma2() {
        let t = CliffordTorus::new(2.0, 2.0).unwrap();
        // (z1, z2) -> (-z2, z1)
        let a1 = Matrix4::new(
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        );
        let image = basis_curve(&t, 1, 0).unwrap().mapped(a1);
        assert_eq!(homology_class_on_torus(&image, &t, 64).unwrap(), H1Class::new(0, 1));
    }

    #[test]
    fn class_readout_errors() {
        let t = CliffordTorus::new(1.0, 1.0).unwrap();
        let off = basis_curve(&CliffordTorus::new(1.1, 1.0).unwrap(), 1, 0).unwrap();
        assert!(matches!(
            homology_class_on_torus(&off, &t, 64),
            Err(Error::OffTorus { .. })
        ));
        // z₁ alternating between 1 and −1 takes phase steps of exactly π.
        let flip: Vec<Vec4> = (0..16)
            .map(|k| vec4(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0, 1.0, 0.0))
            .collect();
        assert!(matches!(
            homology_class_of_points(&flip, &t, 1e-9),
            Err(Error::Undersampled { .. })
        ));
    }

    fn check_normal_frame(curve: &LoopR4, n: usize) -> NormalFrame {
        let f = symplectic_normal_frame(curve, n).unwrap();
        for k in 0..n {
            let d = curve.velocity(f.frame.t[k]);
            let (e1, e2) = (f.e1()[k], f.e2()[k]);
            assert!(e1.dot(&d).abs() < 1e-10 * d.norm());
            assert!(e1.dot(&j0(&d)).abs() < 1e-10 * d.norm());
            assert!(e2.dot(&d).abs() < 1e-10 * d.norm());
            assert!((e1.norm() - 1.0).abs() < 1e-12);
            assert!(e1.dot(&e2).abs() < 1e-12);
        }
        // Closed up: transporting the last frame back lands on the first.
        let line = tangent_line(&curve.velocity(0.0)).unwrap();
        let back = transport_step(&f.e1()[n - 1], &line).unwrap();
        let step_limit = 4.0 * std::f64::consts::TAU / n as f64;
        assert!(angle_in_line(&f.e1()[0], &back).abs() < step_limit);
        f
    }

    #[test]
    fn normal_frame_of_z2_circle_is_z1_plane() {
        let c0 = LoopR4::Circle {
            center: Vec4::zeros(),
            u: vec4(0.0, 0.0, 1.0, 0.0),
            v: vec4(0.0, 0.0, 0.0, 1.0),
        };
        let f = check_normal_frame(&c0, 64);
        for k in 0..64 {
            assert!((f.e1()[k] - vec4(1.0, 0.0, 0.0, 0.0)).norm() < 1e-12);
            assert!((f.e2()[k] - vec4(0.0, 1.0, 0.0, 0.0)).norm() < 1e-12);
        }
        assert!(f.holonomy.abs() < 1e-12);
    }

    #[test]
    fn normal_frame_of_gamma1_is_z2_plane() {
        let t = CliffordTorus::new(1.5, 0.5).unwrap();
        let f = check_normal_frame(&basis_curve(&t, 1, 0).unwrap(), 128);
        for e in f.e1().iter().chain(f.e2()) {
            assert!(e[0].abs() < 1e-12 && e[1].abs() < 1e-12);
        }
    }

    #[test]
    fn basis_curve_frames_close_without_correction() {
        for (a, b) in [(1.0, 1.0), (1.0, 3.0), (2.0, 0.5)] {
            let t = CliffordTorus::new(a, b).unwrap();
            for n in [128, 256] {
                for (n1, n2) in [(1, 0), (0, 1)] {
                    let f = check_normal_frame(&basis_curve(&t, n1, n2).unwrap(), n);
                    assert!(f.holonomy.abs() < 1e-6, "{a} {b} {n1} {n2}: {}", f.holonomy);
                }
            }
        }
        let f = check_normal_frame(&basis_curve(&CliffordTorus::new(1.0, 1.0).unwrap(), -1, 1).unwrap(), 128);
        assert!(f.holonomy.abs() < 1e-6);
    }

    #[test]
    fn curves_with_holonomy_are_closed_up() {
        let t = CliffordTorus::new(1.0, 1.0).unwrap();
        let f = check_normal_frame(&basis_curve(&t, 1, 2).unwrap(), 256);
        assert!(f.holonomy.abs() > 1e-3);
    }

    #[test]
    fn sampled_loop_interpolates_circle() {
        let exact = LoopR4::Circle {
            center: vec4(0.5, 0.0, 0.0, 0.0),
            u: vec4(1.0, 0.0, 0.0, 0.0),
            v: vec4(0.0, 0.0, 1.0, 0.0),
        };
        let s = LoopR4::Sampled(SampledLoop::new(exact.points(256)).unwrap());
        for k in 0..50 {
            let t = 0.1257 * k as f64;
            assert!((s.point(t) - exact.point(t)).norm() < 1e-5);
            assert!((s.velocity(t) - exact.velocity(t)).norm() < 1e-3);
        }
    }

    #[test]
    fn sampled_loop_validation() {
        assert!(SampledLoop::new(vec![Vec4::zeros(); 8]).is_err());
        let mut pts = LoopR4::TorusCurve { a: 1.0, b: 1.0, n1: 1, n2: 0 }.points(32);
        pts[5] = pts[9];
        assert!(SampledLoop::new(pts).is_err());
    }

    #[test]
    fn timed_samples_resample_onto_uniform_grid() {
        let exact = basis_curve(&CliffordTorus::new(1.0, 1.0).unwrap(), 1, 0).unwrap();
        let n = 512;
        let timed: Vec<(f64, Vec4)> = (0..n)
            .map(|k| {
                let t = TAU * (k as f64 + 0.3 * ((k % 3) as f64 / 3.0)) / n as f64;
                (t, exact.point(t))
            })
            .collect();
        let s = SampledLoop::from_timed(&timed).unwrap();
        for (k, p) in s.points().iter().enumerate() {
            let t = TAU * k as f64 / n as f64;
            assert!((p - exact.point(t)).norm() < 1e-4);
        }
    }

    #[test]
    fn push_off_velocity_matches_finite_difference() {
        let c = basis_curve(&CliffordTorus::new(1.0, 2.0).unwrap(), 2, -1)
            .unwrap()
            .push_off(0.1);
        for k in 0..20 {
            let t = 0.31 * k as f64;
            let h = 1e-6;
            let fd = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
            assert!((fd - c.velocity(t)).norm() < 1e-6);
        }
    }
}
