//! Linking numbers of loops with tori in ℝ⁴.
//!
//! The linking number of a loop C and a torus L is the degree of the Gauss
//! map S¹×T² → S³, (s, t₁, t₂) ↦ G/|G| with G = C(s) − L(t₁, t₂). It is
//! computed two ways: by the degree integral, and by counting signed
//! preimages of a regular value.
//!
//! Orientation: S¹×T² carries ds∧dt₁∧dt₂ and S³ the boundary orientation of
//! the unit ball. With these choices the meridian circle around T_{a,b} in
//! the (x₁, x₂)-plane, oriented from the x₁ axis towards the x₂ axis, has
//! degree −1.

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{basis_curve, vec4, CliffordTorus, LoopR4, Vec4};

/// Above this residual the integral is reported as inconclusive.
pub const INCONCLUSIVE_RESIDUAL: f64 = 0.25;

/// Minimum samples per direction of a sampled surface.
pub const MIN_SURFACE_SAMPLES: usize = 8;

/// Directions tried in turn by [`preimage_degree`].
pub const ORACLE_DIRECTIONS: [[f64; 4]; 4] = [
    [0.31, -0.52, 0.68, 0.41],
    [-0.63, 0.22, 0.14, 0.73],
    [0.45, 0.61, -0.33, 0.56],
    [0.12, 0.83, 0.47, -0.27],
];

/// Quadrature grid sizes in s, t₁, t₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeGrid {
    pub ns: usize,
    pub n1: usize,
    pub n2: usize,
}

impl DegreeGrid {
    pub const DEFAULT: DegreeGrid = DegreeGrid::cube(64);

    pub const fn cube(n: usize) -> Self {
        DegreeGrid { ns: n, n1: n, n2: n }
    }

    pub fn scaled(self, k: usize) -> Self {
        DegreeGrid {
            ns: self.ns * k,
            n1: self.n1 * k,
            n2: self.n2 * k,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ns < 4 || self.n1 < 4 || self.n2 < 4 {
            return Err(Error::InvalidInput(format!(
                "degree grid {}x{}x{} is too coarse",
                self.ns, self.n1, self.n2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub raw: f64,
    pub rounded: i64,
    pub residual: f64,
    /// Smallest |C − L| seen on the grid.
    pub min_distance: f64,
}

/// A torus sampled on a uniform periodic grid, entry [i·n2 + j] at
/// (2πi/n1, 2πj/n2). Off-grid values use bicubic periodic Catmull–Rom.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSurface {
    n1: usize,
    n2: usize,
    points: Vec<Vec4>,
}

impl SampledSurface {
    pub fn new(n1: usize, n2: usize, points: Vec<Vec4>) -> Result<Self> {
        if n1 < MIN_SURFACE_SAMPLES || n2 < MIN_SURFACE_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "sampled surface needs at least {MIN_SURFACE_SAMPLES} samples per direction, got {n1}x{n2}"
            )));
        }
        if points.len() != n1 * n2 {
            return Err(Error::InvalidInput(format!(
                "expected {} surface samples, got {}",
                n1 * n2,
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput(format!("surface sample {i} is not finite")));
        }
        let s = SampledSurface { n1, n2, points };
        let (h1, h2) = (TAU / n1 as f64, TAU / n2 as f64);
        for i in 0..n1 {
            for j in 0..n2 {
                let (_, d1, d2) = s.eval(h1 * i as f64, h2 * j as f64);
                let gram = d1.norm_squared() * d2.norm_squared() - d1.dot(&d2).powi(2);
                if !(gram > 1e-12 * d1.norm_squared().max(d2.norm_squared()).powi(2)) {
                    return Err(Error::Degenerate(format!(
                        "surface is not immersed at grid node ({i}, {j})"
                    )));
                }
            }
        }
        Ok(s)
    }

    /// Build from (t₁, t₂, point) rows covering a full uniform grid in any order.
    pub fn from_timed(rows: &[(f64, f64, Vec4)]) -> Result<Self> {
        let distinct = |sel: fn(&(f64, f64, Vec4)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(sel).collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
            v.len()
        };
        let n1 = distinct(|r| r.0);
        let n2 = distinct(|r| r.1);
        if n1 * n2 != rows.len() {
            return Err(Error::InvalidInput(format!(
                "surface rows do not form a full grid ({n1} t1 values, {n2} t2 values, {} rows)",
                rows.len()
            )));
        }
        let mut points = vec![None; n1 * n2];
        for &(t1, t2, p) in rows {
            let i = grid_index(t1, n1)?;
            let j = grid_index(t2, n2)?;
            if points[i * n2 + j].replace(p).is_some() {
                return Err(Error::InvalidInput(format!("duplicate surface sample at ({t1}, {t2})")));
            }
        }
        let points = points.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| {
            Error::InvalidInput("surface grid has missing samples".into())
        })?;
        Self::new(n1, n2, points)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    fn at(&self, i: isize, j: isize) -> Vec4 {
        let i = i.rem_euclid(self.n1 as isize) as usize;
        let j = j.rem_euclid(self.n2 as isize) as usize;
        self.points[i * self.n2 + j]
    }

    fn eval(&self, t1: f64, t2: f64) -> (Vec4, Vec4, Vec4) {
        let (h1, h2) = (TAU / self.n1 as f64, TAU / self.n2 as f64);
        let (i, f1) = cell(t1, self.n1);
        let (j, f2) = cell(t2, self.n2);
        let (w1, dw1) = catmull_rom_weights(f1);
        let (w2, dw2) = catmull_rom_weights(f2);
        let mut p = Vec4::zeros();
        let mut d1 = Vec4::zeros();
        let mut d2 = Vec4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                let q = self.at(i + a as isize - 1, j + b as isize - 1);
                p += q * (w1[a] * w2[b]);
                d1 += q * (dw1[a] * w2[b]);
                d2 += q * (w1[a] * dw2[b]);
            }
        }
        (p, d1 / h1, d2 / h2)
    }
}

fn grid_index(t: f64, n: usize) -> Result<usize> {
    let u = t / TAU * n as f64;
    let k = u.round();
    if !(t >= 0.0 && t < TAU) || (u - k).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "parameter {t} is not on the uniform {n}-point grid over [0, 2π)"
        )));
    }
    Ok(k as usize % n)
}

fn cell(t: f64, n: usize) -> (isize, f64) {
    let u = t.rem_euclid(TAU) / (TAU / n as f64);
    let i = u.floor().min((n - 1) as f64);
    (i as isize, u - i)
}

/// Catmull–Rom weights for samples k−1, k, k+1, k+2 and their f-derivatives.
fn catmull_rom_weights(f: f64) -> ([f64; 4], [f64; 4]) {
    let (f2, f3) = (f * f, f * f * f);
    (
        [
            0.5 * (-f + 2.0 * f2 - f3),
            0.5 * (2.0 - 5.0 * f2 + 3.0 * f3),
            0.5 * (f + 4.0 * f2 - 3.0 * f3),
            0.5 * (-f2 + f3),
        ],
        [
            0.5 * (-1.0 + 4.0 * f - 3.0 * f2),
            0.5 * (-10.0 * f + 9.0 * f2),
            0.5 * (1.0 + 8.0 * f - 9.0 * f2),
            0.5 * (-2.0 * f + 3.0 * f2),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum TorusSurface {
    Clifford(CliffordTorus),
    Sampled(SampledSurface),
}

impl TorusSurface {
    /// Point and partials (∂/∂t₁, ∂/∂t₂).
    pub fn eval(&self, t1: f64, t2: f64) -> (Vec4, Vec4, Vec4) {
        match self {
            TorusSurface::Clifford(t) => {
                let (d1, d2) = t.partials(t1, t2);
                (t.point(t1, t2), d1, d2)
            }
            TorusSurface::Sampled(s) => s.eval(t1, t2),
        }
    }

    pub fn point(&self, t1: f64, t2: f64) -> Vec4 {
        self.eval(t1, t2).0
    }
}

impl From<CliffordTorus> for TorusSurface {
    fn from(t: CliffordTorus) -> Self {
        TorusSurface::Clifford(t)
    }
}

fn det4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    Matrix4::from_columns(&[*a, *b, *c, *d]).determinant()
}

fn midpoints(n: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    (0..n).map(|k| (k as f64 + 0.5) * h).collect()
}

/// Per-s-slice contributions to the degree integral, summing to the degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTrace {
    pub s: Vec<f64>,
    pub density: Vec<f64>,
}

struct SurfaceSamples {
    pts: Vec<Vec4>,
    d1: Vec<Vec4>,
    d2: Vec<Vec4>,
    max_cell: f64,
}

fn sample_surface(surface: &TorusSurface, n1: usize, n2: usize) -> SurfaceSamples {
    let (h1, h2) = (TAU / n1 as f64, TAU / n2 as f64);
    let mut out = SurfaceSamples {
        pts: Vec::with_capacity(n1 * n2),
        d1: Vec::with_capacity(n1 * n2),
        d2: Vec::with_capacity(n1 * n2),
        max_cell: 0.0,
    };
    for &t1 in &midpoints(n1) {
        for &t2 in &midpoints(n2) {
            let (p, a, b) = surface.eval(t1, t2);
            let diag = ((h1 * a.norm()).powi(2) + (h2 * b.norm()).powi(2)).sqrt();
            out.max_cell = out.max_cell.max(diag);
            out.pts.push(p);
            out.d1.push(a);
            out.d2.push(b);
        }
    }
    out
}

fn degree_integral(
    curve: &LoopR4,
    surface: &TorusSurface,
    grid: DegreeGrid,
) -> Result<(DegreeResult, DegreeTrace)> {
    grid.validate()?;
    let surf = sample_surface(surface, grid.n1, grid.n2);
    let hs = TAU / grid.ns as f64;
    let cell = hs * (TAU / grid.n1 as f64) * (TAU / grid.n2 as f64);
    let s_grid = midpoints(grid.ns);
    let mut density = Vec::with_capacity(grid.ns);
    let mut min_distance = f64::INFINITY;
    let mut max_step: f64 = 0.0;
    for &s in &s_grid {
        let c = curve.point(s);
        let dc = curve.velocity(s);
        max_step = max_step.max(hs * dc.norm());
        let mut slice = 0.0;
        for k in 0..surf.pts.len() {
            let g = c - surf.pts[k];
            let r2 = g.norm_squared();
            min_distance = min_distance.min(r2.sqrt());
            slice += det4(&g, &dc, &surf.d1[k], &surf.d2[k]) / (r2 * r2);
        }
        density.push(slice * cell / (2.0 * PI * PI));
    }
    let margin = 0.5 * surf.max_cell.max(max_step);
    if !(min_distance > margin) {
        return Err(Error::Touching {
            distance: min_distance,
            margin,
        });
    }
    let raw: f64 = density.iter().sum();
    if !raw.is_finite() {
        return Err(Error::Degenerate("degree integral is not finite".into()));
    }
    let rounded = raw.round() as i64;
    let residual = (raw - rounded as f64).abs();
    if residual > INCONCLUSIVE_RESIDUAL {
        return Err(Error::Inconclusive { raw, residual });
    }
    Ok((
        DegreeResult {
            raw,
            rounded,
            residual,
            min_distance,
        },
        DegreeTrace { s: s_grid, density },
    ))
}

/// Linking number of `curve` with `surface` as the degree integral of the
/// Gauss map, by the midpoint rule on `grid`.
pub fn gauss_linking(curve: &LoopR4, surface: &TorusSurface, grid: DegreeGrid) -> Result<DegreeResult> {
    degree_integral(curve, surface, grid).map(|r| r.0)
}

pub fn gauss_linking_trace(
    curve: &LoopR4,
    surface: &TorusSurface,
    grid: DegreeGrid,
) -> Result<(DegreeResult, DegreeTrace)> {
    degree_integral(curve, surface, grid)
}

/// Orthonormal basis of the complement of the unit vector d.
fn complement_basis(d: &Vec4) -> [Vec4; 3] {
    let mut basis: Vec<Vec4> = Vec::with_capacity(3);
    let mut candidates: Vec<Vec4> = (0..4).map(|k| Vec4::ith(k, 1.0)).collect();
    candidates.sort_by(|x, y| d.dot(x).abs().total_cmp(&d.dot(y).abs()));
    for e in candidates {
        let mut v = e - d * d.dot(&e);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if basis.len() < 3 && v.norm() > 1e-6 {
            basis.push(v.normalize());
        }
    }
    [basis[0], basis[1], basis[2]]
}

fn periodic_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Signed count of solutions of G/|G| = direction.
///
/// Candidates are the local maxima of ⟨G/|G|, d⟩ on `grid`, refined by
/// Newton's method on the three equations ⟨G, qᵢ⟩ = 0 with (qᵢ) a basis of
/// d^⊥. Each solution contributes sign det[G, ∂ₛG, ∂₁G, ∂₂G], the sign of
/// the integrand of the degree integral there.
pub fn preimage_degree_oracle(
    curve: &LoopR4,
    surface: &TorusSurface,
    direction: &Vec4,
    grid: DegreeGrid,
) -> Result<i64> {
    grid.validate()?;
    let norm = direction.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidInput("oracle direction must be a nonzero vector".into()));
    }
    let d = direction / norm;
    let q = complement_basis(&d);
    let (ns, n1, n2) = (grid.ns, grid.n1, grid.n2);
    let surf = sample_surface(surface, n1, n2);
    let (ss, g1, g2) = (midpoints(ns), midpoints(n1), midpoints(n2));
    let curve_pts: Vec<Vec4> = ss.iter().map(|&s| curve.point(s)).collect();

    let mut value = vec![0.0; ns * n1 * n2];
    for i in 0..ns {
        for k in 0..n1 * n2 {
            let g = curve_pts[i] - surf.pts[k];
            value[i * n1 * n2 + k] = d.dot(&g) / g.norm();
        }
    }
    let idx = |i: isize, j: isize, k: isize| {
        let i = i.rem_euclid(ns as isize) as usize;
        let j = j.rem_euclid(n1 as isize) as usize;
        let k = k.rem_euclid(n2 as isize) as usize;
        (i * n1 + j) * n2 + k
    };

    let cell = [TAU / ns as f64, TAU / n1 as f64, TAU / n2 as f64];
    let mut found: Vec<([f64; 3], i64)> = Vec::new();
    for i in 0..ns as isize {
        for j in 0..n1 as isize {
            for k in 0..n2 as isize {
                let v = value[idx(i, j, k)];
                if v <= 1.0_f64.cos() {
                    continue;
                }
                let is_max = (-1..=1).all(|di| {
                    (-1..=1).all(|dj| {
                        (-1..=1).all(|dk| {
                            (di, dj, dk) == (0, 0, 0) || value[idx(i + di, j + dj, k + dk)] <= v
                        })
                    })
                });
                if !is_max {
                    continue;
                }
                let seed = [ss[i as usize], g1[j as usize], g2[k as usize]];
                let Some((x, sign)) = newton_preimage(curve, surface, &d, &q, seed)? else {
                    continue;
                };
                let mut duplicate = false;
                for (y, _) in &found {
                    let gaps: Vec<f64> = (0..3).map(|c| periodic_gap(x[c], y[c]) / cell[c]).collect();
                    let dist = gaps.iter().map(|g| g * g).sum::<f64>().sqrt();
                    if dist < 1e-6 {
                        duplicate = true;
                    } else if dist < 1.0 {
                        return Err(Error::NonRegular);
                    }
                }
                if !duplicate {
                    found.push((x, sign));
                }
            }
        }
    }
    Ok(found.iter().map(|f| f.1).sum())
}

/// Newton refinement of a preimage candidate. Returns the solution and its
/// sign, None if the iteration does not converge to a preimage.
fn newton_preimage(
    curve: &LoopR4,
    surface: &TorusSurface,
    d: &Vec4,
    q: &[Vec4; 3],
    seed: [f64; 3],
) -> Result<Option<([f64; 3], i64)>> {
    let mut x = seed;
    for _ in 0..50 {
        let (p, l1, l2) = surface.eval(x[1], x[2]);
        let c = curve.point(x[0]);
        let dc = curve.velocity(x[0]);
        let g = c - p;
        let cols = [dc, -l1, -l2];
        let f = Vector3::new(q[0].dot(&g), q[1].dot(&g), q[2].dot(&g));
        let jac = Matrix3::from_fn(|r, col| q[r].dot(&cols[col]));
        let scale = g.norm().max(1e-300);
        if f.norm() < 1e-12 * (1.0 + scale) {
            if d.dot(&g) <= 0.0 {
                return Ok(None);
            }
            let colnorm: f64 = cols.iter().map(|v| v.norm()).product();
            let det = det4(&g, &dc, &-l1, &-l2) / (scale * colnorm);
            if det.abs() < 1e-6 {
                return Err(Error::NonRegular);
            }
            let wrapped = x.map(|v| v.rem_euclid(TAU));
            return Ok(Some((wrapped, if det > 0.0 { 1 } else { -1 })));
        }
        let Some(step) = jac.lu().solve(&(-f)) else {
            return Ok(None);
        };
        let len = step.norm();
        let damp = if len > 0.5 { 0.5 / len } else { 1.0 };
        for c in 0..3 {
            x[c] += damp * step[c];
        }
    }
    Ok(None)
}

/// Preimage count, retrying over [`ORACLE_DIRECTIONS`] until one is regular.
pub fn preimage_degree(curve: &LoopR4, surface: &TorusSurface, grid: DegreeGrid) -> Result<i64> {
    for dir in ORACLE_DIRECTIONS {
        match preimage_degree_oracle(curve, surface, &Vec4::from(dir), grid) {
            Err(Error::NonRegular) => continue,
            other => return other,
        }
    }
    Err(Error::NonRegular)
}

/// The small circle (a + ρ cos s, 0, b + ρ sin s, 0) linking T_{a,b} once.
pub fn meridian(torus: &CliffordTorus, rho: f64) -> Result<LoopR4> {
    if !(rho > 0.0 && rho < torus.a.min(torus.b)) {
        return Err(Error::InvalidInput(format!(
            "meridian radius must lie in (0, {}), got {rho}",
            torus.a.min(torus.b)
        )));
    }
    Ok(LoopR4::Circle {
        center: vec4(torus.a, 0.0, torus.b, 0.0),
        u: vec4(rho, 0.0, 0.0, 0.0),
        v: vec4(0.0, 0.0, rho, 0.0),
    })
}

/// Linking number of T with the push-off C + εJ₀(Ċ/|Ċ|) of the curve
/// (a e^{i n1 t}, b e^{i n2 t}).
pub fn linking_class_eval(
    torus: &CliffordTorus,
    n1: i64,
    n2: i64,
    eps: f64,
    grid: DegreeGrid,
) -> Result<DegreeResult> {
    let limit = torus.a.min(torus.b) / 2.0;
    if !(eps.abs() > 0.0 && eps.abs() < limit) {
        return Err(Error::InvalidInput(format!(
            "push-off distance must satisfy 0 < |eps| < {limit}, got {eps}"
        )));
    }
    let curve = basis_curve(torus, n1, n2)?.push_off(eps);
    gauss_linking(&curve, &TorusSurface::Clifford(*torus), grid)
}
