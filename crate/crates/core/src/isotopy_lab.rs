//! Simulated isotopies of Lagrangian tori and their monodromies on H₁.
//!
//! Case 1 flows a Clifford torus by the Hamiltonian rotation
//! H = (π/2)(x₂y₁ − x₁y₂). Case 2 drags a thin normal-disc-bundle torus around
//! a circle rotated by Ψ_s, carrying its fiber frame by projection onto the
//! symplectic normal planes. The tube is modelled at leading order in ε.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{
    basis_curve, complex_windings, j0, omega, tangent_line, transport_step, uniform_grid, vec4,
    CliffordTorus, LoopR4, Vec4, ON_TORUS_TOLERANCE,
};
use crate::gl2z::{H1Class, Mat2Z};
use crate::maslov::{framing_index, make_m_framing, Framing};
use crate::phase::winding_of_angles;

pub const DEFAULT_ODE_STEP: f64 = 1.0 / 1024.0;
pub const MIN_NS: usize = 512;
pub const MIN_NT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FlowField {
    /// X = J₀∇H for H = (π/2)(x₂y₁ − x₁y₂).
    Rotation,
    /// H multiplied by a smooth radial bump equal to 1 on |p| ≤ inner and
    /// 0 on |p| ≥ outer.
    CutoffRotation { inner: f64, outer: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub field: FlowField,
    /// RK4 step in s.
    pub step: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec {
            field: FlowField::Rotation,
            step: DEFAULT_ODE_STEP,
        }
    }
}

impl FlowSpec {
    fn validate(&self) -> Result<()> {
        // The field rotates at angular speed π/2.
        if !(self.step > 0.0 && FRAC_PI_2 * self.step < FRAC_PI_8) {
            return Err(Error::InvalidInput(format!(
                "ODE step {} rotates by π/8 or more per step",
                self.step
            )));
        }
        if let FlowField::CutoffRotation { inner, outer } = self.field {
            if !(inner > 0.0 && outer > inner && outer.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "cutoff radii must satisfy 0 < inner < outer, got {inner}, {outer}"
                )));
            }
        }
        Ok(())
    }
}

pub fn hamiltonian(p: &Vec4) -> f64 {
    FRAC_PI_2 * (p[2] * p[1] - p[0] * p[3])
}

fn rotation_field(p: &Vec4) -> Vec4 {
    FRAC_PI_2 * vec4(-p[2], -p[3], p[0], p[1])
}

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1, with its derivative.
fn smooth_step(x: f64) -> (f64, f64) {
    let bump = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let dbump = |y: f64| if y > 0.0 { (-1.0 / y).exp() / (y * y) } else { 0.0 };
    let (u, v) = (bump(x), bump(1.0 - x));
    let s = u + v;
    (u / s, (dbump(x) * v + u * dbump(1.0 - x)) / (s * s))
}

fn field(spec: &FlowField, p: &Vec4) -> Vec4 {
    match *spec {
        FlowField::Rotation => rotation_field(p),
        FlowField::CutoffRotation { inner, outer } => {
            let r2 = p.norm_squared();
            let (i2, o2) = (inner * inner, outer * outer);
            // χ(r²) = 1 − step((r² − i²)/(o² − i²)).
            let (st, dst) = smooth_step((r2 - i2) / (o2 - i2));
            let chi = 1.0 - st;
            let dchi = -dst / (o2 - i2);
            rotation_field(p) * chi + j0(&(p * 2.0)) * (hamiltonian(p) * dchi)
        }
    }
}

fn rk4_step(spec: &FlowField, p: &Vec4, h: f64) -> Vec4 {
    let k1 = field(spec, p);
    let k2 = field(spec, &(p + k1 * (h / 2.0)));
    let k3 = field(spec, &(p + k2 * (h / 2.0)));
    let k4 = field(spec, &(p + k3 * h));
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Points of the RK4 trajectory from p0 up to time s, endpoints included.
pub fn flow_trajectory(spec: &FlowSpec, p0: &Vec4, s: f64) -> Result<Vec<Vec4>> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidInput(format!("flow time must lie in [0, 1], got {s}")));
    }
    let steps = (s / spec.step).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*p0);
    if steps == 0 {
        return Ok(out);
    }
    let h = s / steps as f64;
    let mut p = *p0;
    for _ in 0..steps {
        p = rk4_step(&spec.field, &p, h);
        out.push(p);
    }
    Ok(out)
}

/// Time-s map of the flow, by RK4.
pub fn hamiltonian_flow(spec: &FlowSpec, p0: &Vec4, s: f64) -> Result<Vec4> {
    Ok(*flow_trajectory(spec, p0, s)?.last().expect("trajectory is never empty"))
}

/// Closed form of the uncut flow: (z₁, z₂) ↦ (cos(πs/2)z₁ − sin(πs/2)z₂, sin(πs/2)z₁ + cos(πs/2)z₂).
pub fn rotation_closed_form(p: &Vec4, s: f64) -> Vec4 {
    let (c, si) = ((FRAC_PI_2 * s).cos(), (FRAC_PI_2 * s).sin());
    vec4(
        c * p[0] - si * p[2],
        c * p[1] - si * p[3],
        si * p[0] + c * p[2],
        si * p[1] + c * p[3],
    )
}

/// Largest |H(p(s)) − H(p0)| along the trajectory.
pub fn hamiltonian_drift(spec: &FlowSpec, p0: &Vec4, s: f64) -> Result<f64> {
    let h0 = hamiltonian(p0);
    Ok(flow_trajectory(spec, p0, s)?
        .iter()
        .map(|p| (hamiltonian(p) - h0).abs())
        .fold(0.0, f64::max))
}

/// |ω(DΦu, DΦv) − ω(u, v)| with the differential DΦ of the time-s map taken
/// by central differences.
pub fn flow_symplectic_defect(spec: &FlowSpec, p0: &Vec4, u: &Vec4, v: &Vec4, s: f64) -> Result<f64> {
    let h = 1e-5;
    let push = |w: &Vec4| -> Result<Vec4> {
        let fwd = hamiltonian_flow(spec, &(p0 + w * h), s)?;
        let back = hamiltonian_flow(spec, &(p0 - w * h), s)?;
        Ok((fwd - back) / (2.0 * h))
    };
    Ok((omega(&push(u)?, &push(v)?) - omega(u, v)).abs())
}

/// Ψ_s, the rotation by πs in the (x₁, y₂)-plane.
pub fn psi_matrix(s: f64) -> Matrix4<f64> {
    let (c, si) = ((PI * s).cos(), (PI * s).sin());
    Matrix4::new(
        c, 0.0, 0.0, -si, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        si, 0.0, 0.0, c,
    )
}

pub fn psi(s: f64, p: &Vec4) -> Vec4 {
    psi_matrix(s) * p
}

/// A pair of standard basis vectors whose ω-pairing Ψ_s fails to preserve,
/// with the defect.
pub fn psi_symplectic_witness(s: f64) -> Option<(usize, usize, f64)> {
    let m = psi_matrix(s);
    for i in 0..4 {
        for j in i + 1..4 {
            let (u, v) = (Vec4::ith(i, 1.0), Vec4::ith(j, 1.0));
            let defect = (omega(&(m * u), &(m * v)) - omega(&u, &v)).abs();
            if defect > 1e-6 {
                return Some((i, j, defect));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_winding_residual: f64,
    /// Largest radial deviation of the read-out curves from the target torus.
    pub max_torus_deviation: f64,
    pub frame_closure_error: Option<f64>,
    pub ode_step: Option<f64>,
    pub flow_endpoint_error: Option<f64>,
    /// Smallest norm of a per-step frame projection (1 means no rotation).
    pub min_transport_projection: Option<f64>,
    pub ns: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotopyReport {
    pub monodromy: Mat2Z,
    /// Images of γ₁ and γ₂.
    pub class_images: (H1Class, H1Class),
    pub diagnostics: Diagnostics,
}

impl IsotopyReport {
    fn from_matrix(monodromy: Mat2Z, diagnostics: Diagnostics) -> Self {
        let (c1, c2) = monodromy.columns();
        IsotopyReport {
            monodromy,
            class_images: (c1, c2),
            diagnostics,
        }
    }

    /// The report of running `self` and then `next`.
    pub fn then(&self, next: &IsotopyReport) -> Result<IsotopyReport> {
        let m = next.monodromy.checked_mul(&self.monodromy)?;
        let (a, b) = (&self.diagnostics, &next.diagnostics);
        let max_opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        let diagnostics = Diagnostics {
            max_winding_residual: a.max_winding_residual.max(b.max_winding_residual),
            max_torus_deviation: a.max_torus_deviation.max(b.max_torus_deviation),
            frame_closure_error: max_opt(a.frame_closure_error, b.frame_closure_error),
            ode_step: max_opt(a.ode_step, b.ode_step),
            flow_endpoint_error: max_opt(a.flow_endpoint_error, b.flow_endpoint_error),
            min_transport_projection: match (a.min_transport_projection, b.min_transport_projection) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            ns: a.ns.max(b.ns),
            nt: a.nt.max(b.nt),
        };
        Ok(IsotopyReport::from_matrix(m, diagnostics))
    }
}

/// Class of a closed curve on a torus along with its winding residual.
fn read_class(points: &[Vec4], torus: &CliffordTorus) -> Result<(H1Class, f64, f64)> {
    let tolerance = ON_TORUS_TOLERANCE * torus.a.max(torus.b).max(1.0);
    let deviation = torus.deviation(points);
    if !(deviation <= tolerance) {
        return Err(Error::OffTorus {
            deviation,
            tolerance,
        });
    }
    let (w1, w2) = complex_windings(points)?;
    Ok((
        H1Class::new(w1.turns, w2.turns),
        w1.residual.max(w2.residual),
        deviation,
    ))
}

/// Flow the γ₁ and γ₂ cycles of T_{b,b} to s = 1 and read their classes.
pub fn simulate_case1(b: f64, n: usize) -> Result<IsotopyReport> {
    simulate_case1_with(&FlowSpec::default(), b, n)
}

pub fn simulate_case1_with(spec: &FlowSpec, b: f64, n: usize) -> Result<IsotopyReport> {
    let torus = CliffordTorus::new(b, b)?;
    if n < MIN_NT {
        return Err(Error::InvalidInput(format!("case 1 needs at least {MIN_NT} samples, got {n}")));
    }
    let mut diag = Diagnostics {
        ode_step: Some(spec.step),
        ns: (1.0 / spec.step).ceil() as usize,
        nt: n,
        ..Diagnostics::default()
    };
    let mut endpoint: f64 = 0.0;
    let mut classes = Vec::new();
    for (n1, n2) in [(1, 0), (0, 1)] {
        let start = basis_curve(&torus, n1, n2)?.points(n);
        let image = start
            .iter()
            .map(|p| hamiltonian_flow(spec, p, 1.0))
            .collect::<Result<Vec<_>>>()?;
        for (p, q) in start.iter().zip(&image) {
            endpoint = endpoint.max((q - rotation_closed_form(p, 1.0)).norm());
        }
        let (class, residual, deviation) = read_class(&image, &torus)?;
        diag.max_winding_residual = diag.max_winding_residual.max(residual);
        diag.max_torus_deviation = diag.max_torus_deviation.max(deviation);
        classes.push(class);
    }
    diag.flow_endpoint_error = Some(endpoint);
    Ok(IsotopyReport::from_matrix(
        Mat2Z::from_columns(classes[0], classes[1]),
        diag,
    ))
}

/// Core circle of the case-2 construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoreCircle {
    /// (0, 0, r cos t, r sin t).
    Z2Plane(f64),
    /// (r cos t, r sin t, 0, 0).
    Z1Plane(f64),
}

impl CoreCircle {
    fn radius(&self) -> f64 {
        match *self {
            CoreCircle::Z2Plane(r) | CoreCircle::Z1Plane(r) => r,
        }
    }

    pub fn curve(&self) -> LoopR4 {
        let r = self.radius();
        match self {
            CoreCircle::Z2Plane(_) => LoopR4::Circle {
                center: Vec4::zeros(),
                u: vec4(0.0, 0.0, r, 0.0),
                v: vec4(0.0, 0.0, 0.0, r),
            },
            CoreCircle::Z1Plane(_) => LoopR4::Circle {
                center: Vec4::zeros(),
                u: vec4(r, 0.0, 0.0, 0.0),
                v: vec4(0.0, r, 0.0, 0.0),
            },
        }
    }

    /// e₁ at s = 0: a constant unit vector spanning, with J₀e₁, the normal plane.
    fn seed(&self) -> Vec4 {
        match self {
            CoreCircle::Z2Plane(_) => vec4(1.0, 0.0, 0.0, 0.0),
            CoreCircle::Z1Plane(_) => vec4(0.0, 0.0, 1.0, 0.0),
        }
    }

    /// The torus swept by the ε-tube at s = 0.
    fn tube_torus(&self, eps: f64) -> Result<CliffordTorus> {
        match *self {
            CoreCircle::Z2Plane(r) => CliffordTorus::new(eps, r),
            CoreCircle::Z1Plane(r) => CliffordTorus::new(r, eps),
        }
    }
}

/// Frame e₁(s, t) transported across s, on the grid t_j = 2πj/nt,
/// s_k = k/ns.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeTransport {
    pub core: CoreCircle,
    pub ns: usize,
    pub nt: usize,
    pub t: Vec<f64>,
    /// e₁ at s = 0.
    pub start: Vec<Vec4>,
    /// e₁ at s = 1.
    pub end: Vec<Vec4>,
    pub min_projection: f64,
}

impl TubeTransport {
    /// C₁ = Ψ₁(C₀).
    pub fn end_curve(&self) -> LoopR4 {
        self.core.curve().mapped(psi_matrix(1.0))
    }
}

/// Carry e₁ along s ↦ Ψ_s(C₀) by projection onto the symplectic normal plane
/// of Ψ_s(Ċ₀) at each step. ns = 0 is the identity transport.
pub fn transport_tube_frame(core: CoreCircle, ns: usize, nt: usize) -> Result<TubeTransport> {
    if !(core.radius() > 0.0 && core.radius().is_finite()) {
        return Err(Error::InvalidInput(format!(
            "core radius must be positive, got {}",
            core.radius()
        )));
    }
    if nt < crate::geometry::MIN_LOOP_SAMPLES {
        return Err(Error::InvalidInput(format!("too few t samples: {nt}")));
    }
    let curve = core.curve();
    let t = uniform_grid(nt);
    let velocities: Vec<Vec4> = t.iter().map(|&tj| curve.velocity(tj)).collect();
    let seed = core.seed();
    let start = vec![seed; nt];
    let mut end = start.clone();
    let mut min_projection: f64 = 1.0;
    let min_allowed = FRAC_PI_8.cos();
    for k in 1..=ns {
        let m = psi_matrix(k as f64 / ns as f64);
        for (e, v) in end.iter_mut().zip(&velocities) {
            let line = tangent_line(&(m * v))?;
            let projected = crate::geometry::project_normal(e, &line).norm();
            min_projection = min_projection.min(projected);
            if projected < min_allowed {
                return Err(Error::Degenerate(format!(
                    "frame rotates by more than π/8 in one s step (projection {projected:.3}); refine ns"
                )));
            }
            *e = transport_step(e, &line)?;
        }
    }
    Ok(TubeTransport {
        core,
        ns,
        nt,
        t,
        start,
        end,
        min_projection,
    })
}

/// Points of the θ-cycle (t = 0) and the t-cycle (θ = 0), n samples each,
/// of the tube C(t) + ε(cos θ e₁ + sin θ J₀e₁).
fn tube_cycles(curve: &LoopR4, t: &[f64], e1: &[Vec4], eps: f64) -> (Vec<Vec4>, Vec<Vec4>) {
    let c0 = curve.point(t[0]);
    let theta_cycle = uniform_grid(t.len())
        .iter()
        .map(|&th| c0 + (e1[0] * th.cos() + j0(&e1[0]) * th.sin()) * eps)
        .collect();
    let t_cycle = t
        .iter()
        .zip(e1)
        .map(|(&tj, e)| curve.point(tj) + e * eps)
        .collect();
    (theta_cycle, t_cycle)
}

fn simulate_tube(core: CoreCircle, eps: f64, ns: usize, nt: usize) -> Result<IsotopyReport> {
    if ns < MIN_NS || nt < MIN_NT {
        return Err(Error::InvalidInput(format!(
            "tube transport needs ns ≥ {MIN_NS} and nt ≥ {MIN_NT}, got {ns} and {nt}"
        )));
    }
    if !(eps > 0.0 && eps <= core.radius() / 20.0) {
        return Err(Error::InvalidInput(format!(
            "tube radius must satisfy 0 < eps ≤ r/20, got eps = {eps}, r = {}",
            core.radius()
        )));
    }
    let torus = core.tube_torus(eps)?;
    let tr = transport_tube_frame(core, ns, nt)?;
    let mut diag = Diagnostics {
        ns,
        nt,
        min_transport_projection: Some(tr.min_projection),
        ..Diagnostics::default()
    };
    let mut basis = |curve: &LoopR4, e1: &[Vec4]| -> Result<Mat2Z> {
        let (theta, tc) = tube_cycles(curve, &tr.t, e1, eps);
        let (a, ra, da) = read_class(&theta, &torus)?;
        let (b, rb, db) = read_class(&tc, &torus)?;
        diag.max_winding_residual = diag.max_winding_residual.max(ra).max(rb);
        diag.max_torus_deviation = diag.max_torus_deviation.max(da).max(db);
        Ok(Mat2Z::from_columns(a, b))
    };
    let b0 = basis(&core.curve(), &tr.start)?;
    let b1 = basis(&tr.end_curve(), &tr.end)?;
    // Continuity of e₁ in t at s = 1, including the wrap-around step.
    let closure = (0..nt)
        .map(|j| (tr.end[(j + 1) % nt] - tr.end[j]).norm())
        .fold(0.0, f64::max);
    diag.frame_closure_error = Some(closure);
    let monodromy = b1.checked_mul(&b0.inverse()?)?;
    Ok(IsotopyReport::from_matrix(monodromy, diag))
}

/// Normal-disc-bundle torus around C₀ = (0, 0, b cos t, b sin t), dragged by Ψ_s.
pub fn simulate_case2(b: f64, eps: f64, ns: usize, nt: usize) -> Result<IsotopyReport> {
    simulate_tube(CoreCircle::Z2Plane(b), eps, ns, nt)
}

/// The same construction around C₀ = (a cos t, a sin t, 0, 0).
pub fn simulate_case2_variant(a: f64, eps: f64, ns: usize, nt: usize) -> Result<IsotopyReport> {
    simulate_tube(CoreCircle::Z1Plane(a), eps, ns, nt)
}

/// μ_{C₁}(transported σ⁰) − μ_{C₁}(σ⁰₁), where σ⁰ is a 0-framing of C₀
/// carried to s = 1 in the coordinates of the transported frame.
pub fn framing_defect_mod4(core: CoreCircle, ns: usize, nt: usize) -> Result<i64> {
    let tr = transport_tube_frame(core, ns, nt)?;
    let c0 = core.curve();
    let sigma0 = make_m_framing(&c0, 0, nt)?;
    let carried: Vec<Vec4> = sigma0
        .sigma
        .iter()
        .zip(tr.start.iter().zip(&tr.end))
        .map(|(s, (e0, e1))| {
            let (x, y) = (s.dot(e0), s.dot(&j0(e0)));
            e1 * x + j0(e1) * y
        })
        .collect();
    let c1 = if ns == 0 { c0 } else { tr.end_curve() };
    let carried = Framing::new(&c1, carried)?;
    let fresh = make_m_framing(&c1, 0, nt)?;
    Ok(framing_index(&c1, &carried)?.value() - framing_index(&c1, &fresh)?.value())
}

/// Transport γ₁, γ₂ along a path of Clifford tori by rescaling radii.
pub fn clifford_path_transport(path: &[(f64, f64)], n: usize) -> Result<IsotopyReport> {
    let Some(&(a0, b0)) = path.first() else {
        return Err(Error::InvalidInput("empty Clifford path".into()));
    };
    if let Some(&(a, b)) = path.iter().find(|(a, b)| !(*a > 0.0 && *b > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "Clifford path radii must stay positive, got ({a}, {b})"
        )));
    }
    if n < crate::geometry::MIN_LOOP_SAMPLES {
        return Err(Error::InvalidInput(format!("too few samples: {n}")));
    }
    let start = CliffordTorus::new(a0, b0)?;
    let mut curves: Vec<Vec<Vec4>> = vec![
        basis_curve(&start, 1, 0)?.points(n),
        basis_curve(&start, 0, 1)?.points(n),
    ];
    let mut prev = (a0, b0);
    for &(a, b) in &path[1..] {
        let (ka, kb) = (a / prev.0, b / prev.1);
        for c in curves.iter_mut() {
            for p in c.iter_mut() {
                *p = vec4(ka * p[0], ka * p[1], kb * p[2], kb * p[3]);
            }
        }
        prev = (a, b);
    }
    let target = CliffordTorus::new(prev.0, prev.1)?;
    let mut diag = Diagnostics {
        ns: path.len(),
        nt: n,
        ..Diagnostics::default()
    };
    let mut classes = Vec::new();
    for c in &curves {
        let (class, residual, deviation) = read_class(c, &target)?;
        diag.max_winding_residual = diag.max_winding_residual.max(residual);
        diag.max_torus_deviation = diag.max_torus_deviation.max(deviation);
        classes.push(class);
    }
    Ok(IsotopyReport::from_matrix(
        Mat2Z::from_columns(classes[0], classes[1]),
        diag,
    ))
}

/// A torus self-map (θ, t) ↦ (f, g) sampled at θ_i = 2πi/n_theta,
/// t_j = 2πj/n_t, stored at [i·n_t + j]. Values are angles mod 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMapSamples {
    n_theta: usize,
    n_t: usize,
    values: Vec<(f64, f64)>,
}

impl TorusMapSamples {
    pub fn new(n_theta: usize, n_t: usize, values: Vec<(f64, f64)>) -> Result<Self> {
        if n_theta < 3 || n_t < 3 || values.len() != n_theta * n_t {
            return Err(Error::InvalidInput(format!(
                "torus map needs an n_theta x n_t grid with both sizes ≥ 3, got {n_theta}x{n_t} and {} values",
                values.len()
            )));
        }
        if values.iter().any(|(f, g)| !f.is_finite() || !g.is_finite()) {
            return Err(Error::InvalidInput("torus map values must be finite".into()));
        }
        Ok(TorusMapSamples {
            n_theta,
            n_t,
            values,
        })
    }

    pub fn from_fn(n_theta: usize, n_t: usize, map: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        let (th, t) = (uniform_grid(n_theta), uniform_grid(n_t));
        let values = th
            .iter()
            .flat_map(|&a| t.iter().map(move |&b| (a, b)))
            .map(|(a, b)| map(a, b))
            .collect();
        Self::new(n_theta, n_t, values)
    }

    /// Build from (θ, t, f, g) rows covering a full uniform grid in any order.
    pub fn from_rows(rows: &[(f64, f64, f64, f64)]) -> Result<Self> {
        let count = |sel: fn(&(f64, f64, f64, f64)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(sel).collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
            v.len()
        };
        let (n_theta, n_t) = (count(|r| r.0), count(|r| r.1));
        if n_theta * n_t != rows.len() {
            return Err(Error::InvalidInput(format!(
                "map rows do not form a full grid ({n_theta} theta values, {n_t} t values, {} rows)",
                rows.len()
            )));
        }
        let index = |x: f64, n: usize| -> Result<usize> {
            let u = x / TAU * n as f64;
            if !(0.0..TAU).contains(&x) || (u - u.round()).abs() > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "parameter {x} is not on the uniform {n}-point grid over [0, 2π)"
                )));
            }
            Ok(u.round() as usize % n)
        };
        let mut values = vec![None; rows.len()];
        for &(th, t, f, g) in rows {
            let k = index(th, n_theta)? * n_t + index(t, n_t)?;
            if values[k].replace((f, g)).is_some() {
                return Err(Error::InvalidInput(format!("duplicate map sample at ({th}, {t})")));
            }
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidInput("map grid has missing samples".into()))?;
        Self::new(n_theta, n_t, values)
    }
}

/// Induced map on H₁ of a sampled torus self-map: the columns are the
/// winding vectors of the images of the θ-cycle and the t-cycle.
pub fn induced_h1_map(map: &TorusMapSamples) -> Result<Mat2Z> {
    let column = |cycle: Vec<(f64, f64)>| -> Result<H1Class> {
        let (f, g): (Vec<f64>, Vec<f64>) = cycle.into_iter().unzip();
        Ok(H1Class::new(winding_of_angles(&f)?.turns, winding_of_angles(&g)?.turns))
    };
    let theta_cycle = (0..map.n_theta).map(|i| map.values[i * map.n_t]).collect();
    let t_cycle = (0..map.n_t).map(|j| map.values[j]).collect();
    let m = Mat2Z::from_columns(column(theta_cycle)?, column(t_cycle)?);
    m.unimodular_det()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy_groups::{classify, make_f, GroupTag};
    use proptest::prelude::*;

    fn in_gmu(m: &Mat2Z) -> bool {
        matches!(classify(m).unwrap(), GroupTag::GmuPlus | GroupTag::GmuMinus)
    }

    #[test]
    fn flow_examples() {
        let spec = FlowSpec::default();
        let p = vec4(0.3, -0.7, 1.1, 0.2);
        assert_eq!(hamiltonian_flow(&spec, &p, 0.0).unwrap(), p);
        let q = hamiltonian_flow(&spec, &vec4(1.0, 0.0, 1.0, 0.0), 1.0).unwrap();
        assert!((q - vec4(-1.0, 0.0, 1.0, 0.0)).norm() < 1e-8);
        let h = hamiltonian_flow(&spec, &p, 0.5).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = vec4(r * (p[0] - p[2]), r * (p[1] - p[3]), r * (p[0] + p[2]), r * (p[1] + p[3]));
        assert!((h - expect).norm() < 1e-8);
    }

    #[test]
    fn field_is_j0_gradient() {
        let p = vec4(0.4, 1.2, -0.3, 0.9);
        let grad = FRAC_PI_2 * vec4(-p[3], p[2], p[1], -p[0]);
        assert!((rotation_field(&p) - j0(&grad)).norm() < 1e-14);
    }

    #[test]
    fn coarse_step_rejected() {
        let spec = FlowSpec {
            step: 0.5,
            ..FlowSpec::default()
        };
        assert!(hamiltonian_flow(&spec, &Vec4::zeros(), 1.0).is_err());
    }

    #[test]
    fn case1_is_f1() {
        let r = simulate_case1(1.0, 256).unwrap();
        assert_eq!(r.monodromy, make_f(1).unwrap());
        assert_eq!(r.class_images, (H1Class::new(0, 1), H1Class::new(1, 0)));
        assert!(r.diagnostics.flow_endpoint_error.unwrap() < 1e-8);
        assert!(in_gmu(&r.monodromy));
        let twice = r.then(&r).unwrap();
        assert_eq!(twice.monodromy, Mat2Z::IDENTITY);
    }

    #[test]
    fn case1_cutoff_agrees() {
        let spec = FlowSpec {
            field: FlowField::CutoffRotation { inner: 2.0, outer: 3.0 },
            ..FlowSpec::default()
        };
        let r = simulate_case1_with(&spec, 1.0, 256).unwrap();
        assert_eq!(r.monodromy, make_f(1).unwrap());
        // Outside the support nothing moves.
        let far = vec4(3.0, 1.0, 0.5, -2.0);
        assert!((hamiltonian_flow(&spec, &far, 1.0).unwrap() - far).norm() < 1e-15);
    }

    #[test]
    fn case2_is_f0() {
        let r = simulate_case2(1.0, 0.05, 1024, 256).unwrap();
        assert_eq!(r.monodromy, make_f(0).unwrap());
        assert_eq!(r.class_images.1, H1Class::new(2, -1));
        assert!(in_gmu(&r.monodromy));
        assert!(r.diagnostics.max_winding_residual < 0.05);
        let fine = simulate_case2(1.0, 0.05, 2048, 512).unwrap();
        assert_eq!(fine.monodromy, r.monodromy);
    }

    #[test]
    fn case2_core_returns_reversed() {
        let tr = transport_tube_frame(CoreCircle::Z2Plane(1.0), 512, 64).unwrap();
        let (c0, c1) = (CoreCircle::Z2Plane(1.0).curve(), tr.end_curve());
        for &t in &tr.t {
            assert!((c1.point(t) - c0.point(-t)).norm() < 1e-12);
        }
    }

    #[test]
    fn case2_variant_is_f2() {
        let r = simulate_case2_variant(1.0, 0.05, 1024, 256).unwrap();
        let f2 = make_f(2).unwrap();
        assert_eq!(r.monodromy, f2);
        assert_eq!(classify(&r.monodromy).unwrap(), GroupTag::GmuMinus);
        let f1 = make_f(1).unwrap();
        assert_eq!(f1 * f2 * f1, make_f(0).unwrap());
        let fine = simulate_case2_variant(1.0, 0.05, 2048, 512).unwrap();
        assert_eq!(fine.monodromy, r.monodromy);
    }

    #[test]
    fn case2_grid_minimums() {
        assert!(simulate_case2(1.0, 0.05, 256, 256).is_err());
        assert!(simulate_case2(1.0, 0.05, 1024, 128).is_err());
        assert!(simulate_case2(1.0, 0.2, 1024, 256).is_err());
    }

    #[test]
    fn framing_defects_divisible_by_four() {
        assert_eq!(framing_defect_mod4(CoreCircle::Z2Plane(1.0), 0, 256).unwrap(), 0);
        for core in [CoreCircle::Z2Plane(1.0), CoreCircle::Z1Plane(1.0)] {
            let d = framing_defect_mod4(core, 1024, 256).unwrap();
            assert_eq!(d.rem_euclid(4), 0, "{core:?}: {d}");
        }
    }

    #[test]
    fn clifford_paths_are_trivial() {
        for path in [
            vec![(1.0, 1.0); 5],
            (0..=32).map(|k| (1.0 + k as f64 / 32.0, 1.0 + 2.0 * k as f64 / 32.0)).collect(),
            vec![(1.0, 1.0), (2.0, 0.5), (0.3, 4.0), (1.0, 1.0)],
        ] {
            let r = clifford_path_transport(&path, 128).unwrap();
            assert_eq!(r.monodromy, Mat2Z::IDENTITY);
            assert!(in_gmu(&r.monodromy));
        }
        assert!(clifford_path_transport(&[(1.0, 1.0), (0.0, 1.0)], 128).is_err());
    }

    #[test]
    fn torus_map_readouts() {
        let cases: [(fn(f64, f64) -> (f64, f64), Mat2Z); 3] = [
            (|th, t| (th + 2.0 * t, t), Mat2Z::new(1, 2, 0, 1)),
            (|th, t| (-th, t), Mat2Z::new(-1, 0, 0, 1)),
            (|th, t| (t, th), Mat2Z::new(0, 1, 1, 0)),
        ];
        for (f, m) in cases {
            let s = TorusMapSamples::from_fn(64, 64, f).unwrap();
            assert_eq!(induced_h1_map(&s).unwrap(), m);
        }
    }

    #[test]
    fn psi_is_isometric_but_not_symplectic() {
        let (i, j, d) = psi_symplectic_witness(0.5).unwrap();
        assert_eq!((i, j), (0, 1));
        assert!((d - 1.0).abs() < 1e-12);
        let p = vec4(0.3, -1.2, 0.8, 2.0);
        for k in 0..=8 {
            assert!((psi(k as f64 / 8.0, &p).norm() - p.norm()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn flow_conserves_h_and_omega(
            p in prop::array::uniform4(-2.0f64..2.0),
            u in prop::array::uniform4(-1.0f64..1.0),
            v in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let spec = FlowSpec::default();
            let p = Vec4::from(p);
            prop_assert!(hamiltonian_drift(&spec, &p, 1.0).unwrap() <= 1e-8);
            let d = flow_symplectic_defect(&spec, &p, &Vec4::from(u), &Vec4::from(v), 1.0).unwrap();
            prop_assert!(d <= 1e-6);
        }
    }
}
