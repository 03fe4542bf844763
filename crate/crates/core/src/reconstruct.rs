//! Surfaces of the classification, built in closed form or by integrating
//! the Gauss–Weingarten moving-frame equations from constant data.
//!
//! Along the flow of a frame field E_a the flat derivatives are
//!
//!   dp/ds   = E_a,
//!   dE_B/ds = Σ_C C_a[B][C] E_C − c⟨E_a^M, E_B^M⟩ p_M,
//!
//! where C_a packs Γ, the shape operators and the normal connection.

use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::{
    axis, product_curvature, spaceform_circle, AmbientPoint, ProductAmbient, SpaceForm,
};
use crate::error::{Error, Result};
use crate::frenet::CurveKind;
use crate::sampled::{Axis, Provenance, SampledImmersion, DEFAULT_STENCIL_DEGREE};
use crate::surface::{Family, ImmersionSpec};
use crate::tensor::{axpy, Mat2};

/// Largest compatibility residual accepted by the integrator.
pub const COMPATIBILITY_GATE: f64 = 1e-8;
/// Largest frame or on-manifold drift accepted after integration.
pub const DRIFT_LIMIT: f64 = 1e-6;
/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 0.005;
/// Default spacing of grid nodes.
pub const DEFAULT_SPACING: f64 = 0.05;

/// Constant Gauss–Weingarten data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameOdeData {
    pub ambient: ProductAmbient,
    pub codim: usize,
    /// A_α in the basis (E₁, E₂).
    pub shape: Vec<Mat2>,
    /// gamma[a][b][c] = ⟨∇_{E_a}E_b, E_c⟩.
    pub gamma: [[[f64; 2]; 2]; 2],
    /// omega[a][α][β] = ⟨∇⊥_{E_a}E_α, E_β⟩.
    pub omega: [Vec<Vec<f64>>; 2],
    /// Components of ξ in the frame (E₁, E₂, E₃, …).
    pub xi: Vec<f64>,
    pub p0: Vec<f64>,
    pub frame0: Vec<Vec<f64>>,
}

impl FrameOdeData {
    fn rank(&self) -> usize {
        2 + self.codim
    }

    /// Frame-to-frame coefficient matrix along E_a.
    pub fn coefficients(&self, a: usize) -> Vec<Vec<f64>> {
        let m = self.rank();
        let mut k = vec![vec![0.0; m]; m];
        for b in 0..2 {
            for c in 0..2 {
                k[b][c] = self.gamma[a][b][c];
            }
            for al in 0..self.codim {
                k[b][2 + al] = self.shape[al][a][b];
                k[2 + al][b] = -self.shape[al][a][b];
            }
        }
        for al in 0..self.codim {
            for be in 0..self.codim {
                k[2 + al][2 + be] = self.omega[a][al][be];
            }
        }
        k
    }
}

/// Residuals of the structure equations on constant data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub gauss: f64,
    pub codazzi: f64,
    pub ricci: f64,
    /// |∇̄ξ| in frame components.
    pub xi_parallel: f64,
    /// Initial frame: orthonormality, tangency, ξ components, ω antisymmetry.
    pub frame: f64,
}

impl CompatibilityReport {
    pub fn max(&self) -> f64 {
        [
            self.gauss,
            self.codazzi,
            self.ricci,
            self.xi_parallel,
            self.frame,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn compatibility_check(data: &FrameOdeData) -> CompatibilityReport {
    let m = data.rank();
    let c = data.ambient.c();
    let g = &data.gamma;
    let h = |al: usize, a: usize, b: usize| data.shape[al][a][b];
    let w = &data.omega;
    let unit = |i: usize| -> Vec<f64> { (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let rbar = |x: usize, y: usize, z: usize| {
        product_curvature(c, dot, &data.xi, &unit(x), &unit(y), &unit(z))
    };

    // Intrinsic K of constant connection coefficients.
    let bracket = [0, 1].map(|cc| g[0][1][cc] - g[1][0][cc]);
    let mut k_int = 0.0;
    for kk in 0..2 {
        k_int += g[1][1][kk] * g[0][kk][0] - g[0][1][kk] * g[1][kk][0];
        k_int -= bracket[kk] * g[kk][1][0];
    }
    let mut k_ext = rbar(0, 1, 1)[0];
    for al in 0..data.codim {
        k_ext += h(al, 0, 0) * h(al, 1, 1) - h(al, 0, 1) * h(al, 1, 0);
    }
    let gauss = (k_int - k_ext).abs();

    let nabla_sigma = |a: usize, b: usize, cc: usize, be: usize| {
        let mut v = 0.0;
        for al in 0..data.codim {
            v += h(al, b, cc) * w[a][al][be];
        }
        for d in 0..2 {
            v -= g[a][b][d] * h(be, d, cc) + g[a][cc][d] * h(be, b, d);
        }
        v
    };
    let mut codazzi: f64 = 0.0;
    for cc in 0..2 {
        let r = rbar(0, 1, cc);
        for be in 0..data.codim {
            let rhs = nabla_sigma(0, 1, cc, be) - nabla_sigma(1, 0, cc, be);
            codazzi = codazzi.max((r[2 + be] - rhs).abs());
        }
    }

    let mut ricci: f64 = 0.0;
    for al in 0..data.codim {
        let r = rbar(0, 1, 2 + al);
        for be in 0..data.codim {
            let mut lhs = 0.0;
            for ga in 0..data.codim {
                lhs += w[1][al][ga] * w[0][ga][be] - w[0][al][ga] * w[1][ga][be];
            }
            for cc in 0..2 {
                lhs -= bracket[cc] * w[cc][al][be];
            }
            let mut comm = 0.0;
            for kk in 0..2 {
                comm += h(al, 1, kk) * h(be, kk, 0) - h(be, 1, kk) * h(al, kk, 0);
            }
            ricci = ricci.max((lhs - comm - r[2 + be]).abs());
        }
    }

    let mut xi_parallel: f64 = 0.0;
    for a in 0..2 {
        let k = data.coefficients(a);
        let mut v = vec![0.0; m];
        for (bb, row) in k.iter().enumerate() {
            axpy(&mut v, data.xi[bb], row);
        }
        xi_parallel = xi_parallel.max(v.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }

    let pa = &data.ambient;
    let mut frame: f64 = 0.0;
    if data.frame0.len() != m || data.xi.len() != m || data.shape.len() != data.codim {
        frame = f64::INFINITY;
    } else {
        let xi = pa.xi();
        for (i, x) in data.frame0.iter().enumerate() {
            for (j, y) in data.frame0.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                frame = frame.max((pa.inner(x, y) - want).abs());
            }
            frame = frame.max(pa.tangent_residual(&data.p0, x));
            frame = frame.max((pa.inner(x, &xi) - data.xi[i]).abs());
        }
        frame = frame.max(pa.on_manifold_residual_raw(&data.p0));
        for a in 0..2 {
            for al in 0..data.codim {
                for be in 0..data.codim {
                    frame = frame.max((w[a][al][be] + w[a][be][al]).abs());
                }
            }
            for b in 0..2 {
                for cc in 0..2 {
                    frame = frame.max((g[a][b][cc] + g[a][cc][b]).abs());
                }
            }
        }
        for al in 0..data.codim {
            frame = frame.max((h(al, 0, 1) - h(al, 1, 0)).abs());
        }
    }
    CompatibilityReport {
        gauss,
        codazzi,
        ricci,
        xi_parallel,
        frame,
    }
}

/// Position and adapted frame at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub p: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

impl FrameState {
    fn axpy(&self, s: f64, d: &FrameState) -> FrameState {
        let mut out = self.clone();
        axpy(&mut out.p, s, &d.p);
        for (x, dx) in out.frame.iter_mut().zip(&d.frame) {
            axpy(x, s, dx);
        }
        out
    }

    /// Largest deviation of the frame's Gram matrix from the identity.
    pub fn gram_drift(&self, pa: &ProductAmbient) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, x) in self.frame.iter().enumerate() {
            for (j, y) in self.frame.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((pa.inner(x, y) - want).abs());
            }
        }
        worst
    }
}

struct Flow<'a> {
    pa: &'a ProductAmbient,
    k: Vec<Vec<f64>>,
    a: usize,
}

impl Flow<'_> {
    fn rhs(&self, s: &FrameState) -> FrameState {
        let pa = self.pa;
        let c = pa.c();
        let pm = pa.m_position(&s.p);
        let ea = &s.frame[self.a];
        let frame = self
            .k
            .iter()
            .zip(&s.frame)
            .map(|(row, eb)| {
                let mut v = vec![0.0; s.p.len()];
                for (coef, ec) in row.iter().zip(&s.frame) {
                    if *coef != 0.0 {
                        axpy(&mut v, *coef, ec);
                    }
                }
                if pa.is_curved() {
                    axpy(&mut v, -c * pa.m_inner(ea, eb), &pm);
                }
                v
            })
            .collect();
        FrameState {
            p: ea.clone(),
            frame,
        }
    }

    fn rk4(&self, s: &FrameState, h: f64) -> FrameState {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&s.axpy(h / 2.0, &k1));
        let k3 = self.rhs(&s.axpy(h / 2.0, &k2));
        let k4 = self.rhs(&s.axpy(h, &k3));
        let mut out = s.axpy(h / 6.0, &k1);
        out = out.axpy(h / 3.0, &k2);
        out = out.axpy(h / 3.0, &k3);
        out.axpy(h / 6.0, &k4)
    }

    /// Advances by `length` with equal steps no longer than `max_step`.
    fn advance(&self, s: &FrameState, length: f64, max_step: f64) -> FrameState {
        if length == 0.0 {
            return s.clone();
        }
        let n = (length.abs() / max_step).ceil().max(1.0) as usize;
        let h = length / n as f64;
        let mut cur = s.clone();
        for _ in 0..n {
            cur = self.rk4(&cur, h);
        }
        cur
    }

    /// States at each of `nodes` (sorted ascending), flowing from parameter 0.
    fn along(&self, s0: &FrameState, nodes: &[f64], max_step: f64) -> Vec<FrameState> {
        let mut out = vec![s0.clone(); nodes.len()];
        let split = nodes.partition_point(|x| *x < 0.0);
        let mut cur = s0.clone();
        let mut at = 0.0;
        for i in split..nodes.len() {
            cur = self.advance(&cur, nodes[i] - at, max_step);
            at = nodes[i];
            out[i] = cur.clone();
        }
        let mut cur = s0.clone();
        let mut at = 0.0;
        for i in (0..split).rev() {
            cur = self.advance(&cur, nodes[i] - at, max_step);
            at = nodes[i];
            out[i] = cur.clone();
        }
        out
    }
}

/// Flows along E_a for parameter length `length` from `state`.
pub fn flow(
    data: &FrameOdeData,
    state: &FrameState,
    a: usize,
    length: f64,
    max_step: f64,
) -> FrameState {
    let f = Flow {
        pa: &data.ambient,
        k: data.coefficients(a),
        a,
    };
    f.advance(state, length, max_step)
}

pub fn initial_state(data: &FrameOdeData) -> FrameState {
    FrameState {
        p: data.p0.clone(),
        frame: data.frame0.clone(),
    }
}

/// Parameter grid for frame integration. Parameter 0 on both axes is the
/// initial point; both ranges must contain it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub s_range: [f64; 2],
    pub t_range: [f64; 2],
    pub spacing: f64,
    pub step: f64,
}

impl GridSpec {
    /// A grid whose interpolation interior covers [−half, half]².
    pub fn centered(half_s: f64, half_t: f64) -> Self {
        let pad = (DEFAULT_STENCIL_DEGREE / 2) as f64 * DEFAULT_SPACING;
        GridSpec {
            s_range: [-half_s - pad, half_s + pad],
            t_range: [-half_t - pad, half_t + pad],
            spacing: DEFAULT_SPACING,
            step: DEFAULT_STEP,
        }
    }

    fn axis(range: [f64; 2], spacing: f64) -> Axis {
        let count = ((range[1] - range[0]) / spacing).ceil() as usize + 1;
        Axis::new(range[0], (range[1] - range[0]) / (count - 1) as f64, count)
    }
}

/// Integrates f(s, t) = flow_{E₁}^s ∘ flow_{E₂}^t (p₀) on a grid.
pub fn integrate_frame(
    data: &FrameOdeData,
    grid: &GridSpec,
    provenance: Provenance,
) -> Result<SampledImmersion> {
    let report = compatibility_check(data);
    if report.max() > COMPATIBILITY_GATE {
        return Err(Error::Precondition(format!(
            "frame data incompatible: gauss {:.3e}, codazzi {:.3e}, ricci {:.3e}, ξ {:.3e}, frame {:.3e}",
            report.gauss, report.codazzi, report.ricci, report.xi_parallel, report.frame
        )));
    }
    for r in [grid.s_range, grid.t_range] {
        if !(r[0] <= 0.0 && r[1] >= 0.0 && r[0] < r[1]) {
            return Err(Error::Parameter("grid ranges must contain 0".into()));
        }
    }
    if !(grid.step > 0.0 && grid.step <= 0.01) {
        return Err(Error::Parameter("RK4 step must lie in (0, 0.01]".into()));
    }
    if !(grid.spacing > 0.0) {
        return Err(Error::Parameter("grid spacing must be positive".into()));
    }
    let pa = &data.ambient;
    let s_axis = GridSpec::axis(grid.s_range, grid.spacing);
    let t_axis = GridSpec::axis(grid.t_range, grid.spacing);
    let flow1 = Flow {
        pa,
        k: data.coefficients(0),
        a: 0,
    };
    let flow2 = Flow {
        pa,
        k: data.coefficients(1),
        a: 1,
    };
    let seeds = flow2.along(&initial_state(data), &t_axis.nodes(), grid.step);
    let s_nodes = s_axis.nodes();
    let row = |seed: &FrameState| flow1.along(seed, &s_nodes, grid.step);
    #[cfg(feature = "parallel")]
    let columns: Vec<Vec<FrameState>> = seeds.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let columns: Vec<Vec<FrameState>> = seeds.iter().map(row).collect();

    let mut positions = Vec::with_capacity(s_axis.count * t_axis.count);
    let mut frames = Vec::with_capacity(s_axis.count * t_axis.count);
    let mut worst = (0.0, 0, 0);
    let mut frame_drift: f64 = 0.0;
    let mut manifold_drift: f64 = 0.0;
    for i in 0..s_axis.count {
        for (j, col) in columns.iter().enumerate() {
            let st = &col[i];
            let fd = st.gram_drift(pa);
            let md = pa.on_manifold_residual_raw(&st.p);
            frame_drift = frame_drift.max(fd);
            manifold_drift = manifold_drift.max(md);
            let dd = fd.max(md);
            if !(dd <= worst.0) {
                worst = (dd, i, j);
            }
            positions.push(st.p.clone());
            frames.push(st.frame.clone());
        }
    }
    if !(worst.0 <= DRIFT_LIMIT) {
        return Err(Error::Integration {
            drift: worst.0,
            i: worst.1,
            j: worst.2,
        });
    }
    let provenance = Provenance {
        step: grid.step,
        integrator: "rk4".into(),
        frame_drift,
        manifold_drift,
        ..provenance
    };
    SampledImmersion::new(
        pa.clone(),
        s_axis,
        t_axis,
        positions,
        Some(frames),
        provenance,
    )
}

fn unit(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    v
}

fn lin(terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
    let mut v = vec![0.0; terms[0].1.len()];
    for (s, x) in terms {
        axpy(&mut v, *s, x);
    }
    v
}

fn check_t_norm(t_norm: f64) -> Result<()> {
    if !(t_norm > 0.0 && t_norm < 1.0) {
        return Err(Error::Precondition(format!(
            "|T| must lie in (0, 1), got {t_norm}"
        )));
    }
    Ok(())
}

/// Vertical cylinder over a circle of curvature 2|H|.
pub fn build_case3(c: f64, n: usize, h_norm: f64) -> Result<ImmersionSpec> {
    if c == 0.0 {
        return Err(Error::Precondition("c must be nonzero".into()));
    }
    if !(h_norm > 0.0 && h_norm.is_finite()) {
        return Err(Error::Precondition(format!(
            "|H| must be positive, got {h_norm}"
        )));
    }
    let sf = SpaceForm::new(c, n)?;
    let pa = ProductAmbient::new(sf);
    let p = AmbientPoint::new(pa.canonical_point());
    let curve = spaceform_circle(&sf, &p, &axis(&p, 1), &axis(&p, 2), 2.0 * h_norm)?;
    let CurveKind::Circle(circle) = curve.kind().clone() else {
        unreachable!("spaceform_circle returns a circle")
    };
    ImmersionSpec::closed_form(pa, Family::VerticalCylinder { circle }, "case3")
}

/// Which branch ⟨H,N⟩ = ±|H||N| the case-4 data follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HnSign {
    Plus,
    Minus,
}

pub fn case4_data(c: f64, t_norm: f64, sign: HnSign) -> Result<FrameOdeData> {
    if !(c < 0.0) {
        return Err(Error::Precondition(format!("case 4 needs c < 0, got {c}")));
    }
    check_t_norm(t_norm)?;
    let pa = ProductAmbient::with(c, 2)?;
    let n_norm = (1.0 - t_norm * t_norm).sqrt();
    let h = (-c).sqrt() * t_norm / 2.0;
    let s = if sign == HnSign::Plus { 1.0 } else { -1.0 };
    let a = 2.0 * s * h * n_norm / t_norm;
    let mut gamma = [[[0.0; 2]; 2]; 2];
    gamma[1][1][0] = -a;
    gamma[1][0][1] = a;
    let d = pa.dim();
    let (e1, e2, xi) = (unit(d, 1), unit(d, 2), pa.xi());
    let frame0 = vec![
        lin(&[(n_norm, &e1), (t_norm, &xi)]),
        e2,
        lin(&[(-s * t_norm, &e1), (s * n_norm, &xi)]),
    ];
    Ok(FrameOdeData {
        codim: 1,
        shape: vec![[[0.0, 0.0], [0.0, 2.0 * h]]],
        gamma,
        omega: [vec![vec![0.0]], vec![vec![0.0]]],
        xi: vec![t_norm, 0.0, s * n_norm],
        p0: pa.canonical_point(),
        frame0,
        ambient: pa,
    })
}

pub fn case5_data(c: f64, h_norm: f64, t_norm: f64) -> Result<FrameOdeData> {
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("case 5 needs c > 0, got {c}")));
    }
    if !(h_norm > 0.0 && h_norm.is_finite()) {
        return Err(Error::Precondition(format!(
            "|H| must be positive, got {h_norm}"
        )));
    }
    check_t_norm(t_norm)?;
    let pa = ProductAmbient::with(c, 4)?;
    let n_norm = (1.0 - t_norm * t_norm).sqrt();
    let lambda = (c * (1.0 - t_norm * t_norm)).sqrt();
    let w = t_norm / n_norm * lambda;
    let mut omega = [vec![vec![0.0; 3]; 3], vec![vec![0.0; 3]; 3]];
    // ⟨∇⊥_{E₁}E₅, E₄⟩ = (|T|/|N|)λ.
    omega[0][2][1] = w;
    omega[0][1][2] = -w;
    let d = pa.dim();
    let xi = pa.xi();
    let e = |k| unit(d, k);
    let frame0 = vec![
        lin(&[(n_norm, &e(1)), (t_norm, &xi)]),
        e(2),
        e(3),
        lin(&[(-t_norm, &e(1)), (n_norm, &xi)]),
        e(4),
    ];
    Ok(FrameOdeData {
        codim: 3,
        shape: vec![
            [[0.0, 0.0], [0.0, 2.0 * h_norm]],
            [[0.0, 0.0], [0.0, 0.0]],
            [[lambda, 0.0], [0.0, -lambda]],
        ],
        gamma: [[[0.0; 2]; 2]; 2],
        omega,
        xi: vec![t_norm, 0.0, 0.0, n_norm, 0.0],
        p0: pa.canonical_point(),
        frame0,
        ambient: pa,
    })
}

pub fn build_case4(c: f64, t_norm: f64, sign: HnSign, grid: &GridSpec) -> Result<ImmersionSpec> {
    let data = case4_data(c, t_norm, sign)?;
    let prov = Provenance {
        case: "case4".into(),
        params: vec![
            ("c".into(), c),
            ("T".into(), t_norm),
            ("sign".into(), if sign == HnSign::Plus { 1.0 } else { -1.0 }),
        ],
        ..Provenance::default()
    };
    Ok(ImmersionSpec::sampled(
        integrate_frame(&data, grid, prov)?,
        "case4",
    ))
}

pub fn build_case5(c: f64, h_norm: f64, t_norm: f64, grid: &GridSpec) -> Result<ImmersionSpec> {
    let data = case5_data(c, h_norm, t_norm)?;
    let prov = Provenance {
        case: "case5".into(),
        params: vec![("c".into(), c), ("H".into(), h_norm), ("T".into(), t_norm)],
        ..Provenance::default()
    };
    Ok(ImmersionSpec::sampled(
        integrate_frame(&data, grid, prov)?,
        "case5",
    ))
}

/// Default grids: the case-5 interior spans 2π in both directions.
pub fn default_grid(case: usize) -> GridSpec {
    match case {
        4 => GridSpec::centered(1.0, 1.0),
        _ => GridSpec::centered(PI, PI),
    }
}

/// Reference surfaces around the classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Control {
    Slice {
        c: f64,
        n: usize,
    },
    TorusHelix {
        c: f64,
        r1: f64,
        r2: f64,
        slope: f64,
    },
    CmcTorusInS3 {
        c: f64,
        r1: f64,
        r2: f64,
    },
    GeodesicSphereInSmallSphere {
        c: f64,
        rho: f64,
    },
    GraphStrip {
        c: f64,
        n: usize,
    },
}

pub fn build_control(control: Control) -> Result<ImmersionSpec> {
    match control {
        Control::Slice { c, n } => ImmersionSpec::closed_form(
            ProductAmbient::with(c, n)?,
            Family::Slice { t0: 0.0 },
            "slice",
        ),
        Control::TorusHelix { c, r1, r2, slope } => ImmersionSpec::closed_form(
            ProductAmbient::with(c, 3)?,
            Family::TorusHelix { r1, r2, slope },
            "torus_helix",
        ),
        Control::CmcTorusInS3 { c, r1, r2 } => {
            if r1 == r2 {
                return Err(Error::Parameter("cmc torus needs r₁ ≠ r₂".into()));
            }
            ImmersionSpec::closed_form(
                ProductAmbient::with(c, 3)?,
                Family::TorusHelix { r1, r2, slope: 0.0 },
                "cmc_torus",
            )
        }
        Control::GeodesicSphereInSmallSphere { c, rho } => ImmersionSpec::closed_form(
            ProductAmbient::with(c, 4)?,
            Family::SmallSphere { rho },
            "small_sphere",
        ),
        Control::GraphStrip { c, n } => ImmersionSpec::closed_form(
            ProductAmbient::with(c, n)?,
            Family::GraphStrip,
            "graph_strip",
        ),
    }
}
