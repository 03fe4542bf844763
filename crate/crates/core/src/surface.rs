//! Immersed surfaces Σ² → M^n(c)×ℝ and their pointwise geometry.
//!
//! Everything is computed from order-4 position jets: the metric and the
//! adapted frame carry order 3, the second fundamental form and the
//! connection coefficients order 2, so one more derivative (Codazzi, Ricci,
//! E_i(λ₁), E_i(K)) is still exact up to rounding.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientPoint, AmbientVector, Model, ProductAmbient};
use crate::error::{Error, Result};
use crate::frenet::CircleParams;
use crate::sampled::SampledImmersion;
use crate::tensor::{jdot, jpartial, jvalues, sym2_eigenvalues, Jet, JetVec, Mat2, MAX_ORDER};

/// Below this |T|, E₁ = T/|T| is meaningless and the frame falls back to ∂u.
pub const ANGLE_TOL: f64 = 1e-6;
/// Smallest admissible eigenvalue of the first fundamental form.
pub const RANK_TOL: f64 = 1e-8;
const ON_MANIFOLD_TOL: f64 = 1e-8;
/// Squared length a Gram–Schmidt residual needs to become a normal.
const NORMAL_ACCEPT: f64 = 0.05;
const JET_ORDER: usize = 4;

/// Closed-form parametric families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// M²(c)×{t₀} through the first three embedding axes.
    Slice { t0: f64 },
    /// The slice parametrisation lifted to height t = u.
    GraphStrip,
    /// circle(u) + v ξ.
    VerticalCylinder { circle: CircleParams },
    /// (r₁cos αs, r₁sin αs, r₂cos βt, r₂sin βt, h s) in S³(c)×ℝ.
    TorusHelix { r1: f64, r2: f64, slope: f64 },
    /// Equator of the small hypersphere at height √(r²−ρ²) in Sⁿ(c), n ≥ 3.
    SmallSphere { rho: f64 },
}

impl Family {
    fn validate(&self, pa: &ProductAmbient) -> Result<()> {
        let c = pa.c();
        match self {
            Family::Slice { t0 } if !t0.is_finite() => {
                Err(Error::Parameter("t0 must be finite".into()))
            }
            Family::Slice { .. } | Family::GraphStrip => Ok(()),
            Family::VerticalCylinder { circle } => {
                if circle.p.len() != pa.dim() || circle.c != c {
                    Err(Error::Parameter(
                        "circle does not live in this ambient".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            Family::TorusHelix { r1, r2, slope } => {
                if c <= 0.0 || pa.n() < 3 {
                    return Err(Error::Parameter(
                        "torus families need c > 0 and n ≥ 3".into(),
                    ));
                }
                if !(*r1 > 0.0 && *r2 > 0.0) {
                    return Err(Error::Parameter("torus radii must be positive".into()));
                }
                if (r1 * r1 + r2 * r2 - 1.0 / c).abs() > 1e-12 * (1.0 / c) {
                    return Err(Error::Parameter(format!(
                        "r₁² + r₂² = {} but must equal 1/c = {}",
                        r1 * r1 + r2 * r2,
                        1.0 / c
                    )));
                }
                if !(0.0..1.0).contains(slope) {
                    return Err(Error::Parameter("slope must lie in [0, 1)".into()));
                }
                Ok(())
            }
            Family::SmallSphere { rho } => {
                if c <= 0.0 || pa.n() < 3 {
                    return Err(Error::Parameter(
                        "small sphere needs c > 0 and n ≥ 3".into(),
                    ));
                }
                let r = pa.space_form().radius();
                if !(*rho > 0.0 && *rho < r) {
                    return Err(Error::Parameter(format!("ρ must lie in (0, {r})")));
                }
                Ok(())
            }
        }
    }

    fn default_domain(&self, pa: &ProductAmbient) -> ([[f64; 2]; 2], [bool; 2]) {
        let tau = std::f64::consts::TAU;
        match self {
            Family::Slice { .. } | Family::GraphStrip => match pa.space_form().model() {
                Model::Sphere => ([[0.0, tau], [-1.0, 1.0]], [true, false]),
                _ => ([[-1.0, 1.0], [-1.0, 1.0]], [false, false]),
            },
            Family::VerticalCylinder { circle } => {
                let p = circle.period();
                if p.is_finite() {
                    ([[0.0, p], [-1.0, 1.0]], [true, false])
                } else {
                    ([[-1.0, 1.0], [-1.0, 1.0]], [false, false])
                }
            }
            Family::TorusHelix { r1, r2, slope } => {
                let s_len = tau * r1 / (1.0 - slope * slope).sqrt();
                ([[0.0, s_len], [0.0, tau * r2]], [*slope == 0.0, true])
            }
            Family::SmallSphere { .. } => ([[0.0, tau], [-1.0, 1.0]], [true, false]),
        }
    }

    fn eval(&self, pa: &ProductAmbient, u: Jet, v: Jet) -> JetVec {
        let d = pa.dim();
        let last = d - 1;
        let (vars, order) = (u.vars(), u.order());
        let mut out: JetVec = vec![Jet::zero(vars, order); d];
        let slice = |out: &mut JetVec| match pa.space_form().model() {
            Model::Sphere => {
                let r = pa.space_form().radius();
                let cv = v.cos();
                out[0] = u.cos() * cv * r;
                out[1] = u.sin() * cv * r;
                out[2] = v.sin() * r;
            }
            Model::Hyperboloid => {
                let r = pa.space_form().radius();
                let cv = v.cosh();
                out[0] = u.cosh() * cv * r;
                out[1] = u.sinh() * cv * r;
                out[2] = v.sinh() * r;
            }
            Model::Flat => {
                out[0] = u;
                out[1] = v;
            }
        };
        match self {
            Family::Slice { t0 } => {
                slice(&mut out);
                out[last] = Jet::constant(vars, order, *t0);
            }
            Family::GraphStrip => {
                slice(&mut out);
                out[last] = u;
            }
            Family::VerticalCylinder { circle } => {
                out = circle.eval(&u);
                out[last] = v + circle.p[last];
            }
            Family::TorusHelix { r1, r2, slope } => {
                let alpha = (1.0 - slope * slope).sqrt() / r1;
                let beta = 1.0 / r2;
                out[0] = (u * alpha).cos() * *r1;
                out[1] = (u * alpha).sin() * *r1;
                out[2] = (v * beta).cos() * *r2;
                out[3] = (v * beta).sin() * *r2;
                out[last] = u * *slope;
            }
            Family::SmallSphere { rho } => {
                let r = pa.space_form().radius();
                let cv = v.cos();
                out[0] = Jet::constant(vars, order, (r * r - rho * rho).sqrt());
                out[1] = u.cos() * cv * *rho;
                out[2] = u.sin() * cv * *rho;
                out[3] = v.sin() * *rho;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum ImmersionKind {
    ClosedForm(Family),
    Sampled(Arc<SampledImmersion>),
}

/// Affine change of parameters x_i = scale_i · w_{π(i)} + offset_i, where π
/// swaps the two parameters when `swap` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine2 {
    pub scale: [f64; 2],
    pub offset: [f64; 2],
    pub swap: bool,
}

impl Affine2 {
    fn perm(&self, i: usize) -> usize {
        if self.swap {
            1 - i
        } else {
            i
        }
    }

    pub fn apply(&self, w: [f64; 2]) -> [f64; 2] {
        [
            self.scale[0] * w[self.perm(0)] + self.offset[0],
            self.scale[1] * w[self.perm(1)] + self.offset[1],
        ]
    }

    /// self ∘ inner.
    fn after(&self, inner: &Affine2) -> Affine2 {
        let mut out = Affine2 {
            scale: [0.0; 2],
            offset: [0.0; 2],
            swap: self.swap != inner.swap,
        };
        for i in 0..2 {
            let k = self.perm(i);
            out.scale[i] = self.scale[i] * inner.scale[k];
            out.offset[i] = self.scale[i] * inner.offset[k] + self.offset[i];
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ImmersionSpec {
    ambient: ProductAmbient,
    kind: ImmersionKind,
    domain: [[f64; 2]; 2],
    periodic: [bool; 2],
    affine: Option<Affine2>,
    label: String,
}

impl ImmersionSpec {
    pub fn closed_form(
        ambient: ProductAmbient,
        family: Family,
        label: impl Into<String>,
    ) -> Result<Self> {
        family.validate(&ambient)?;
        let (domain, periodic) = family.default_domain(&ambient);
        Ok(ImmersionSpec {
            ambient,
            kind: ImmersionKind::ClosedForm(family),
            domain,
            periodic,
            affine: None,
            label: label.into(),
        })
    }

    pub fn sampled(grid: SampledImmersion, label: impl Into<String>) -> Self {
        ImmersionSpec {
            ambient: grid.ambient().clone(),
            domain: grid.interior_domain(),
            periodic: [false, false],
            kind: ImmersionKind::Sampled(Arc::new(grid)),
            affine: None,
            label: label.into(),
        }
    }

    /// Restricts (or, for closed forms, changes) the parameter rectangle.
    pub fn with_domain(mut self, domain: [[f64; 2]; 2]) -> Result<Self> {
        for (i, [a, b]) in domain.iter().enumerate() {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Parameter(format!(
                    "empty parameter interval {i}: [{a}, {b}]"
                )));
            }
        }
        if matches!(self.kind, ImmersionKind::Sampled(_)) && self.affine.is_none() {
            let inner = self.domain;
            for i in 0..2 {
                if domain[i][0] < inner[i][0] - 1e-12 || domain[i][1] > inner[i][1] + 1e-12 {
                    return Err(Error::Domain("domain exceeds the sampled interior".into()));
                }
            }
        }
        self.domain = domain;
        self.periodic = [false, false];
        Ok(self)
    }

    /// The same surface seen through the parameter change `a`: the new
    /// parameters w map to the current ones by `a`.
    pub fn reparametrized(&self, a: Affine2) -> Result<Self> {
        if a.scale.iter().any(|s| *s == 0.0 || !s.is_finite()) {
            return Err(Error::Parameter(
                "affine scale must be nonzero and finite".into(),
            ));
        }
        let mut domain = [[0.0; 2]; 2];
        let mut periodic = [false; 2];
        for i in 0..2 {
            let k = a.perm(i);
            let ends = self.domain[i].map(|x| (x - a.offset[i]) / a.scale[i]);
            domain[k] = [ends[0].min(ends[1]), ends[0].max(ends[1])];
            periodic[k] = self.periodic[i];
        }
        let affine = Some(match &self.affine {
            Some(old) => old.after(&a),
            None => a,
        });
        Ok(ImmersionSpec {
            ambient: self.ambient.clone(),
            kind: self.kind.clone(),
            domain,
            periodic,
            affine,
            label: self.label.clone(),
        })
    }

    pub fn ambient(&self) -> &ProductAmbient {
        &self.ambient
    }

    pub fn kind(&self) -> &ImmersionKind {
        &self.kind
    }

    pub fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sampled_grid(&self) -> Option<&SampledImmersion> {
        match &self.kind {
            ImmersionKind::Sampled(s) => Some(s),
            ImmersionKind::ClosedForm(_) => None,
        }
    }

    fn wrap(&self, uv: [f64; 2]) -> Result<[f64; 2]> {
        let mut w = uv;
        for i in 0..2 {
            let [a, b] = self.domain[i];
            if self.periodic[i] {
                w[i] = a + (w[i] - a).rem_euclid(b - a);
            } else {
                let slack = 1e-9 * (b - a);
                if !(w[i] >= a - slack && w[i] <= b + slack) {
                    return Err(Error::Domain(format!(
                        "parameter {} = {} outside [{a}, {b}]",
                        ["u", "v"][i],
                        uv[i]
                    )));
                }
            }
        }
        Ok(w)
    }

    /// Jets of all ambient coordinates at `uv`.
    pub fn jets(&self, uv: [f64; 2], order: usize) -> Result<JetVec> {
        if order > MAX_ORDER {
            return Err(Error::Precondition(format!(
                "jet order {order} exceeds {MAX_ORDER}"
            )));
        }
        let w = self.wrap(uv)?;
        let x = self.affine.map_or(w, |a| a.apply(w));
        let base = match &self.kind {
            ImmersionKind::ClosedForm(f) => f.eval(
                &self.ambient,
                Jet::variable(2, order, 0, x[0]),
                Jet::variable(2, order, 1, x[1]),
            ),
            ImmersionKind::Sampled(s) => s.jets_at(x[0], x[1], order)?,
        };
        match &self.affine {
            None => Ok(base),
            Some(a) => {
                let subs: Vec<Jet> = (0..2)
                    .map(|i| Jet::variable(2, order, a.perm(i), 0.0) * a.scale[i])
                    .collect();
                base.iter().map(|j| j.compose(&subs)).collect()
            }
        }
    }

    pub fn position(&self, uv: [f64; 2]) -> Result<Vec<f64>> {
        Ok(jvalues(&self.jets(uv, 0)?))
    }
}

pub fn surface_jets(spec: &ImmersionSpec, uv: [f64; 2], order: usize) -> Result<JetVec> {
    spec.jets(uv, order)
}

/// Pointwise data in ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalData {
    pub uv: [f64; 2],
    pub position: Vec<f64>,
    pub metric: Mat2,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    /// σ(E_i, E_j).
    pub sigma: [[Vec<f64>; 2]; 2],
    pub mean_curvature: Vec<f64>,
    /// Matrix of A_{E_α} in (E₁, E₂), one per normal.
    pub shape: Vec<Mat2>,
    pub t: Vec<f64>,
    pub n: Vec<f64>,
    pub t_norm: f64,
    pub n_norm: f64,
    pub h_norm: f64,
    pub theta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub h_dot_n: f64,
    /// Whether E₁ = T/|T| (false at the |T| ≈ 0 fallback).
    pub e1_is_t: bool,
}

/// Jets of the adapted frame and everything derived from it at one point.
#[derive(Debug, Clone)]
pub(crate) struct LocalGeometry {
    pub pa: ProductAmbient,
    pub uv: [f64; 2],
    pub pos: Vec<f64>,
    pub metric: [[Jet; 2]; 2],
    /// Coordinate components e[a][i] of E_a.
    pub e: [[Jet; 2]; 2],
    pub frame: [JetVec; 2],
    pub normals: Vec<JetVec>,
    /// h[α][a][b] = ⟨σ(E_a, E_b), ν_α⟩.
    pub h: Vec<[[Jet; 2]; 2]>,
    /// ⟨ξ, E_a⟩.
    pub tau: [Jet; 2],
    /// ⟨ξ, ν_α⟩.
    pub nxi: Vec<Jet>,
    /// Γ[a][b][c] = ⟨∇_{E_a} E_b, E_c⟩.
    pub gamma: [[[f64; 2]; 2]; 2],
    /// ω[a][α][β] = ⟨∇⊥_{E_a} ν_α, ν_β⟩.
    pub omega: [Vec<Vec<Jet>>; 2],
    pub k_intrinsic: Jet,
    pub e1_is_t: bool,
}

fn jsum(v: impl IntoIterator<Item = Jet>, vars: usize, order: usize) -> Jet {
    v.into_iter().fold(Jet::zero(vars, order), |a, b| a + b)
}

fn jcomb(a: &Jet, x: &[Jet], b: &Jet, y: &[Jet]) -> JetVec {
    x.iter()
        .zip(y)
        .map(|(xi, yi)| *a * *xi + *b * *yi)
        .collect()
}

/// Gaussian curvature from the metric and its derivatives (Brioschi).
fn brioschi(g: &[[Jet; 2]; 2]) -> Result<Jet> {
    let (e, f, gg) = (g[0][0], g[0][1], g[1][1]);
    let (eu, ev) = (e.partial(0), e.partial(1));
    let (fu, fv) = (f.partial(0), f.partial(1));
    let (gu, gv) = (gg.partial(0), gg.partial(1));
    let evv = ev.partial(1);
    let fuv = fu.partial(1);
    let guu = gu.partial(0);
    let det3 = |m: [[Jet; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let z = Jet::zero(2, evv.order());
    let m1 = [
        [evv * -0.5 + fuv - guu * 0.5, eu * 0.5, fu - ev * 0.5],
        [fv - gu * 0.5, e, f],
        [gv * 0.5, f, gg],
    ];
    let m2 = [[z, ev * 0.5, gu * 0.5], [ev * 0.5, e, f], [gu * 0.5, f, gg]];
    let w = e * gg - f * f;
    Ok((det3(m1) - det3(m2)) * (w * w).recip()?)
}

impl LocalGeometry {
    pub fn new(spec: &ImmersionSpec, uv: [f64; 2]) -> Result<Self> {
        let pa = spec.ambient().clone();
        let f = spec.jets(uv, JET_ORDER)?;
        let pos = jvalues(&f);
        let off = pa.on_manifold_residual_raw(&pos);
        if off > ON_MANIFOLD_TOL {
            return Err(Error::Precondition(format!(
                "surface point at ({}, {}) is off M^n(c)×ℝ (residual {off:e})",
                uv[0], uv[1]
            )));
        }
        let sig = pa.signature().to_vec();
        let d = pa.dim();
        let k = pa.xi_index();
        let df = [jpartial(&f, 0), jpartial(&f, 1)];
        let o3 = df[0][0].order();
        let metric = [
            [jdot(&sig, &df[0], &df[0]), jdot(&sig, &df[0], &df[1])],
            [jdot(&sig, &df[0], &df[1]), jdot(&sig, &df[1], &df[1])],
        ];
        let gv = [
            [metric[0][0].value(), metric[0][1].value()],
            [metric[1][0].value(), metric[1][1].value()],
        ];
        let min_eig = sym2_eigenvalues(&gv)[0];
        if !(min_eig >= RANK_TOL) {
            return Err(Error::Rank {
                u: uv[0],
                v: uv[1],
                min_eig,
            });
        }
        let det = metric[0][0] * metric[1][1] - metric[0][1] * metric[0][1];
        let idet = det.recip()?;
        let ginv = [
            [metric[1][1] * idet, -metric[0][1] * idet],
            [-metric[0][1] * idet, metric[0][0] * idet],
        ];
        // ⟨ξ, f_i⟩ and the coordinates of T.
        let xf = [df[0][k], df[1][k]];
        let t = [
            ginv[0][0] * xf[0] + ginv[0][1] * xf[1],
            ginv[1][0] * xf[0] + ginv[1][1] * xf[1],
        ];
        let t2 = xf[0] * t[0] + xf[1] * t[1];
        let e1_is_t = t2.value().max(0.0).sqrt() > ANGLE_TOL;
        let e1 = if e1_is_t {
            let it = t2.sqrt()?.recip()?;
            [t[0] * it, t[1] * it]
        } else {
            [metric[0][0].sqrt()?.recip()?, Jet::zero(2, o3)]
        };
        let sdet = det.sqrt()?.recip()?;
        let e2 = [
            (-(metric[0][1] * e1[0]) - metric[1][1] * e1[1]) * sdet,
            (metric[0][0] * e1[0] + metric[0][1] * e1[1]) * sdet,
        ];
        let e = [e1, e2];
        let frame = [
            jcomb(&e1[0], &df[0], &e1[1], &df[1]),
            jcomb(&e2[0], &df[0], &e2[1], &df[1]),
        ];

        let normals = normal_frame(&pa, &f, &frame)?;

        // Second fundamental form.
        let ddf = [
            [jpartial(&df[0], 0), jpartial(&df[0], 1)],
            [jpartial(&df[1], 0), jpartial(&df[1], 1)],
        ];
        let h: Vec<[[Jet; 2]; 2]> = normals
            .iter()
            .map(|nu| {
                let s = [
                    [jdot(&sig, &ddf[0][0], nu), jdot(&sig, &ddf[0][1], nu)],
                    [jdot(&sig, &ddf[1][0], nu), jdot(&sig, &ddf[1][1], nu)],
                ];
                let mut out = [[Jet::zero(2, 2); 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        let mut acc = Jet::zero(2, 2);
                        for i in 0..2 {
                            for j in 0..2 {
                                acc += e[a][i] * e[b][j] * s[i][j];
                            }
                        }
                        out[a][b] = acc;
                    }
                }
                out
            })
            .collect();

        let dirv = |a: usize, v: &[Jet]| -> JetVec {
            let (du, dv) = (jpartial(v, 0), jpartial(v, 1));
            jcomb(&e[a][0], &du, &e[a][1], &dv)
        };
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let dab = dirv(a, &frame[b]);
                for c in 0..2 {
                    gamma[a][b][c] = jdot(&sig, &dab, &frame[c]).value();
                }
            }
        }
        let omega = [0, 1].map(|a| {
            normals
                .iter()
                .map(|nu| {
                    let dn = dirv(a, nu);
                    normals.iter().map(|nb| jdot(&sig, &dn, nb)).collect()
                })
                .collect()
        });
        let tau = [frame[0][k], frame[1][k]];
        let nxi = normals.iter().map(|nu| nu[k]).collect();
        let k_intrinsic = brioschi(&metric)?;
        debug_assert_eq!(pos.len(), d);
        Ok(LocalGeometry {
            pa,
            uv,
            pos,
            metric,
            e,
            frame,
            normals,
            h,
            tau,
            nxi,
            gamma,
            omega,
            k_intrinsic,
            e1_is_t,
        })
    }

    pub fn codim(&self) -> usize {
        self.normals.len()
    }

    /// E_a(f) for a scalar jet.
    pub fn dir(&self, a: usize, f: &Jet) -> Jet {
        self.e[a][0] * f.partial(0) + self.e[a][1] * f.partial(1)
    }

    /// Components of H in the normal frame.
    pub fn eta(&self) -> Vec<Jet> {
        self.h.iter().map(|h| (h[0][0] + h[1][1]) * 0.5).collect()
    }

    pub fn h_norm(&self) -> f64 {
        self.eta()
            .iter()
            .map(|x| x.value() * x.value())
            .sum::<f64>()
            .sqrt()
    }

    pub fn t_norm(&self) -> f64 {
        (self.tau[0].value().powi(2) + self.tau[1].value().powi(2)).sqrt()
    }

    /// ⟨H, N⟩ as a jet.
    pub fn h_dot_n(&self) -> Jet {
        let eta = self.eta();
        jsum(eta.iter().zip(&self.nxi).map(|(a, b)| *a * *b), 2, 2)
    }

    /// ⟨A_H E_i, E_i⟩ as a jet.
    pub fn lambda(&self, i: usize) -> Jet {
        let eta = self.eta();
        jsum(eta.iter().zip(&self.h).map(|(a, h)| *a * h[i][i]), 2, 2)
    }

    /// Shape operator values per normal.
    pub fn shape(&self) -> Vec<Mat2> {
        self.h
            .iter()
            .map(|h| {
                [
                    [h[0][0].value(), h[0][1].value()],
                    [h[1][0].value(), h[1][1].value()],
                ]
            })
            .collect()
    }

    /// A_H as a matrix.
    pub fn a_h(&self) -> Mat2 {
        let eta = self.eta();
        let mut m = [[0.0; 2]; 2];
        for (x, h) in eta.iter().zip(self.shape()) {
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] += x.value() * h[a][b];
                }
            }
        }
        m
    }

    fn frame_value(&self, a: usize) -> Vec<f64> {
        jvalues(&self.frame[a])
    }

    fn normal_value(&self, alpha: usize) -> Vec<f64> {
        jvalues(&self.normals[alpha])
    }

    /// ∇⊥_{E_a} H in normal-frame components.
    pub fn nabla_perp_h(&self) -> [Vec<f64>; 2] {
        let eta = self.eta();
        [0, 1].map(|a| {
            (0..self.codim())
                .map(|b| {
                    let mut v = self.dir(a, &eta[b]).value();
                    for (al, x) in eta.iter().enumerate() {
                        v += x.value() * self.omega[a][al][b].value();
                    }
                    v
                })
                .collect()
        })
    }

    pub fn pmc_residual(&self) -> f64 {
        self.nabla_perp_h()
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Gaussian curvature from the Gauss equation.
    pub fn k_extrinsic(&self) -> f64 {
        let (e1, e2) = (self.frame_value(0), self.frame_value(1));
        let rbar = self.pa.inner(&self.pa.curvature_raw(&e1, &e2, &e2), &e1);
        let s: f64 = self
            .h
            .iter()
            .map(|h| h[0][0].value() * h[1][1].value() - h[0][1].value() * h[1][0].value())
            .sum();
        rbar + s
    }

    pub fn gauss_residual(&self) -> f64 {
        (self.k_intrinsic.value() - self.k_extrinsic()).abs()
    }

    /// (∇⊥_{E_a} σ)(E_b, E_c) in component β.
    fn nabla_sigma(&self, a: usize, b: usize, c: usize, beta: usize) -> f64 {
        let mut v = self.dir(a, &self.h[beta][b][c]).value();
        for al in 0..self.codim() {
            v += self.h[al][b][c].value() * self.omega[a][al][beta].value();
        }
        for dd in 0..2 {
            v -= self.gamma[a][b][dd] * self.h[beta][dd][c].value();
            v -= self.gamma[a][c][dd] * self.h[beta][b][dd].value();
        }
        v
    }

    pub fn codazzi_residual(&self) -> f64 {
        let (e1, e2) = (self.frame_value(0), self.frame_value(1));
        let mut worst: f64 = 0.0;
        for c in 0..2 {
            let r = self.pa.curvature_raw(&e1, &e2, &self.frame_value(c));
            for beta in 0..self.codim() {
                let lhs = self.pa.inner(&r, &self.normal_value(beta));
                let rhs = self.nabla_sigma(0, 1, c, beta) - self.nabla_sigma(1, 0, c, beta);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    pub fn ricci_residual(&self) -> f64 {
        let (e1, e2) = (self.frame_value(0), self.frame_value(1));
        let m = self.codim();
        let w = &self.omega;
        let bracket = [0, 1].map(|c| self.gamma[0][1][c] - self.gamma[1][0][c]);
        let mut worst: f64 = 0.0;
        for al in 0..m {
            let r = self.pa.curvature_raw(&e1, &e2, &self.normal_value(al));
            for be in 0..m {
                let mut lhs =
                    self.dir(0, &w[1][al][be]).value() - self.dir(1, &w[0][al][be]).value();
                for ga in 0..m {
                    lhs += w[1][al][ga].value() * w[0][ga][be].value()
                        - w[0][al][ga].value() * w[1][ga][be].value();
                }
                for c in 0..2 {
                    lhs -= bracket[c] * w[c][al][be].value();
                }
                let (ha, hb) = (&self.h[al], &self.h[be]);
                let mut comm = 0.0;
                for kk in 0..2 {
                    comm += ha[1][kk].value() * hb[kk][0].value()
                        - hb[1][kk].value() * ha[kk][0].value();
                }
                let rhs = comm + self.pa.inner(&r, &self.normal_value(be));
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// |∇⊥_X N + σ(X, T)| over X ∈ {E₁, E₂}.
    pub fn xi_identity_residual(&self) -> f64 {
        let m = self.codim();
        let mut worst: f64 = 0.0;
        for a in 0..2 {
            let mut sq = 0.0;
            for be in 0..m {
                let mut v = self.dir(a, &self.nxi[be]).value();
                for al in 0..m {
                    v += self.nxi[al].value() * self.omega[a][al][be].value();
                }
                for b in 0..2 {
                    v += self.tau[b].value() * self.h[be][a][b].value();
                }
                sq += v * v;
            }
            worst = worst.max(sq.sqrt());
        }
        worst
    }

    /// Operator norm of A_H − |H|² id.
    pub fn pseudo_umbilical_defect(&self) -> f64 {
        let mut m = self.a_h();
        let hh = self.h_norm().powi(2);
        m[0][0] -= hh;
        m[1][1] -= hh;
        let ev = sym2_eigenvalues(&m);
        ev[0].abs().max(ev[1].abs())
    }

    /// Traceless part of Q(X,Y) = 2⟨σ(X,Y),H⟩ − c⟨X,ξ⟩⟨Y,ξ⟩.
    pub fn ar_form_residual(&self) -> f64 {
        let eta = self.eta();
        let c = self.pa.c();
        let q = |a: usize, b: usize| {
            let s: f64 = eta
                .iter()
                .zip(&self.h)
                .map(|(x, h)| x.value() * h[a][b].value())
                .sum();
            2.0 * s - c * self.tau[a].value() * self.tau[b].value()
        };
        (q(0, 0) - q(1, 1)).abs().max(q(0, 1).abs())
    }

    /// Dimension of span{σ(E_a, E_b)}.
    pub fn first_normal_rank(&self, tol: f64) -> usize {
        let m = self.codim();
        let vecs: Vec<Vec<f64>> = [(0, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| (0..m).map(|al| self.h[al][a][b].value()).collect())
            .collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vecs {
            let mut w = v;
            for b in &basis {
                let k: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= k * y);
            }
            let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > tol {
                basis.push(w.iter().map(|x| x / len).collect());
            }
        }
        basis.len()
    }

    /// ½Δ|T|² and the right-hand side |A_N|² + K|T|² − 2⟨A_H T, T⟩.
    pub fn balance(&self) -> (f64, f64) {
        let t2 = self.tau[0] * self.tau[0] + self.tau[1] * self.tau[1];
        let mut lap = 0.0;
        for a in 0..2 {
            lap += self.dir(a, &self.dir(a, &t2)).value();
            for c in 0..2 {
                lap -= self.gamma[a][a][c] * self.dir(c, &t2).value();
            }
        }
        let eta = self.eta();
        let mut an2 = 0.0;
        let mut aht = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let an: f64 = self
                    .nxi
                    .iter()
                    .zip(&self.h)
                    .map(|(n, h)| n.value() * h[a][b].value())
                    .sum();
                an2 += an * an;
                let ah: f64 = eta
                    .iter()
                    .zip(&self.h)
                    .map(|(x, h)| x.value() * h[a][b].value())
                    .sum();
                aht += self.tau[a].value() * self.tau[b].value() * ah;
            }
        }
        let k = self.k_intrinsic.value();
        (0.5 * lap, an2 + k * t2.value() - 2.0 * aht)
    }

    /// Residuals of the pmc-helix identities, or `None` when 0 < |T| < 1
    /// fails or E₁ is not T/|T|.
    pub fn identity_residuals(&self) -> Option<IdentityResiduals> {
        let tn = self.t_norm();
        if !(self.e1_is_t && tn > ANGLE_TOL && tn < 1.0 - ANGLE_TOL) {
            return None;
        }
        let c = self.pa.c();
        let hh = self.h_norm().powi(2);
        let hn = self.h_dot_n();
        let hnv = hn.value();
        let l1 = self.lambda(0);
        let l2 = self.lambda(1);
        let k = self.k_intrinsic;
        let e1l1 = self.dir(0, &l1).value();
        let e5 = (e1l1 - hnv / tn * (4.0 * hh + c * tn * tn - 4.0 * l1.value()))
            .abs()
            .max((e1l1 + self.dir(0, &l2).value()).abs());
        let e2l1 = self.dir(1, &l1).value();
        let e6 = e2l1.abs().max((e2l1 + self.dir(1, &l2).value()).abs());
        let e7 = (k.value() - 2.0 * l1.value() + 4.0 * hnv * hnv / (tn * tn)).abs();
        let e8 = (self.dir(0, &hn).value() + tn * l1.value())
            .abs()
            .max(self.dir(1, &hn).value().abs());
        let e9 = (self.dir(0, &k).value() - 2.0 * hnv / (tn * tn) * (4.0 * hh + c * tn * tn))
            .abs()
            .max(self.dir(1, &k).value().abs());
        let (lhs, rhs) = self.balance();
        Some(IdentityResiduals {
            e1_lambda: e5,
            e2_lambda: e6,
            gaussian_curvature: e7,
            e_hn: e8,
            e_k: e9,
            balance: (lhs - rhs).abs(),
        })
    }

    pub fn fundamental(&self) -> FundamentalData {
        let d = self.pa.dim();
        let e1 = self.frame_value(0);
        let e2 = self.frame_value(1);
        let normals: Vec<Vec<f64>> = (0..self.codim()).map(|a| self.normal_value(a)).collect();
        let combine = |coef: &dyn Fn(usize) -> f64| -> Vec<f64> {
            let mut v = vec![0.0; d];
            for (al, nu) in normals.iter().enumerate() {
                crate::tensor::axpy(&mut v, coef(al), nu);
            }
            v
        };
        let sigma = [0, 1].map(|a| [0, 1].map(|b| combine(&|al| self.h[al][a][b].value())));
        let eta = self.eta();
        let mean_curvature = combine(&|al| eta[al].value());
        let mut t = vec![0.0; d];
        crate::tensor::axpy(&mut t, self.tau[0].value(), &e1);
        crate::tensor::axpy(&mut t, self.tau[1].value(), &e2);
        let xi = self.pa.xi();
        let n: Vec<f64> = xi.iter().zip(&t).map(|(x, y)| x - y).collect();
        let t_norm = self.t_norm();
        let n_norm = self.pa.inner(&n, &n).max(0.0).sqrt();
        let a_h = self.a_h();
        FundamentalData {
            uv: self.uv,
            position: self.pos.clone(),
            metric: [
                [self.metric[0][0].value(), self.metric[0][1].value()],
                [self.metric[1][0].value(), self.metric[1][1].value()],
            ],
            e1,
            e2,
            normals,
            sigma,
            mean_curvature,
            shape: self.shape(),
            t,
            n,
            t_norm,
            n_norm,
            h_norm: self.h_norm(),
            theta: t_norm.min(1.0).acos(),
            lambda1: a_h[0][0],
            lambda2: a_h[1][1],
            h_dot_n: self.h_dot_n().value(),
            e1_is_t: self.e1_is_t,
        }
    }

    /// The normal frame {E₃, E₄ = N/|N|, E₅} built from H and N, with E₅
    /// oriented so that ⟨A_{E₅}E₁,E₁⟩ ≥ 0. Needs codimension 3 and H, N
    /// independent.
    pub fn mean_curvature_frame(&self) -> Option<MeanCurvatureFrame> {
        if self.codim() != 3 {
            return None;
        }
        let sig = self.pa.signature().to_vec();
        let m = self.codim();
        let o = 2;
        let comb = |coef: &[Jet]| -> JetVec {
            let mut v = vec![Jet::zero(2, o); self.pa.dim()];
            for (al, nu) in self.normals.iter().enumerate() {
                for (vi, ni) in v.iter_mut().zip(nu) {
                    *vi += coef[al] * *ni;
                }
            }
            v
        };
        let eta = self.eta();
        let hv = comb(&eta);
        let nv = comb(&self.nxi.iter().map(|x| x.truncate(o)).collect::<Vec<_>>());
        let unit = |v: &JetVec| -> Option<JetVec> {
            let l2 = jdot(&sig, v, v);
            if l2.value() <= 1e-12 {
                return None;
            }
            let il = l2.sqrt().ok()?.recip().ok()?;
            Some(v.iter().map(|x| *x * il).collect())
        };
        let reject = |v: &JetVec, b: &JetVec| -> JetVec {
            let k = jdot(&sig, v, b);
            v.iter().zip(b).map(|(x, y)| *x - *y * k).collect()
        };
        let e4 = unit(&nv)?;
        let e3 = unit(&reject(&hv, &e4))?;
        // The normal-frame member with the largest residual completes the frame.
        let mut best: Option<(f64, JetVec)> = None;
        for nu in &self.normals {
            let w = reject(
                &reject(&nu.iter().map(|x| x.truncate(o)).collect(), &e3),
                &e4,
            );
            let l = jdot(&sig, &w, &w).value();
            if best.as_ref().is_none_or(|(bl, _)| l > *bl) {
                best = Some((l, w));
            }
        }
        let mut e5 = unit(&best?.1)?;
        let ddf_e5 = |v: &JetVec| -> [[f64; 2]; 2] {
            let mut out = [[0.0; 2]; 2];
            let vv = jvalues(v);
            for a in 0..2 {
                for b in 0..2 {
                    let s: f64 = (0..m)
                        .map(|al| {
                            self.h[al][a][b].value() * self.pa.inner(&self.normal_value(al), &vv)
                        })
                        .sum();
                    out[a][b] = s;
                }
            }
            out
        };
        if ddf_e5(&e5)[0][0] < 0.0 {
            e5 = e5.iter().map(|x| -*x).collect();
        }
        let frame = [e3, e4, e5];
        let shape = [ddf_e5(&frame[0]), ddf_e5(&frame[1]), ddf_e5(&frame[2])];
        let connection = [0, 1].map(|a| {
            frame
                .iter()
                .map(|x| {
                    let dx: JetVec = (0..x.len()).map(|i| self.dir(a, &x[i])).collect();
                    frame.iter().map(|y| jdot(&sig, &dx, y).value()).collect()
                })
                .collect()
        });
        Some(MeanCurvatureFrame {
            frame: frame.iter().map(|x| jvalues(x)).collect(),
            shape: shape.to_vec(),
            connection,
        })
    }
}

/// Pmc-helix identity residuals at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// E₁(λ₁) against ⟨H,N⟩/|T|·(4|H|² + c|T|² − 4λ₁), and E₁(λ₁ + λ₂).
    pub e1_lambda: f64,
    /// E₂(λ₁) and E₂(λ₁ + λ₂).
    pub e2_lambda: f64,
    /// K − 2λ₁ + 4⟨H,N⟩²/|T|².
    pub gaussian_curvature: f64,
    /// E₁⟨H,N⟩ + |T|λ₁ and E₂⟨H,N⟩.
    pub e_hn: f64,
    /// E₁(K) against 2⟨H,N⟩/|T|²·(4|H|² + c|T|²), and E₂(K).
    pub e_k: f64,
    /// ½Δ|T|² − (|A_N|² + K|T|² − 2⟨A_H T,T⟩).
    pub balance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurvatureFrame {
    /// E₃, E₄, E₅ in ambient coordinates.
    pub frame: Vec<Vec<f64>>,
    pub shape: Vec<Mat2>,
    /// connection[a][α][β] = ⟨∇⊥_{E_a} E_α, E_β⟩ (α, β over E₃, E₄, E₅).
    pub connection: [Vec<Vec<f64>>; 2],
}

/// Orthonormal normals by Gram–Schmidt on the ambient axes, ascending.
fn normal_frame(pa: &ProductAmbient, f: &[Jet], frame: &[JetVec; 2]) -> Result<Vec<JetVec>> {
    let sig = pa.signature().to_vec();
    let d = pa.dim();
    let order = frame[0][0].order();
    let want = pa.n() - 1;
    let mut basis: Vec<(JetVec, Jet)> = Vec::new();
    if pa.is_curved() {
        let pm: JetVec = pa
            .m_position_jets(f)
            .iter()
            .map(|x| x.truncate(order))
            .collect();
        let ip = jdot(&sig, &pm, &pm).recip()?;
        basis.push((pm, ip));
    }
    for e in frame {
        basis.push((e.clone(), jdot(&sig, e, e).recip()?));
    }
    let residual = |k: usize, basis: &[(JetVec, Jet)]| -> JetVec {
        let mut w: JetVec = (0..d)
            .map(|i| Jet::constant(2, order, if i == k { 1.0 } else { 0.0 }))
            .collect();
        for (b, ib) in basis {
            let coef = jdot(&sig, &w, b) * *ib;
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= coef * *y);
        }
        w
    };
    let mut normals: Vec<JetVec> = Vec::new();
    let push =
        |w: JetVec, basis: &mut Vec<(JetVec, Jet)>, normals: &mut Vec<JetVec>| -> Result<()> {
            let il = jdot(&sig, &w, &w).sqrt()?.recip()?;
            let nu: JetVec = w.iter().map(|x| *x * il).collect();
            basis.push((nu.clone(), Jet::constant(2, order, 1.0)));
            normals.push(nu);
            Ok(())
        };
    for k in 0..d {
        if normals.len() == want {
            break;
        }
        let w = residual(k, &basis);
        if jdot(&sig, &w, &w).value() > NORMAL_ACCEPT {
            push(w, &mut basis, &mut normals)?;
        }
    }
    while normals.len() < want {
        let (l, w) = (0..d)
            .map(|k| {
                let w = residual(k, &basis);
                (jdot(&sig, &w, &w).value(), w)
            })
            .fold((f64::NEG_INFINITY, Vec::new()), |acc, x| {
                if x.0 > acc.0 {
                    x
                } else {
                    acc
                }
            });
        if !(l > 1e-8) {
            return Err(Error::Precondition("normal space degenerates".into()));
        }
        push(w, &mut basis, &mut normals)?;
    }
    Ok(normals)
}

pub fn fundamental_data(spec: &ImmersionSpec, uv: [f64; 2]) -> Result<FundamentalData> {
    Ok(LocalGeometry::new(spec, uv)?.fundamental())
}

/// ∇⊥_{E_x} E_v, with x ∈ {1, 2} and v ∈ {3, …, n+1} numbering the frame as
/// E₁, E₂, E₃, ….
pub fn normal_connection(
    spec: &ImmersionSpec,
    uv: [f64; 2],
    x: usize,
    v: usize,
) -> Result<AmbientVector> {
    let lg = LocalGeometry::new(spec, uv)?;
    let m = lg.codim();
    if !(1..=2).contains(&x) || !(3..3 + m).contains(&v) {
        return Err(Error::Parameter(format!(
            "frame indices out of range: X = E{x}, V = E{v} (normals are E3..E{})",
            2 + m
        )));
    }
    let (a, al) = (x - 1, v - 3);
    let mut out = vec![0.0; spec.ambient().dim()];
    for be in 0..m {
        crate::tensor::axpy(&mut out, lg.omega[a][al][be].value(), &lg.normal_value(be));
    }
    Ok(AmbientVector::new(&AmbientPoint::new(lg.pos.clone()), out))
}

/// ∇⊥_{E_a} H for a = 1, 2, in ambient coordinates.
pub fn mean_curvature_derivative(spec: &ImmersionSpec, uv: [f64; 2]) -> Result<[Vec<f64>; 2]> {
    let lg = LocalGeometry::new(spec, uv)?;
    let comps = lg.nabla_perp_h();
    Ok(comps.map(|c| {
        let mut out = vec![0.0; spec.ambient().dim()];
        for (al, x) in c.iter().enumerate() {
            crate::tensor::axpy(&mut out, *x, &lg.normal_value(al));
        }
        out
    }))
}

/// Normal frame E₃ ∥ H, E₄ ∥ N, E₅ (codimension 3 with H, N independent).
pub fn mean_curvature_frame(
    spec: &ImmersionSpec,
    uv: [f64; 2],
) -> Result<Option<MeanCurvatureFrame>> {
    Ok(LocalGeometry::new(spec, uv)?.mean_curvature_frame())
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiDecomposition {
    pub t: AmbientVector,
    pub n: AmbientVector,
    /// arccos |T| ∈ [0, π/2].
    pub theta: f64,
}

pub fn xi_decomposition(spec: &ImmersionSpec, uv: [f64; 2]) -> Result<XiDecomposition> {
    let fd = fundamental_data(spec, uv)?;
    let base = AmbientPoint::new(fd.position.clone());
    Ok(XiDecomposition {
        t: AmbientVector::new(&base, fd.t),
        n: AmbientVector::new(&base, fd.n),
        theta: fd.theta,
    })
}
