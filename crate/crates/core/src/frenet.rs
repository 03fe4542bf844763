//! Frenet apparatus of arc-length curves in M^n(c)×ℝ.
//!
//! Covariant derivatives along the curve are obtained by projecting flat
//! derivatives of jets onto the tangent space of the product, which is
//! exactly ∇̄ for fields tangent to M^n(c)×ℝ. The Frenet frame is the
//! Gram–Schmidt orthonormalisation of γ', ∇̄γ', ∇̄²γ', …; the i-th curvature is
//! the ratio of successive Gram–Schmidt residual lengths.

use serde::Serialize;

use crate::ambient::{AmbientPoint, AmbientVector, Model, ProductAmbient};
use crate::error::{Error, Result};
use crate::surface::ImmersionSpec;
use crate::tensor::{jdot, jpartial, jscale, jvalues, Jet, JetVec};

/// Curvatures at or below this are treated as vanishing.
pub const FRENET_TOL: f64 = 1e-7;
/// Allowed deviation of |γ'| from 1 for arc-length curves.
pub const UNIT_SPEED_TOL: f64 = 1e-9;
pub const MAX_FRENET_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CircleParams {
    pub c: f64,
    pub p: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub kappa: f64,
    /// Polar angle of the circle (sphere: cot φ = κr; hyperboloid: coth φ = κr).
    pub phi: f64,
}

impl CircleParams {
    fn model(&self) -> Model {
        if self.c > 0.0 {
            Model::Sphere
        } else if self.c < 0.0 {
            Model::Hyperboloid
        } else {
            Model::Flat
        }
    }

    /// Length of one full turn (∞ for geodesics of the flat model).
    pub fn period(&self) -> f64 {
        let tau = std::f64::consts::TAU;
        match self.model() {
            Model::Sphere => tau * self.phi.sin() / self.c.sqrt(),
            Model::Hyperboloid => tau * self.phi.sinh() / (-self.c).sqrt(),
            Model::Flat if self.kappa > 0.0 => tau / self.kappa,
            Model::Flat => f64::INFINITY,
        }
    }

    /// Position jets at arc length `s` (offset `ds` carries the jet variable).
    pub fn eval(&self, s: &Jet) -> JetVec {
        let d = self.p.len();
        let last = d - 1;
        let (vars, order) = (s.vars(), s.order());
        let k = |x: f64| Jet::constant(vars, order, x);
        let mut out: JetVec = (0..d).map(|_| k(0.0)).collect();
        match self.model() {
            Model::Flat => {
                if self.kappa == 0.0 {
                    for i in 0..d {
                        out[i] = *s * self.u1[i] + self.p[i];
                    }
                } else {
                    let a = (*s * self.kappa).sin() * (1.0 / self.kappa);
                    let b = ((*s * self.kappa).cos() * -1.0 + 1.0) * (1.0 / self.kappa);
                    for i in 0..d {
                        out[i] = a * self.u1[i] + b * self.u2[i] + self.p[i];
                    }
                }
            }
            model => {
                let r = 1.0 / self.c.abs().sqrt();
                let mut pm = self.p.clone();
                pm[last] = 0.0;
                let (cn, rho, nhat, mhat): (f64, f64, Vec<f64>, Vec<f64>) =
                    if model == Model::Sphere {
                        let (sp, cp) = self.phi.sin_cos();
                        let nhat = (0..d).map(|i| cp * pm[i] / r + sp * self.u2[i]).collect();
                        let mhat = (0..d).map(|i| sp * pm[i] / r - cp * self.u2[i]).collect();
                        (cp, r * sp, nhat, mhat)
                    } else {
                        let (sp, cp) = (self.phi.sinh(), self.phi.cosh());
                        let nhat = (0..d).map(|i| cp * pm[i] / r + sp * self.u2[i]).collect();
                        let mhat = (0..d).map(|i| -sp * pm[i] / r - cp * self.u2[i]).collect();
                        (cp, r * sp, nhat, mhat)
                    };
                let arg = *s * (1.0 / rho);
                let (cs, sn) = (arg.cos(), arg.sin());
                for i in 0..d {
                    out[i] = (cs * mhat[i] + sn * self.u1[i]) * rho + r * cn * nhat[i];
                }
                out[last] = k(self.p[last]);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum CurveKind {
    Circle(CircleParams),
    /// t ↦ base + t ξ.
    VerticalLine {
        base: Vec<f64>,
    },
    /// A circle traced at speed √(1−h²) while rising with slope h.
    SlantHelix {
        circle: CircleParams,
        slope: f64,
    },
    /// A flat circle of radius `loop_radius` drawn on the product torus
    /// S¹(r₁)×S¹(r₂) ⊂ S³(c). Unit speed, non-constant curvature when r₁ ≠ r₂.
    TorusLoop {
        r1: f64,
        r2: f64,
        loop_radius: f64,
    },
    /// Coordinate curve of a surface: parameter `var` runs, the other is fixed.
    SurfaceCurve {
        surface: Box<ImmersionSpec>,
        var: usize,
        fixed: f64,
    },
}

#[derive(Debug, Clone)]
pub struct CurveSpec {
    ambient: ProductAmbient,
    kind: CurveKind,
    interval: (f64, f64),
    arc_length: bool,
}

impl CurveSpec {
    pub fn new(
        ambient: ProductAmbient,
        kind: CurveKind,
        interval: (f64, f64),
        arc_length: bool,
    ) -> Self {
        CurveSpec {
            ambient,
            kind,
            interval,
            arc_length,
        }
    }

    pub fn ambient(&self) -> &ProductAmbient {
        &self.ambient
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn is_arc_length(&self) -> bool {
        self.arc_length
    }

    pub fn with_interval(mut self, interval: (f64, f64)) -> Self {
        self.interval = interval;
        self
    }

    /// Coordinate curve of `surface` through the parameter point `through`.
    pub fn coordinate_curve(surface: &ImmersionSpec, var: usize, through: [f64; 2]) -> Self {
        let dom = surface.domain();
        CurveSpec {
            ambient: surface.ambient().clone(),
            kind: CurveKind::SurfaceCurve {
                surface: Box::new(surface.clone()),
                var,
                fixed: through[1 - var],
            },
            interval: (dom[var][0], dom[var][1]),
            arc_length: true,
        }
    }

    /// Position jets (one variable) at parameter `s`.
    pub fn jets(&self, s: f64, order: usize) -> Result<JetVec> {
        let sj = Jet::variable(1, order, 0, s);
        match &self.kind {
            CurveKind::Circle(cp) => Ok(cp.eval(&sj)),
            CurveKind::VerticalLine { base } => {
                let last = base.len() - 1;
                Ok(base
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        if i == last {
                            sj + *b
                        } else {
                            Jet::constant(1, order, *b)
                        }
                    })
                    .collect())
            }
            CurveKind::SlantHelix { circle, slope } => {
                let speed = (1.0 - slope * slope).sqrt();
                let mut out = circle.eval(&(sj * speed));
                let last = out.len() - 1;
                out[last] = sj * *slope + circle.p[last];
                Ok(out)
            }
            CurveKind::TorusLoop {
                r1,
                r2,
                loop_radius,
            } => {
                let a = *loop_radius;
                let x = (sj * (1.0 / a)).sin() * a;
                let y = (sj * (1.0 / a)).cos() * (-a);
                let ax = x * (1.0 / r1);
                let ay = y * (1.0 / r2);
                let zero = Jet::zero(1, order);
                Ok(vec![
                    ax.cos() * *r1,
                    ax.sin() * *r1,
                    ay.cos() * *r2,
                    ay.sin() * *r2,
                    zero,
                ])
            }
            CurveKind::SurfaceCurve {
                surface,
                var,
                fixed,
            } => {
                let mut uv = [0.0; 2];
                uv[*var] = s;
                uv[1 - *var] = *fixed;
                let jets2 = surface.jets(uv, order)?;
                let mut subs = [Jet::zero(1, order), Jet::zero(1, order)];
                subs[*var] = Jet::variable(1, order, 0, 0.0);
                jets2.iter().map(|j| j.compose(&subs)).collect()
            }
        }
    }

    pub fn position(&self, s: f64) -> Result<Vec<f64>> {
        Ok(jvalues(&self.jets(s, 0)?))
    }
}

fn tangent_project_jets(pa: &ProductAmbient, pm: &[Jet], w: &[Jet]) -> JetVec {
    if !pa.is_curved() {
        return w.to_vec();
    }
    let sig = pa.signature();
    let k = jdot(sig, w, pm)
        * jdot(sig, pm, pm)
            .recip()
            .expect("curved model has ⟨p,p⟩ = 1/c ≠ 0");
    w.iter().zip(pm).map(|(wi, pi)| *wi - *pi * k).collect()
}

/// γ' and its iterated covariant derivatives, as jets (V_i has order 3 − i).
fn covariant_jets_raw(curve: &CurveSpec, s: f64, k: usize) -> Result<Vec<JetVec>> {
    if !curve.arc_length {
        return Err(Error::Precondition(
            "curve is not flagged arc-length; reparametrise it first".into(),
        ));
    }
    if k > MAX_FRENET_ORDER - 1 {
        return Err(Error::Precondition(format!(
            "covariant order {k} exceeds 3"
        )));
    }
    let pa = &curve.ambient;
    let pos = curve.jets(s, k + 1)?;
    let pm = pa.m_position_jets(&pos);
    let sig = pa.signature();
    let mut out = vec![jpartial(&pos, 0)];
    let speed = jdot(sig, &out[0], &out[0]).value().sqrt();
    if (speed - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(Error::Precondition(format!(
            "curve is not unit speed at s = {s}: |γ'| = {speed:.12}"
        )));
    }
    for i in 0..k {
        let d = jpartial(&out[i], 0);
        out.push(tangent_project_jets(pa, &pm, &d));
    }
    Ok(out)
}

pub fn covariant_jet(curve: &CurveSpec, s: f64, k: usize) -> Result<Vec<AmbientVector>> {
    let base = AmbientPoint::new(curve.position(s)?);
    Ok(covariant_jets_raw(curve, s, k)?
        .iter()
        .map(|v| AmbientVector::new(&base, jvalues(v)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrenetData {
    /// κ₁ … κ_{r−1}
    pub curvatures: Vec<f64>,
    /// X₁ … X_r in ambient coordinates.
    pub frame: Vec<Vec<f64>>,
}

impl FrenetData {
    pub fn order(&self) -> usize {
        self.frame.len()
    }
}

struct FrenetJets {
    curvatures: Vec<Jet>,
    frame: Vec<JetVec>,
}

fn frenet_jets(curve: &CurveSpec, s: f64, r_max: usize) -> Result<FrenetJets> {
    let r_max = r_max.clamp(1, MAX_FRENET_ORDER);
    let v = covariant_jets_raw(curve, s, r_max - 1)?;
    let sig = curve.ambient.signature();
    let mut frame: Vec<JetVec> = vec![v[0].clone()];
    let mut curvatures = Vec::new();
    let mut prev_len2 = jdot(sig, &v[0], &v[0]);
    for vi in v.iter().skip(1) {
        let mut u = vi.clone();
        for x in &frame {
            let k = jdot(sig, vi, x);
            u = u.iter().zip(x).map(|(a, b)| *a - *b * k).collect();
        }
        let len2 = jdot(sig, &u, &u);
        let ratio2 = len2.value() / prev_len2.value();
        if !(ratio2 > FRENET_TOL * FRENET_TOL) {
            break;
        }
        let len = len2.sqrt()?;
        let kappa = len * prev_len2.sqrt()?.recip()?;
        frame.push(jscale(&u, &len.recip()?));
        curvatures.push(kappa);
        prev_len2 = len2;
    }
    Ok(FrenetJets { curvatures, frame })
}

pub fn frenet_apparatus(curve: &CurveSpec, s: f64, r_max: usize) -> Result<FrenetData> {
    let fj = frenet_jets(curve, s, r_max)?;
    Ok(FrenetData {
        curvatures: fj.curvatures.iter().map(Jet::value).collect(),
        frame: fj.frame.iter().map(|x| jvalues(x)).collect(),
    })
}

/// Largest deviations from orthonormality of the Frenet frame and from the
/// Frenet equations at `s` (the latter over frame members whose jets still
/// carry a derivative).
pub fn frenet_residuals(curve: &CurveSpec, s: f64, r_max: usize) -> Result<(f64, f64)> {
    let fj = frenet_jets(curve, s, r_max)?;
    let pa = &curve.ambient;
    let sig = pa.signature();
    let r = fj.frame.len();
    let mut ortho: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            let g = jdot(sig, &fj.frame[i], &fj.frame[j]).value();
            let want = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((g - want).abs());
        }
    }
    let pos = curve.jets(s, MAX_FRENET_ORDER)?;
    let pm = pa.m_position_jets(&pos);
    let kappa: Vec<f64> = fj.curvatures.iter().map(Jet::value).collect();
    let mut eqs: f64 = 0.0;
    for i in 0..r {
        if fj.frame[i][0].order() == 0 {
            continue;
        }
        let d = tangent_project_jets(pa, &pm, &jpartial(&fj.frame[i], 0));
        let mut want = vec![0.0; pa.dim()];
        if i > 0 {
            crate::tensor::axpy(&mut want, -kappa[i - 1], &jvalues(&fj.frame[i - 1]));
        }
        if i + 1 < r {
            crate::tensor::axpy(&mut want, kappa[i], &jvalues(&fj.frame[i + 1]));
        }
        let got = jvalues(&d);
        let dev = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        eqs = eqs.max(dev);
    }
    Ok((ortho, eqs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveClass {
    Geodesic,
    Circle,
    Helix,
    Frenet(usize),
    NonConstantCurvature,
}

impl std::fmt::Display for CurveClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveClass::Geodesic => write!(f, "geodesic"),
            CurveClass::Circle => write!(f, "circle"),
            CurveClass::Helix => write!(f, "helix"),
            CurveClass::Frenet(r) => write!(f, "frenet({r})"),
            CurveClass::NonConstantCurvature => write!(f, "non-constant-curvature"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveClassification {
    pub class: CurveClass,
    pub order: usize,
    pub mean_curvatures: Vec<f64>,
    pub spreads: Vec<f64>,
}

/// Evenly spaced sample parameters strictly inside the curve's interval.
pub fn sample_parameters(curve: &CurveSpec, samples: usize) -> Vec<f64> {
    let (a, b) = curve.interval;
    (0..samples)
        .map(|j| a + (b - a) * (j as f64 + 0.5) / samples as f64)
        .collect()
}

pub fn classify_curve(curve: &CurveSpec, samples: usize) -> Result<CurveClassification> {
    if samples < 16 {
        return Err(Error::Parameter(format!(
            "need at least 16 samples, got {samples}"
        )));
    }
    let data = sample_parameters(curve, samples)
        .into_iter()
        .map(|s| frenet_apparatus(curve, s, MAX_FRENET_ORDER))
        .collect::<Result<Vec<_>>>()?;
    let order = data.iter().map(FrenetData::order).max().unwrap_or(1);
    let uniform = data.iter().all(|d| d.order() == order);
    let mut means = Vec::new();
    let mut spreads = Vec::new();
    for i in 0..order.saturating_sub(1) {
        let ks: Vec<f64> = data
            .iter()
            .filter_map(|d| d.curvatures.get(i).copied())
            .collect();
        let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        means.push(ks.iter().sum::<f64>() / ks.len() as f64);
        spreads.push(hi - lo);
    }
    let constant = uniform
        && means
            .iter()
            .zip(&spreads)
            .all(|(m, s)| *s <= 1e-6 * (1.0 + m.abs()));
    let class = if !constant {
        CurveClass::NonConstantCurvature
    } else {
        match order {
            1 => CurveClass::Geodesic,
            2 => CurveClass::Circle,
            3 => CurveClass::Helix,
            r => CurveClass::Frenet(r),
        }
    };
    Ok(CurveClassification {
        class,
        order,
        mean_curvatures: means,
        spreads,
    })
}
