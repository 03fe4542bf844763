//! Independent oracles: finite differences on positions and the exact
//! solution of the constant-coefficient frame flow.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pmc_helix::reconstruct::{FrameOdeData, FrameState};

pub type Vec64 = Vec<f64>;

fn lin(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec64 {
    x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
}

fn richardson(d: impl Fn(f64) -> Vec64, h: f64) -> Vec64 {
    let (a, b, c) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = lin(4.0 / 3.0, &b, -1.0 / 3.0, &a);
    let r2 = lin(4.0 / 3.0, &c, -1.0 / 3.0, &b);
    lin(16.0 / 15.0, &r2, -1.0 / 15.0, &r1)
}

/// First derivative of a vector function by Richardson-extrapolated central differences.
pub fn d1(f: &dyn Fn(f64) -> Vec64, x: f64, h: f64) -> Vec64 {
    richardson(|h| lin(0.5 / h, &f(x + h), -0.5 / h, &f(x - h)), h)
}

/// Second derivative, same scheme.
pub fn d2(f: &dyn Fn(f64) -> Vec64, x: f64, h: f64) -> Vec64 {
    richardson(
        |h| {
            let (p, m, z) = (f(x + h), f(x - h), f(x));
            p.iter()
                .zip(&m)
                .zip(&z)
                .map(|((p, m), z)| (p - 2.0 * z + m) / (h * h))
                .collect()
        },
        h,
    )
}

/// Ambient (ℝ^{d}, signature) data of M^n(c)×ℝ, independent of the crate.
#[derive(Clone)]
pub struct Model {
    pub c: f64,
    pub sig: Vec64,
}

impl Model {
    pub fn new(c: f64, n: usize) -> Self {
        let d = if c == 0.0 { n + 1 } else { n + 2 };
        let mut sig = vec![1.0; d];
        if c < 0.0 {
            sig[0] = -1.0;
        }
        Model { c, sig }
    }

    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.sig)
            .map(|((a, b), s)| a * b * s)
            .sum()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.dot(x, x).abs().sqrt()
    }

    /// Normal of M inside its linear model space (absent when flat).
    fn m_normal(&self, p: &[f64]) -> Option<Vec64> {
        if self.c == 0.0 {
            return None;
        }
        let mut q = p.to_vec();
        *q.last_mut().unwrap() = 0.0;
        Some(q)
    }

    /// Removes the components of `w` along span(vs) ∪ {M-normal at p}.
    pub fn project_out(&self, p: &[f64], vs: &[Vec64], w: &[f64]) -> Vec64 {
        let mut basis: Vec<Vec64> = vs.to_vec();
        if let Some(q) = self.m_normal(p) {
            basis.push(q);
        }
        let k = basis.len();
        let g = DMatrix::from_fn(k, k, |i, j| self.dot(&basis[i], &basis[j]));
        let rhs = DVector::from_fn(k, |i, _| self.dot(&basis[i], w));
        let coef = g.lu().solve(&rhs).expect("independent basis");
        let mut out = w.to_vec();
        for (b, a) in basis.iter().zip(coef.iter()) {
            out = lin(1.0, &out, -a, b);
        }
        out
    }

    /// Tangential part to M×ℝ.
    pub fn tangent(&self, p: &[f64], w: &[f64]) -> Vec64 {
        self.project_out(p, &[], w)
    }
}

pub type Surface<'a> = &'a dyn Fn([f64; 2]) -> Vec64;

const H_SURF: f64 = 1e-2;

fn partials(f: Surface, uv: [f64; 2]) -> [Vec64; 2] {
    [
        d1(&|x| f([x, uv[1]]), uv[0], H_SURF),
        d1(&|y| f([uv[0], y]), uv[1], H_SURF),
    ]
}

fn hessian(f: Surface, uv: [f64; 2]) -> [[Vec64; 2]; 2] {
    let uu = d2(&|x| f([x, uv[1]]), uv[0], H_SURF);
    let vv = d2(&|y| f([uv[0], y]), uv[1], H_SURF);
    let uv_ = d1(&|y| d1(&|x| f([x, y]), uv[0], H_SURF), uv[1], H_SURF);
    [[uu, uv_.clone()], [uv_, vv]]
}

fn metric(m: &Model, fp: &[Vec64; 2]) -> [[f64; 2]; 2] {
    [
        [m.dot(&fp[0], &fp[0]), m.dot(&fp[0], &fp[1])],
        [m.dot(&fp[1], &fp[0]), m.dot(&fp[1], &fp[1])],
    ]
}

fn inv2(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ]
}

/// Coordinate components of an ambient tangent vector.
pub fn coords_of(m: &Model, f: Surface, uv: [f64; 2], e: &[f64]) -> [f64; 2] {
    let fp = partials(f, uv);
    let gi = inv2(metric(m, &fp));
    let r = [m.dot(&fp[0], e), m.dot(&fp[1], e)];
    [
        gi[0][0] * r[0] + gi[0][1] * r[1],
        gi[1][0] * r[0] + gi[1][1] * r[1],
    ]
}

/// σ(X, Y) for X, Y given in coordinates.
pub fn sigma(m: &Model, f: Surface, uv: [f64; 2], x: [f64; 2], y: [f64; 2]) -> Vec64 {
    let p = f(uv);
    let fp = partials(f, uv);
    let hs = hessian(f, uv);
    let mut w = vec![0.0; p.len()];
    for i in 0..2 {
        for j in 0..2 {
            w = lin(1.0, &w, x[i] * y[j], &hs[i][j]);
        }
    }
    m.project_out(&p, &fp, &w)
}

pub fn mean_curvature(m: &Model, f: Surface, uv: [f64; 2]) -> Vec64 {
    let p = f(uv);
    let fp = partials(f, uv);
    let gi = inv2(metric(m, &fp));
    let hs = hessian(f, uv);
    let mut w = vec![0.0; p.len()];
    for i in 0..2 {
        for j in 0..2 {
            w = lin(1.0, &w, 0.5 * gi[i][j], &hs[i][j]);
        }
    }
    m.project_out(&p, &fp, &w)
}

/// ∇⊥_X H for X given in coordinates.
pub fn nabla_perp_h(m: &Model, f: Surface, uv: [f64; 2], x: [f64; 2]) -> Vec64 {
    let h_outer = 2e-2;
    let du = d1(&|s| mean_curvature(m, f, [s, uv[1]]), uv[0], h_outer);
    let dv = d1(&|t| mean_curvature(m, f, [uv[0], t]), uv[1], h_outer);
    let w = lin(x[0], &du, x[1], &dv);
    m.project_out(&f(uv), &partials(f, uv), &w)
}

/// Orthonormal frame from ∂u, ∂v by Gram–Schmidt, in coordinates.
pub fn orthonormal_coords(m: &Model, f: Surface, uv: [f64; 2]) -> [[f64; 2]; 2] {
    let g = metric(m, &partials(f, uv));
    let a = 1.0 / g[0][0].sqrt();
    let e1 = [a, 0.0];
    // e2 = (∂v − ⟨∂v,e1⟩e1)/|…|
    let proj = g[0][1] * a;
    let raw = [-proj * a, 1.0];
    let n2 =
        g[0][0] * raw[0] * raw[0] + 2.0 * g[0][1] * raw[0] * raw[1] + g[1][1] * raw[1] * raw[1];
    let s = 1.0 / n2.sqrt();
    [e1, [raw[0] * s, raw[1] * s]]
}

/// Largest |∇⊥_{E_a} H| over an orthonormal frame.
pub fn pmc_residual(m: &Model, f: Surface, uv: [f64; 2]) -> f64 {
    orthonormal_coords(m, f, uv)
        .iter()
        .map(|e| m.norm(&nabla_perp_h(m, f, uv, *e)))
        .fold(0.0, f64::max)
}

/// First two Frenet curvatures of a curve given by positions, any speed.
pub fn frenet_curvatures(m: &Model, g: &dyn Fn(f64) -> Vec64, s: f64) -> (f64, f64) {
    let h_in = 1e-2;
    let speed = |t: f64| m.norm(&d1(g, t, h_in));
    let x1 = |t: f64| {
        let v = d1(g, t, h_in);
        let n = m.norm(&v);
        v.iter().map(|x| x / n).collect::<Vec64>()
    };
    // ∇_{X1} X1 = tangential part of d/dt X1 / speed.
    let v2 = |t: f64| {
        let dx = d1(&x1, t, h_in);
        let sp = speed(t);
        m.tangent(&g(t), &dx)
            .iter()
            .map(|x| x / sp)
            .collect::<Vec64>()
    };
    let k1 = m.norm(&v2(s));
    let x2 = |t: f64| {
        let v = v2(t);
        let n = m.norm(&v);
        v.iter().map(|x| x / n).collect::<Vec64>()
    };
    let dx2 = d1(&x2, s, 2e-2);
    let sp = speed(s);
    let w = m
        .tangent(&g(s), &dx2)
        .iter()
        .map(|x| x / sp)
        .collect::<Vec64>();
    let w = lin(1.0, &w, k1, &x1(s));
    (k1, m.norm(&w))
}

/// Exact flow along E_a for length `len`: the constant-coefficient ODE is
/// linear coordinate-wise once ⟨E_a^M, E_B^M⟩ = δ_aB − ξ_a ξ_B is used.
pub fn exact_flow(data: &FrameOdeData, state: &FrameState, a: usize, len: f64) -> FrameState {
    let k = data.coefficients(a);
    let m = k.len();
    let c = data.ambient.c();
    let d = state.p.len();
    let mut out = state.clone();
    for coord in 0..d {
        let is_m = c != 0.0 && coord + 1 < d;
        let mut mat = DMatrix::<f64>::zeros(m + 1, m + 1);
        mat[(0, 1 + a)] = 1.0;
        for b in 0..m {
            for cc in 0..m {
                mat[(1 + b, 1 + cc)] = k[b][cc];
            }
            if is_m {
                let delta = if a == b { 1.0 } else { 0.0 };
                mat[(1 + b, 0)] = -c * (delta - data.xi[a] * data.xi[b]);
            }
        }
        let y0 = DVector::from_fn(m + 1, |i, _| {
            if i == 0 {
                state.p[coord]
            } else {
                state.frame[i - 1][coord]
            }
        });
        let y = (mat * len).exp() * y0;
        out.p[coord] = y[0];
        for b in 0..m {
            out.frame[b][coord] = y[1 + b];
        }
    }
    out
}

pub fn state_distance(a: &FrameState, b: &FrameState) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in a.p.iter().zip(&b.p) {
        worst = worst.max((x - y).abs());
    }
    for (u, v) in a.frame.iter().zip(&b.frame) {
        for (x, y) in u.iter().zip(v) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

/// Explicit torus helix in S³(c)×ℝ, written out independently.
pub fn torus_helix(r1: f64, r2: f64, slope: f64) -> impl Fn([f64; 2]) -> Vec64 {
    let alpha = (1.0 - slope * slope).sqrt() / r1;
    let beta = 1.0 / r2;
    move |[u, v]| {
        vec![
            r1 * (alpha * u).cos(),
            r1 * (alpha * u).sin(),
            r2 * (beta * v).cos(),
            r2 * (beta * v).sin(),
            slope * u,
        ]
    }
}
