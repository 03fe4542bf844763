//! Immersions known only on a regular parameter grid.
//!
//! Jets at an arbitrary parameter point come from the tensor-product
//! Lagrange interpolant over a (D+1)×(D+1) block of nodes centred on the
//! point, expanded in Taylor form up to order 4.

use serde::{Deserialize, Serialize};

use crate::ambient::ProductAmbient;
use crate::error::{Error, Result};
use crate::tensor::{Jet, JetVec};

/// Default stencil degree. Degree 8 keeps fourth-derivative error at
/// O(h⁵) on the gallery grids.
pub const DEFAULT_STENCIL_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, count: usize) -> Self {
        Axis { start, step, count }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.node(self.count - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }
}

/// Where a sampled surface came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub case: String,
    pub params: Vec<(String, f64)>,
    pub step: f64,
    pub integrator: String,
    /// Largest frame Gram deviation over the grid.
    pub frame_drift: f64,
    /// Largest on-manifold residual over the grid.
    pub manifold_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledImmersion {
    ambient: ProductAmbient,
    s_axis: Axis,
    t_axis: Axis,
    /// Row-major in s: node (i, j) at index i * t_axis.count + j.
    positions: Vec<Vec<f64>>,
    /// Adapted frame (tangents then normals) per node, when known.
    frames: Option<Vec<Vec<Vec<f64>>>>,
    stencil_degree: usize,
    provenance: Provenance,
}

impl SampledImmersion {
    pub fn new(
        ambient: ProductAmbient,
        s_axis: Axis,
        t_axis: Axis,
        positions: Vec<Vec<f64>>,
        frames: Option<Vec<Vec<Vec<f64>>>>,
        provenance: Provenance,
    ) -> Result<Self> {
        let nodes = s_axis.count * t_axis.count;
        if positions.len() != nodes {
            return Err(Error::Parameter(format!(
                "grid has {} positions, axes need {nodes}",
                positions.len()
            )));
        }
        if let Some(bad) = positions.iter().position(|p| p.len() != ambient.dim()) {
            return Err(Error::Parameter(format!(
                "node {bad} has {} coordinates, ambient needs {}",
                positions[bad].len(),
                ambient.dim()
            )));
        }
        if let Some(f) = &frames {
            if f.len() != nodes {
                return Err(Error::Parameter("frame count does not match grid".into()));
            }
        }
        if !(s_axis.step > 0.0 && t_axis.step > 0.0) {
            return Err(Error::Parameter("grid steps must be positive".into()));
        }
        let degree = DEFAULT_STENCIL_DEGREE;
        if s_axis.count <= degree || t_axis.count <= degree {
            return Err(Error::Parameter(format!(
                "grid must have more than {degree} nodes per direction"
            )));
        }
        Ok(SampledImmersion {
            ambient,
            s_axis,
            t_axis,
            positions,
            frames,
            stencil_degree: degree,
            provenance,
        })
    }

    pub fn with_stencil_degree(mut self, degree: usize) -> Result<Self> {
        if degree < 4 || degree >= self.s_axis.count || degree >= self.t_axis.count {
            return Err(Error::Parameter(format!(
                "stencil degree {degree} unsupported"
            )));
        }
        self.stencil_degree = degree;
        Ok(self)
    }

    pub fn ambient(&self) -> &ProductAmbient {
        &self.ambient
    }

    pub fn axes(&self) -> (Axis, Axis) {
        (self.s_axis, self.t_axis)
    }

    pub fn stencil_degree(&self) -> usize {
        self.stencil_degree
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn position(&self, i: usize, j: usize) -> &[f64] {
        &self.positions[i * self.t_axis.count + j]
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn frame(&self, i: usize, j: usize) -> Option<&[Vec<f64>]> {
        self.frames
            .as_ref()
            .map(|f| f[i * self.t_axis.count + j].as_slice())
    }

    /// Perturbs one stored coordinate (fault injection for tests).
    pub fn perturb(&mut self, i: usize, j: usize, coord: usize, delta: f64) {
        let k = i * self.t_axis.count + j;
        self.positions[k][coord] += delta;
    }

    /// The region in which every stencil is centred.
    pub fn interior_domain(&self) -> [[f64; 2]; 2] {
        let half = (self.stencil_degree / 2) as f64;
        [
            [
                self.s_axis.start + half * self.s_axis.step,
                self.s_axis.end() - half * self.s_axis.step,
            ],
            [
                self.t_axis.start + half * self.t_axis.step,
                self.t_axis.end() - half * self.t_axis.step,
            ],
        ]
    }

    pub fn jets_at(&self, s: f64, t: f64, order: usize) -> Result<JetVec> {
        let (i0, wu) = lagrange_weights(&self.s_axis, s, self.stencil_degree, order)?;
        let (j0, wv) = lagrange_weights(&self.t_axis, t, self.stencil_degree, order)?;
        let d = self.ambient.dim();
        let deg = self.stencil_degree;
        let mut coeffs = vec![vec![0.0; (order + 1) * (order + 2) / 2]; d];
        // Contract over t first: partial[i][b][k] = Σ_j wv[j][b] f_ij[k].
        let mut partial = vec![vec![vec![0.0; d]; order + 1]; deg + 1];
        for (ii, row) in partial.iter_mut().enumerate() {
            for (jj, wvj) in wv.iter().enumerate() {
                let p = self.position(i0 + ii, j0 + jj);
                for (b, wb) in wvj.iter().enumerate() {
                    for k in 0..d {
                        row[b][k] += wb * p[k];
                    }
                }
            }
        }
        let mut idx = 0;
        for total in 0..=order {
            for b in 0..=total {
                let a = total - b;
                for k in 0..d {
                    let mut acc = 0.0;
                    for (ii, wui) in wu.iter().enumerate() {
                        acc += wui[a] * partial[ii][b][k];
                    }
                    coeffs[k][idx] = acc;
                }
                idx += 1;
            }
        }
        coeffs
            .iter()
            .map(|c| Jet::from_coeffs(2, order, c))
            .collect()
    }
}

/// Taylor coefficients (in physical units) of the Lagrange basis at `x`.
/// Returns the first stencil node and, per stencil node, coefficients 0..=order.
fn lagrange_weights(
    axis: &Axis,
    x: f64,
    degree: usize,
    order: usize,
) -> Result<(usize, Vec<Vec<f64>>)> {
    let slack = 1e-9 * axis.step;
    if !(x >= axis.start - slack && x <= axis.end() + slack) {
        return Err(Error::Domain(format!(
            "parameter {x} outside sampled range [{}, {}]",
            axis.start,
            axis.end()
        )));
    }
    let pos = (x - axis.start) / axis.step;
    let half = (degree / 2) as isize;
    let max_start = (axis.count - 1 - degree) as isize;
    let i0 = (pos.round() as isize - half).clamp(0, max_start) as usize;
    let local = pos - i0 as f64;
    let mut out = Vec::with_capacity(degree + 1);
    for j in 0..=degree {
        let mut l = Jet::constant(1, order, 1.0);
        for m in 0..=degree {
            if m == j {
                continue;
            }
            let factor =
                Jet::variable(1, order, 0, local - m as f64) * (1.0 / (j as f64 - m as f64));
            l = l * factor;
        }
        let mut scale = 1.0;
        let coeffs = (0..=order)
            .map(|a| {
                let v = l.coeff(a, 0) * scale;
                scale /= axis.step;
                v
            })
            .collect();
        out.push(coeffs);
    }
    Ok((i0, out))
}
