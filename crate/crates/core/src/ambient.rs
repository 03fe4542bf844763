//! The space form M^n(c) through its standard embedding and the product
//! M^n(c)×ℝ.
//!
//! Curved models live in ℝ^{n+1} (sphere, ⟨x,x⟩ = 1/c) or in Minkowski space
//! ℝ^{1,n} (upper hyperboloid sheet, ⟨x,x⟩_L = 1/c); the ℝ factor is appended
//! as the last coordinate, so ξ is the last axis. The flat model is plain
//! ℝ^n × ℝ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{CircleParams, CurveKind, CurveSpec};
use crate::tensor::{axpy, scaled, sdot, Jet};

/// Tangency tolerance for precondition checks on ambient vectors.
const TANGENT_TOL: f64 = 1e-10;
/// Largest on-manifold residual accepted by projections.
const ON_MANIFOLD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Sphere,
    Hyperboloid,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    c: f64,
    n: usize,
}

impl SpaceForm {
    pub fn new(c: f64, n: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::Parameter(format!(
                "space-form dimension must be 2..=4, got {n}"
            )));
        }
        if !c.is_finite() {
            return Err(Error::Parameter(format!(
                "curvature must be finite, got {c}"
            )));
        }
        Ok(SpaceForm { c, n })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> Model {
        if self.c > 0.0 {
            Model::Sphere
        } else if self.c < 0.0 {
            Model::Hyperboloid
        } else {
            Model::Flat
        }
    }

    /// r = 1/√|c| for curved models, ∞ for the flat one.
    pub fn radius(&self) -> f64 {
        if self.c == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.c.abs().sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductAmbient {
    sf: SpaceForm,
    signature: Vec<f64>,
}

impl ProductAmbient {
    pub fn new(sf: SpaceForm) -> Self {
        let d = match sf.model() {
            Model::Flat => sf.n + 1,
            _ => sf.n + 2,
        };
        let mut signature = vec![1.0; d];
        if sf.model() == Model::Hyperboloid {
            signature[0] = -1.0;
        }
        ProductAmbient { sf, signature }
    }

    pub fn with(c: f64, n: usize) -> Result<Self> {
        Ok(Self::new(SpaceForm::new(c, n)?))
    }

    pub fn space_form(&self) -> &SpaceForm {
        &self.sf
    }

    pub fn c(&self) -> f64 {
        self.sf.c
    }

    pub fn n(&self) -> usize {
        self.sf.n
    }

    /// Embedding dimension d.
    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    /// Number of coordinates in the M-factor block.
    pub fn m_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn signature(&self) -> &[f64] {
        &self.signature
    }

    pub fn xi_index(&self) -> usize {
        self.dim() - 1
    }

    pub fn xi(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        x[self.xi_index()] = 1.0;
        x
    }

    pub fn is_curved(&self) -> bool {
        self.sf.model() != Model::Flat
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        sdot(&self.signature, u, v)
    }

    /// ⟨dπ u, dπ v⟩: the inner product of the M-factor parts.
    pub fn m_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = self.m_dim();
        sdot(&self.signature[..m], &u[..m], &v[..m])
    }

    /// The M-factor block of a point, padded with a zero ℝ coordinate. This is
    /// the normal of M^n(c)×ℝ inside the embedding space.
    pub fn m_position(&self, p: &[f64]) -> Vec<f64> {
        let mut q = p.to_vec();
        q[self.xi_index()] = 0.0;
        q
    }

    pub fn m_position_jets(&self, p: &[Jet]) -> Vec<Jet> {
        let mut q = p.to_vec();
        let last = self.xi_index();
        q[last] = Jet::zero(p[0].vars(), p[0].order());
        q
    }

    /// The canonical base point (r, 0, …, 0; 0), or the origin when flat.
    pub fn canonical_point(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        if self.is_curved() {
            p[0] = self.sf.radius();
        }
        p
    }

    pub fn on_manifold_residual_raw(&self, p: &[f64]) -> f64 {
        if !self.is_curved() {
            return 0.0;
        }
        if self.sf.model() == Model::Hyperboloid && p[0] <= 0.0 {
            return f64::INFINITY;
        }
        (self.m_inner(p, p) - 1.0 / self.sf.c).abs()
    }

    pub fn on_manifold_residual(&self, p: &AmbientPoint) -> f64 {
        self.on_manifold_residual_raw(&p.coords)
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Precondition(format!(
                "point has {} coordinates, ambient needs {}",
                p.len(),
                self.dim()
            )));
        }
        let r = self.on_manifold_residual_raw(p);
        if r > ON_MANIFOLD_TOL {
            return Err(Error::Precondition(format!(
                "base point off M^n(c)×ℝ (residual {r:e})"
            )));
        }
        Ok(())
    }

    /// Removes the component along the embedding normal at `p`.
    pub fn tangent_project_raw(&self, p: &[f64], w: &[f64]) -> Vec<f64> {
        if !self.is_curved() {
            return w.to_vec();
        }
        let pm = self.m_position(p);
        let k = self.inner(w, &pm) / self.inner(&pm, &pm);
        let mut out = w.to_vec();
        axpy(&mut out, -k, &pm);
        out
    }

    pub fn tangent_residual(&self, p: &[f64], w: &[f64]) -> f64 {
        if !self.is_curved() {
            return 0.0;
        }
        let pm = self.m_position(p);
        self.inner(w, &pm).abs() * self.sf.c.abs().sqrt()
    }

    fn check_tangent(&self, p: &[f64], w: &[f64]) -> Result<()> {
        let r = self.tangent_residual(p, w);
        if r > TANGENT_TOL {
            return Err(Error::Precondition(format!(
                "vector not tangent to M^n(c)×ℝ (normal component {r:e})"
            )));
        }
        Ok(())
    }

    /// c⟨X_M, Y_M⟩ p_M: the term taking flat derivatives to ∇̄.
    pub fn connection_offset(&self, p: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
        if !self.is_curved() {
            return vec![0.0; self.dim()];
        }
        let pm = self.m_position(p);
        scaled(&pm, self.sf.c * self.m_inner(x, y))
    }

    /// Curvature tensor on raw coordinate vectors (no tangency check).
    pub fn curvature_raw(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let xi = self.xi();
        product_curvature(self.sf.c, |a, b| self.inner(a, b), &xi, x, y, z)
    }
}

/// R̄(X,Y)Z of M^n(c)×ℝ for vectors expressed in any basis, given the inner
/// product of that basis and the coordinates of ξ.
pub fn product_curvature<F>(
    c: f64,
    inner: F,
    xi: &[f64],
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Vec<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let yz = inner(y, z);
    let xz = inner(x, z);
    let yx = inner(y, xi);
    let xx = inner(x, xi);
    let zx = inner(z, xi);
    let mut out = vec![0.0; x.len()];
    axpy(&mut out, c * (yz - yx * zx), x);
    axpy(&mut out, c * (-xz + xx * zx), y);
    axpy(&mut out, c * (xz * yx - yz * xx), xi);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub coords: Vec<f64>,
}

impl AmbientPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        AmbientPoint { coords }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientVector {
    pub coords: Vec<f64>,
    pub base: AmbientPoint,
}

impl AmbientVector {
    pub fn new(base: &AmbientPoint, coords: Vec<f64>) -> Self {
        AmbientVector {
            coords,
            base: base.clone(),
        }
    }
}

fn same_base(vs: &[&AmbientVector]) -> Result<()> {
    let b = &vs[0].base;
    if vs.iter().any(|v| &v.base != b) {
        return Err(Error::Base);
    }
    Ok(())
}

pub fn metric_inner(pa: &ProductAmbient, u: &AmbientVector, v: &AmbientVector) -> Result<f64> {
    same_base(&[u, v])?;
    Ok(pa.inner(&u.coords, &v.coords))
}

pub fn on_manifold_residual(pa: &ProductAmbient, p: &AmbientPoint) -> f64 {
    pa.on_manifold_residual(p)
}

pub fn tangent_project(
    pa: &ProductAmbient,
    p: &AmbientPoint,
    w: &AmbientVector,
) -> Result<AmbientVector> {
    pa.check_point(&p.coords)?;
    if &w.base != p {
        return Err(Error::Base);
    }
    Ok(AmbientVector::new(
        p,
        pa.tangent_project_raw(&p.coords, &w.coords),
    ))
}

/// Turns the flat derivative D_X Y of a tangent field into ∇̄_X Y.
pub fn levi_civita_correction(
    pa: &ProductAmbient,
    p: &AmbientPoint,
    x: &AmbientVector,
    y_field_derivative: &AmbientVector,
    y: &AmbientVector,
) -> Result<AmbientVector> {
    same_base(&[x, y_field_derivative, y])?;
    pa.check_point(&p.coords)?;
    pa.check_tangent(&p.coords, &x.coords)?;
    pa.check_tangent(&p.coords, &y.coords)?;
    let mut out = y_field_derivative.coords.clone();
    axpy(
        &mut out,
        1.0,
        &pa.connection_offset(&p.coords, &x.coords, &y.coords),
    );
    Ok(AmbientVector::new(p, out))
}

pub fn curvature_tensor(
    pa: &ProductAmbient,
    p: &AmbientPoint,
    x: &AmbientVector,
    y: &AmbientVector,
    z: &AmbientVector,
) -> Result<AmbientVector> {
    same_base(&[x, y, z])?;
    pa.check_point(&p.coords)?;
    for v in [x, y, z] {
        pa.check_tangent(&p.coords, &v.coords)?;
    }
    Ok(AmbientVector::new(
        p,
        pa.curvature_raw(&x.coords, &y.coords, &z.coords),
    ))
}

/// A unit-speed circle of geodesic curvature `kappa` through `p`, leaving
/// along `u1` and bending towards `u2`, lying in the slice through `p`.
pub fn spaceform_circle(
    sf: &SpaceForm,
    p: &AmbientPoint,
    u1: &AmbientVector,
    u2: &AmbientVector,
    kappa: f64,
) -> Result<CurveSpec> {
    let pa = ProductAmbient::new(*sf);
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Parameter(format!(
            "curvature must be ≥ 0, got {kappa}"
        )));
    }
    pa.check_point(&p.coords)?;
    same_base(&[u1, u2])?;
    let xi = pa.xi();
    for u in [u1, u2] {
        pa.check_tangent(&p.coords, &u.coords)?;
        if pa.inner(&u.coords, &xi).abs() > TANGENT_TOL {
            return Err(Error::Precondition(
                "circle directions must be horizontal".into(),
            ));
        }
    }
    let g = [
        pa.inner(&u1.coords, &u1.coords) - 1.0,
        pa.inner(&u2.coords, &u2.coords) - 1.0,
        pa.inner(&u1.coords, &u2.coords),
    ];
    if g.iter().any(|e| e.abs() > 1e-10) {
        return Err(Error::Precondition("u1, u2 must be orthonormal".into()));
    }
    let r = sf.radius();
    let phi = match sf.model() {
        Model::Sphere => (1.0 / (kappa * r)).atan(),
        Model::Hyperboloid => {
            let x = kappa * r;
            if x <= 1.0 {
                return Err(Error::UnsupportedCurve(format!(
                    "κ² = {:.6} ≤ |c| = {:.6}: horocycle or equidistant, not a circle",
                    kappa * kappa,
                    sf.c().abs()
                )));
            }
            (1.0 / x).atanh()
        }
        Model::Flat => 0.0,
    };
    let params = CircleParams {
        c: sf.c(),
        p: p.coords.clone(),
        u1: u1.coords.clone(),
        u2: u2.coords.clone(),
        kappa,
        phi,
    };
    let period = params.period();
    let interval = if period.is_finite() {
        (0.0, period)
    } else {
        (-10.0, 10.0)
    };
    Ok(CurveSpec::new(
        pa,
        CurveKind::Circle(params),
        interval,
        true,
    ))
}

/// Convenience: coordinate axis `k` as an ambient vector at `p`.
pub fn axis(p: &AmbientPoint, k: usize) -> AmbientVector {
    let mut v = vec![0.0; p.coords.len()];
    v[k] = 1.0;
    AmbientVector::new(p, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tangent(pa: &ProductAmbient, p: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let w: Vec<f64> = (0..pa.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        pa.tangent_project_raw(p, &w)
    }

    fn random_point(pa: &ProductAmbient, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let m = pa.m_dim();
        let mut p: Vec<f64> = (0..pa.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        match pa.space_form().model() {
            Model::Sphere => {
                let nrm = p[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
                let r = pa.space_form().radius();
                p[..m].iter_mut().for_each(|x| *x *= r / nrm);
            }
            Model::Hyperboloid => {
                let s: f64 = p[1..m].iter().map(|x| x * x).sum();
                let r = pa.space_form().radius();
                p[0] = (r * r + s).sqrt();
            }
            Model::Flat => {}
        }
        p
    }

    #[test]
    fn inner_product_examples() {
        let sphere = ProductAmbient::with(1.0, 4).unwrap();
        let p = AmbientPoint::new(sphere.canonical_point());
        let xi = AmbientVector::new(&p, sphere.xi());
        assert_eq!(metric_inner(&sphere, &xi, &xi).unwrap(), 1.0);
        assert_eq!(
            metric_inner(&sphere, &axis(&p, 1), &axis(&p, 2)).unwrap(),
            0.0
        );

        let hyp = ProductAmbient::with(-1.0, 2).unwrap();
        let q = AmbientPoint::new(hyp.canonical_point());
        let e0 = axis(&q, 0);
        assert_eq!(metric_inner(&hyp, &e0, &e0).unwrap(), -1.0);

        let other = AmbientPoint::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            metric_inner(&sphere, &axis(&p, 1), &axis(&other, 1)),
            Err(Error::Base)
        );
    }

    #[test]
    fn on_manifold_examples() {
        let s = ProductAmbient::with(1.0, 4).unwrap();
        assert_eq!(
            s.on_manifold_residual_raw(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            0.0
        );
        assert!((s.on_manifold_residual_raw(&[1.1, 0.0, 0.0, 0.0, 0.0, 0.0]) - 0.21).abs() < 1e-14);
        let h = ProductAmbient::with(-1.0, 2).unwrap();
        assert_eq!(h.on_manifold_residual_raw(&[1.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(
            h.on_manifold_residual_raw(&[-1.0, 0.0, 0.0, 0.0]),
            f64::INFINITY
        );
    }

    #[test]
    fn projection_examples() {
        let s = ProductAmbient::with(1.0, 4).unwrap();
        let p = AmbientPoint::new(s.canonical_point());
        let xi = AmbientVector::new(&p, s.xi());
        assert_eq!(tangent_project(&s, &p, &xi).unwrap().coords, s.xi());
        let normal = axis(&p, 0);
        let proj = tangent_project(&s, &p, &normal).unwrap();
        assert!(proj.coords.iter().all(|x| x.abs() < 1e-15));

        let off = AmbientPoint::new(vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            tangent_project(&s, &off, &AmbientVector::new(&off, s.xi())),
            Err(Error::Precondition(_))
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in [1.0, -1.0, 0.5, -2.0] {
            let pa = ProductAmbient::with(c, 3).unwrap();
            for _ in 0..20 {
                let p = random_point(&pa, &mut rng);
                let w: Vec<f64> = (0..pa.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let once = pa.tangent_project_raw(&p, &w);
                let twice = pa.tangent_project_raw(&p, &once);
                let d: f64 = once
                    .iter()
                    .zip(&twice)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(d <= 1e-12);
                assert!(pa.tangent_residual(&p, &once) <= 1e-12);
            }
        }
    }

    #[test]
    fn geodesics_have_zero_covariant_acceleration() {
        // Great circle on S²(1) × ℝ at s = 0.3.
        let pa = ProductAmbient::with(1.0, 2).unwrap();
        let s = 0.3f64;
        let p = AmbientPoint::new(vec![s.cos(), s.sin(), 0.0, 0.0]);
        let vel = AmbientVector::new(&p, vec![-s.sin(), s.cos(), 0.0, 0.0]);
        let acc = AmbientVector::new(&p, vec![-s.cos(), -s.sin(), 0.0, 0.0]);
        let cov = levi_civita_correction(&pa, &p, &vel, &acc, &vel).unwrap();
        assert!(cov.coords.iter().all(|x| x.abs() < 1e-15));

        // Vertical line.
        let q = AmbientPoint::new(vec![1.0, 0.0, 0.0, 0.7]);
        let up = AmbientVector::new(&q, pa.xi());
        let zero = AmbientVector::new(&q, vec![0.0; 4]);
        let cov = levi_civita_correction(&pa, &q, &up, &zero, &up).unwrap();
        assert!(cov.coords.iter().all(|x| *x == 0.0));

        // Hyperbolic geodesic through (1,0,0;0): (cosh s, sinh s, 0; 0).
        let ph = ProductAmbient::with(-1.0, 2).unwrap();
        for s in [0.0f64, 0.4, 1.3] {
            let p = AmbientPoint::new(vec![s.cosh(), s.sinh(), 0.0, 0.0]);
            let vel = AmbientVector::new(&p, vec![s.sinh(), s.cosh(), 0.0, 0.0]);
            let acc = AmbientVector::new(&p, vec![s.cosh(), s.sinh(), 0.0, 0.0]);
            let cov = levi_civita_correction(&ph, &p, &vel, &acc, &vel).unwrap();
            assert!(cov.coords.iter().map(|x| x.abs()).fold(0.0, f64::max) <= 1e-9);
        }
    }

    #[test]
    fn curvature_examples() {
        let pa = ProductAmbient::with(0.7, 3).unwrap();
        let p = AmbientPoint::new(pa.canonical_point());
        let x = axis(&p, 1);
        let y = axis(&p, 2);
        let xi = AmbientVector::new(&p, pa.xi());
        let r = curvature_tensor(&pa, &p, &x, &x, &y).unwrap();
        assert!(r.coords.iter().all(|v| *v == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = AmbientVector::new(&p, random_tangent(&pa, &p.coords, &mut rng));
        let b = AmbientVector::new(&p, random_tangent(&pa, &p.coords, &mut rng));
        let r = curvature_tensor(&pa, &p, &a, &b, &xi).unwrap();
        assert!(r.coords.iter().all(|v| v.abs() < 1e-15));
        let r = curvature_tensor(&pa, &p, &x, &y, &y).unwrap();
        for (got, want) in r.coords.iter().zip(scaled(&x.coords, 0.7)) {
            assert!((got - want).abs() < 1e-15);
        }
        // Normal input rejected.
        let bad = axis(&p, 0);
        assert!(curvature_tensor(&pa, &p, &bad, &x, &y).is_err());
    }

    #[test]
    fn curvature_symmetries_and_projection_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for c in [1.0, -1.0, 2.5, -0.3, 0.0] {
            for n in 2..=4 {
                let pa = ProductAmbient::with(c, n).unwrap();
                for _ in 0..10 {
                    let p = random_point(&pa, &mut rng);
                    let [x, y, z, w] = [0; 4].map(|_| random_tangent(&pa, &p, &mut rng));
                    let rxyz = pa.curvature_raw(&x, &y, &z);
                    let ryxz = pa.curvature_raw(&y, &x, &z);
                    for (a, b) in rxyz.iter().zip(&ryxz) {
                        assert!((a + b).abs() <= 1e-12);
                    }
                    let lhs = pa.inner(&rxyz, &w);
                    let rhs = pa.inner(&pa.curvature_raw(&x, &y, &w), &z);
                    assert!((lhs + rhs).abs() <= 1e-12);
                    // First Bianchi.
                    let b1 = pa.curvature_raw(&x, &y, &z);
                    let b2 = pa.curvature_raw(&y, &z, &x);
                    let b3 = pa.curvature_raw(&z, &x, &y);
                    for i in 0..pa.dim() {
                        assert!((b1[i] + b2[i] + b3[i]).abs() <= 1e-12);
                    }
                    // c{⟨dπY,dπZ⟩⟨dπX,dπW⟩ − ⟨dπX,dπZ⟩⟨dπY,dπW⟩}
                    let proj = c
                        * (pa.m_inner(&y, &z) * pa.m_inner(&x, &w)
                            - pa.m_inner(&x, &z) * pa.m_inner(&y, &w));
                    assert!((lhs - proj).abs() <= 1e-12, "c={c} n={n}");
                }
            }
        }
    }

    #[test]
    fn hyperbolic_circle_bounds() {
        let sf = SpaceForm::new(-1.0, 2).unwrap();
        let p = AmbientPoint::new(ProductAmbient::new(sf).canonical_point());
        let res = spaceform_circle(&sf, &p, &axis(&p, 1), &axis(&p, 2), 0.8);
        assert!(matches!(res, Err(Error::UnsupportedCurve(_))));
        assert!(spaceform_circle(&sf, &p, &axis(&p, 1), &axis(&p, 2), 1.0).is_err());
        assert!(spaceform_circle(&sf, &p, &axis(&p, 1), &axis(&p, 2), 1.2).is_ok());
    }
}
