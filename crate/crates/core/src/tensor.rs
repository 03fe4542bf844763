//! Truncated Taylor arithmetic ("jets") in one or two variables, plus the
//! handful of dense vector helpers the geometry code needs.
//!
//! A [`Jet`] stores the Taylor coefficients of a real quantity around a
//! point, up to total degree [`MAX_ORDER`]. Coefficients are kept in a dense
//! triangular layout ordered by total degree, so truncating a jet never moves
//! a coefficient. Operators (`+`, `-`, `*`) between jets of different order
//! truncate to the smaller order; [`Jet::product`] is the strict variant.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Highest retained total degree.
pub const MAX_ORDER: usize = 4;

const CAP: usize = 15;

/// Values whose magnitude is at or below this are outside the domain of
/// `sqrt` and `recip`.
pub const DOMAIN_EPS: f64 = 1e-12;

const MONO2: [(usize, usize); CAP] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[inline]
fn len_for(vars: usize, order: usize) -> usize {
    if vars == 1 {
        order + 1
    } else {
        (order + 1) * (order + 2) / 2
    }
}

#[inline]
fn index(vars: usize, a: usize, b: usize) -> usize {
    if vars == 1 {
        a
    } else {
        let t = a + b;
        t * (t + 1) / 2 + b
    }
}

#[inline]
fn mono(vars: usize, i: usize) -> (usize, usize) {
    if vars == 1 {
        (i, 0)
    } else {
        MONO2[i]
    }
}

/// Analytic functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analytic {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Recip,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    vars: u8,
    order: u8,
    c: [f64; CAP],
}

impl Jet {
    pub fn zero(vars: usize, order: usize) -> Self {
        assert!(vars == 1 || vars == 2, "jets support 1 or 2 variables");
        assert!(order <= MAX_ORDER, "jet order capped at {MAX_ORDER}");
        Jet {
            vars: vars as u8,
            order: order as u8,
            c: [0.0; CAP],
        }
    }

    pub fn constant(vars: usize, order: usize, value: f64) -> Self {
        let mut j = Self::zero(vars, order);
        j.c[0] = value;
        j
    }

    /// The coordinate function `var` (0 = u, 1 = v) expanded at `value`.
    pub fn variable(vars: usize, order: usize, var: usize, value: f64) -> Self {
        assert!(var < vars);
        let mut j = Self::constant(vars, order, value);
        if order >= 1 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    pub fn from_coeffs(vars: usize, order: usize, coeffs: &[f64]) -> Result<Self> {
        if !(vars == 1 || vars == 2) || order > MAX_ORDER {
            return Err(Error::Domain(format!(
                "unsupported jet shape ({vars} vars, order {order})"
            )));
        }
        let n = len_for(vars, order);
        if coeffs.len() != n {
            return Err(Error::Domain(format!(
                "expected {n} coefficients, got {}",
                coeffs.len()
            )));
        }
        let mut j = Self::zero(vars, order);
        j.c[..n].copy_from_slice(coeffs);
        Ok(j)
    }

    pub fn vars(&self) -> usize {
        self.vars as usize
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..len_for(self.vars(), self.order())]
    }

    /// Taylor coefficient of `u^a v^b` (zero beyond the retained order).
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.order() || (self.vars == 1 && b > 0) {
            0.0
        } else {
            self.c[index(self.vars(), a, b)]
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, value: f64) {
        assert!(a + b <= self.order() && (self.vars == 2 || b == 0));
        self.c[index(self.vars(), a, b)] = value;
    }

    /// Partial derivative ∂ᵤᵃ∂ᵥᵇ at the expansion point.
    pub fn derivative(&self, a: usize, b: usize) -> f64 {
        self.coeff(a, b) * FACT[a.min(4)] * FACT[b.min(4)]
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return *self;
        }
        let mut out = Jet::zero(self.vars(), order);
        let n = len_for(self.vars(), order);
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    fn same_shape(&self, other: &Jet) -> Result<()> {
        if self.vars != other.vars || self.order != other.order {
            return Err(Error::Shape {
                lhs_vars: self.vars(),
                lhs_order: self.order(),
                rhs_vars: other.vars(),
                rhs_order: other.order(),
            });
        }
        Ok(())
    }

    /// Truncated Cauchy product; both operands must share shape.
    pub fn product(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        Ok(mul_impl(self, other, self.order()))
    }

    /// Partial derivative as a jet of one lower order.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(var < self.vars());
        let vars = self.vars();
        let order = self.order().saturating_sub(1);
        let mut out = Jet::zero(vars, order);
        if self.order() == 0 {
            return out;
        }
        for i in 0..len_for(vars, order) {
            let (a, b) = mono(vars, i);
            let (src, factor) = if var == 0 {
                (index(vars, a + 1, b), (a + 1) as f64)
            } else {
                (index(vars, a, b + 1), (b + 1) as f64)
            };
            out.c[i] = factor * self.c[src];
        }
        out
    }

    pub fn apply(&self, f: Analytic) -> Result<Jet> {
        let x = self.value();
        let k = self.order();
        let mut d = [0.0; MAX_ORDER + 1];
        match f {
            Analytic::Sqrt => {
                if x <= DOMAIN_EPS {
                    return Err(Error::Domain(format!("sqrt of {x:e}")));
                }
                let mut e = 0.5;
                let mut coef = 1.0;
                for (i, di) in d.iter_mut().enumerate().take(k + 1) {
                    *di = coef * x.powf(0.5 - i as f64);
                    coef *= e;
                    e -= 1.0;
                }
            }
            Analytic::Recip => {
                if x.abs() <= DOMAIN_EPS {
                    return Err(Error::Domain(format!("reciprocal of {x:e}")));
                }
                let r = 1.0 / x;
                let mut p = r;
                for (i, di) in d.iter_mut().enumerate().take(k + 1) {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    *di = sign * FACT[i] * p;
                    p *= r;
                }
            }
            Analytic::Exp => {
                let e = x.exp();
                d.iter_mut().take(k + 1).for_each(|di| *di = e);
            }
            Analytic::Sin | Analytic::Cos => {
                let (s, c) = x.sin_cos();
                let cycle = [s, c, -s, -c];
                let shift = if f == Analytic::Sin { 0 } else { 1 };
                for (i, di) in d.iter_mut().enumerate().take(k + 1) {
                    *di = cycle[(i + shift) % 4];
                }
            }
        }
        Ok(self.taylor_compose(&d))
    }

    /// Σ dᵢ/i! (self − value)ⁱ.
    fn taylor_compose(&self, d: &[f64; MAX_ORDER + 1]) -> Jet {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet::constant(self.vars(), self.order(), d[0]);
        let mut power = Jet::constant(self.vars(), self.order(), 1.0);
        for (i, di) in d.iter().enumerate().take(self.order() + 1).skip(1) {
            power = mul_impl(&power, &delta, self.order());
            out += power * (di / FACT[i]);
        }
        out
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.apply(Analytic::Sqrt)
    }

    pub fn recip(&self) -> Result<Jet> {
        self.apply(Analytic::Recip)
    }

    pub fn sin(&self) -> Jet {
        self.apply(Analytic::Sin).expect("sin is entire")
    }

    pub fn cos(&self) -> Jet {
        self.apply(Analytic::Cos).expect("cos is entire")
    }

    pub fn exp(&self) -> Jet {
        self.apply(Analytic::Exp).expect("exp is entire")
    }

    pub fn cosh(&self) -> Jet {
        let e = self.exp();
        let em = (-*self).exp();
        (e + em) * 0.5
    }

    pub fn sinh(&self) -> Jet {
        let e = self.exp();
        let em = (-*self).exp();
        (e - em) * 0.5
    }

    pub fn square(&self) -> Jet {
        mul_impl(self, self, self.order())
    }

    /// Substitutes `subs[i]` for variable `i`. Each substitute must vanish at
    /// the expansion point; the result lives in the substitutes' variables.
    pub fn compose(&self, subs: &[Jet]) -> Result<Jet> {
        if subs.len() != self.vars() {
            return Err(Error::Precondition(format!(
                "compose needs {} substitutes, got {}",
                self.vars(),
                subs.len()
            )));
        }
        let first = subs[0];
        for s in subs {
            first.same_shape(s)?;
            if s.value() != 0.0 {
                return Err(Error::Precondition(
                    "substitutes must vanish at the expansion point".into(),
                ));
            }
        }
        let order = self.order().min(first.order());
        let vars = first.vars();
        let one = Jet::constant(vars, order, 1.0);
        let mut xp = [one; MAX_ORDER + 1];
        let mut yp = [one; MAX_ORDER + 1];
        for i in 1..=order {
            xp[i] = mul_impl(&xp[i - 1], &subs[0].truncate(order), order);
            if self.vars() == 2 {
                yp[i] = mul_impl(&yp[i - 1], &subs[1].truncate(order), order);
            }
        }
        let mut out = Jet::zero(vars, order);
        for i in 0..len_for(self.vars(), order) {
            let (a, b) = mono(self.vars(), i);
            let ci = self.c[i];
            if ci != 0.0 {
                out += mul_impl(&xp[a], &yp[b], order) * ci;
            }
        }
        Ok(out)
    }

    /// Evaluates the truncated polynomial at a displacement from the
    /// expansion point.
    pub fn eval_offset(&self, du: f64, dv: f64) -> f64 {
        let vars = self.vars();
        (0..len_for(vars, self.order()))
            .map(|i| {
                let (a, b) = mono(vars, i);
                self.c[i] * du.powi(a as i32) * dv.powi(b as i32)
            })
            .sum()
    }
}

fn mul_impl(a: &Jet, b: &Jet, order: usize) -> Jet {
    let vars = a.vars();
    assert_eq!(vars, b.vars(), "jets in different variable counts");
    let mut out = Jet::zero(vars, order);
    for i in 0..len_for(vars, order) {
        let ai = a.c[i];
        if ai == 0.0 {
            continue;
        }
        let (ia, ib) = mono(vars, i);
        let rest = order - (ia + ib);
        for j in 0..len_for(vars, rest) {
            let (ja, jb) = mono(vars, j);
            out.c[index(vars, ia + ja, ib + jb)] += ai * b.c[j];
        }
    }
    out
}

/// Strict product, as an operation on values.
pub fn jet_product(a: &Jet, b: &Jet) -> Result<Jet> {
    a.product(b)
}

pub fn jet_analytic(f: Analytic, a: &Jet) -> Result<Jet> {
    a.apply(f)
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        assert_eq!(self.vars, rhs.vars, "jets in different variable counts");
        let mut out = self.truncate(self.order().min(rhs.order()));
        for i in 0..len_for(out.vars(), out.order()) {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.c.iter_mut().for_each(|x| *x = -*x);
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        mul_impl(&self, &rhs, self.order().min(rhs.order()))
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self.c.iter_mut().for_each(|x| *x *= rhs);
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

// Vectors of jets.

pub type JetVec = Vec<Jet>;

/// Signature-weighted inner product of two jet vectors.
pub fn jdot(sig: &[f64], a: &[Jet], b: &[Jet]) -> Jet {
    debug_assert_eq!(a.len(), b.len());
    let order = a[0].order().min(b[0].order());
    let mut out = Jet::zero(a[0].vars(), order);
    for ((s, x), y) in sig.iter().zip(a).zip(b) {
        if *s != 0.0 {
            out += (*x * *y) * *s;
        }
    }
    out
}

pub fn jscale(a: &[Jet], s: &Jet) -> JetVec {
    a.iter().map(|x| *x * *s).collect()
}

pub fn jaxpy(y: &mut JetVec, s: &Jet, x: &[Jet]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += *xi * *s;
    }
}

pub fn jvalues(a: &[Jet]) -> Vec<f64> {
    a.iter().map(Jet::value).collect()
}

pub fn jpartial(a: &[Jet], var: usize) -> JetVec {
    a.iter().map(|x| x.partial(var)).collect()
}

// Plain dense helpers.

pub fn sdot(sig: &[f64], a: &[f64], b: &[f64]) -> f64 {
    sig.iter().zip(a).zip(b).map(|((s, x), y)| s * x * y).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += s * xi);
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub type Mat2 = [[f64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Eigenvalues (ascending) of a symmetric 2×2 matrix.
pub fn sym2_eigenvalues(m: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let off = 0.5 * (m[0][1] + m[1][0]);
    let r = half.hypot(off);
    [mean - r, mean + r]
}

/// Operator norm of a symmetric 2×2 matrix.
pub fn sym2_norm(m: &Mat2) -> f64 {
    let [a, b] = sym2_eigenvalues(m);
    a.abs().max(b.abs())
}
