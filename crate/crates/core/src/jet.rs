//! Second-order forward-mode derivatives.
//!
//! [`Jet2`] carries a value together with its gradient and Hessian in two
//! variables, which is all the Abreu formula needs from closed-form metrics.
//! [`MatrixJet`] holds a symmetric matrix field with its first and second
//! derivatives and can be built from the jet of its inverse.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 2],
    pub dd: [[f64; 2]; 2],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            d: [0.0; 2],
            dd: [[0.0; 2]; 2],
        }
    }

    /// The coordinate function `x_i` at value `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.d[i] = 1.0;
        j
    }

    /// Applies a scalar function given its value and first two derivatives.
    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..2 {
            out.d[i] = f1 * self.d[i];
            for k in 0..2 {
                out.dd[i][k] = f1 * self.dd[i][k] + f2 * self.d[i] * self.d[k];
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut out = self;
        out.v += o.v;
        for i in 0..2 {
            out.d[i] += o.d[i];
            for k in 0..2 {
                out.dd[i][k] += o.dd[i][k];
            }
        }
        out
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for i in 0..2 {
            out.d[i] = self.d[i] * o.v + self.v * o.d[i];
            for k in 0..2 {
                out.dd[i][k] =
                    self.dd[i][k] * o.v + self.d[i] * o.d[k] + self.d[k] * o.d[i] + self.v * o.dd[i][k];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        let mut out = self;
        out.v *= s;
        for i in 0..2 {
            out.d[i] *= s;
            for k in 0..2 {
                out.dd[i][k] *= s;
            }
        }
        out
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, s: f64) -> Jet2 {
        Jet2 { v: self.v + s, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, s: f64) -> Jet2 {
        self + (-s)
    }
}

/// A symmetric matrix field `M` at a point with `dm[k] = ∂_k M` and
/// `d2m[k][l] = ∂_k ∂_l M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJet {
    pub m: DMatrix<f64>,
    pub dm: Vec<DMatrix<f64>>,
    pub d2m: Vec<Vec<DMatrix<f64>>>,
}

impl MatrixJet {
    /// Collects an `n × n` array of scalar jets (`n ≤ 2`).
    pub fn from_entries(entries: &[Vec<Jet2>]) -> Self {
        let n = entries.len();
        let m = DMatrix::from_fn(n, n, |i, j| entries[i][j].v);
        let dm = (0..n).map(|k| DMatrix::from_fn(n, n, |i, j| entries[i][j].d[k])).collect();
        let d2m = (0..n)
            .map(|k| (0..n).map(|l| DMatrix::from_fn(n, n, |i, j| entries[i][j].dd[k][l])).collect())
            .collect();
        Self { m, dm, d2m }
    }

    /// Jet of `H = G⁻¹` from the jet of `G`:
    /// `∂_k H = −H ∂_kG H` and
    /// `∂_k∂_l H = H ∂_lG H ∂_kG H + H ∂_kG H ∂_lG H − H ∂_k∂_lG H`.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.m.nrows();
        let h = self.m.clone().cholesky()?.inverse();
        let hgh: Vec<DMatrix<f64>> = self.dm.iter().map(|g| &h * g * &h).collect();
        let dm = hgh.iter().map(|x| -x).collect();
        let d2m = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        &hgh[l] * &self.dm[k] * &h + &hgh[k] * &self.dm[l] * &h - &h * &self.d2m[k][l] * &h
                    })
                    .collect()
            })
            .collect();
        Some(Self { m: h, dm, d2m })
    }

    /// `−Σ_ij ∂_i ∂_j M_ij`.
    pub fn abreu(&self) -> f64 {
        let n = self.m.nrows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.d2m[i][j][(i, j)];
            }
        }
        -s
    }
}
