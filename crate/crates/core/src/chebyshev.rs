//! Total-degree Chebyshev expansions on a rectangle in the plane.
//!
//! A [`ChebyshevField`] is `g(x) = ℓ(x) + Σ c_ij T_i(s(x₁)) T_j(t(x₂))` over
//! `i + j ≤ degree`, where `s, t` map the box affinely onto `[−1, 1]` and `ℓ`
//! is an explicit affine part. Derivatives up to order four are exact, which
//! is what the Abreu operator of a perturbed potential needs.

use serde::{Deserialize, Serialize};

/// Highest derivative order provided.
pub const MAX_ORDER: usize = 4;

/// `T_k^{(m)}(s)` for `k ≤ degree`, `m ≤ MAX_ORDER`, using
/// `T^{(m)}_{k+1} = 2m T^{(m−1)}_k + 2s T^{(m)}_k − T^{(m)}_{k−1}`.
pub fn chebyshev_derivatives(s: f64, degree: usize) -> Vec<[f64; MAX_ORDER + 1]> {
    let mut t = vec![[0.0; MAX_ORDER + 1]; degree + 1];
    t[0][0] = 1.0;
    if degree == 0 {
        return t;
    }
    t[1][0] = s;
    t[1][1] = 1.0;
    for k in 1..degree {
        for m in 0..=MAX_ORDER {
            let lower = if m > 0 { 2.0 * m as f64 * t[k][m - 1] } else { 0.0 };
            t[k + 1][m] = lower + 2.0 * s * t[k][m] - t[k - 1][m];
        }
    }
    t
}

/// Index pairs `(i, j)` with `min_total ≤ i + j ≤ degree`, by total degree then `i` descending.
pub fn terms(degree: usize, min_total: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in min_total..=degree {
        for j in 0..=total {
            out.push((total - j, j));
        }
    }
    out
}

/// Value and derivatives up to order four of a scalar field in two variables.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldJet {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [[f64; 2]; 2],
    pub t: [[[f64; 2]; 2]; 2],
    pub q: [[[[f64; 2]; 2]; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevField {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub degree: usize,
    pub terms: Vec<(usize, usize)>,
    pub coeffs: Vec<f64>,
    /// `(ℓ₀, [ℓ₁, ℓ₂])` for the affine part `ℓ₀ + ℓ₁x₁ + ℓ₂x₂`.
    pub affine: (f64, [f64; 2]),
}

/// Per-axis tables of `T_k^{(m)}` already scaled to `x` derivatives.
pub struct AxisTables {
    pub x: Vec<[f64; MAX_ORDER + 1]>,
    pub y: Vec<[f64; MAX_ORDER + 1]>,
}

impl ChebyshevField {
    pub fn zero(lo: [f64; 2], hi: [f64; 2], degree: usize, min_total: usize) -> Self {
        let terms = terms(degree, min_total);
        let coeffs = vec![0.0; terms.len()];
        Self {
            lo,
            hi,
            degree,
            terms,
            coeffs,
            affine: (0.0, [0.0; 2]),
        }
    }

    pub fn tables(&self, x: &[f64]) -> AxisTables {
        let axis = |d: usize| {
            let half = 0.5 * (self.hi[d] - self.lo[d]);
            let s = (x[d] - 0.5 * (self.hi[d] + self.lo[d])) / half;
            let mut t = chebyshev_derivatives(s, self.degree);
            for row in &mut t {
                let mut f = 1.0;
                for v in row.iter_mut() {
                    *v *= f;
                    f /= half;
                }
            }
            t
        };
        AxisTables { x: axis(0), y: axis(1) }
    }

    /// Derivative `∂^{a}_{x₁} ∂^{b}_{x₂}` of basis term `k`.
    #[inline]
    pub fn basis_derivative(tab: &AxisTables, term: (usize, usize), a: usize, b: usize) -> f64 {
        tab.x[term.0][a] * tab.y[term.1][b]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let tab = self.tables(x);
        let mut v = self.affine.0 + self.affine.1[0] * x[0] + self.affine.1[1] * x[1];
        for (c, &term) in self.coeffs.iter().zip(&self.terms) {
            v += c * Self::basis_derivative(&tab, term, 0, 0);
        }
        v
    }

    /// Full jet up to fourth order.
    pub fn jet(&self, x: &[f64]) -> FieldJet {
        let tab = self.tables(x);
        let mut out = FieldJet::default();
        // Derivative multi-index as counts of x₁ and x₂ derivatives.
        let count = |idx: &[usize]| {
            let a = idx.iter().filter(|&&i| i == 0).count();
            (a, idx.len() - a)
        };
        for (c, &term) in self.coeffs.iter().zip(&self.terms) {
            if *c == 0.0 {
                continue;
            }
            let d = |idx: &[usize]| {
                let (a, b) = count(idx);
                c * Self::basis_derivative(&tab, term, a, b)
            };
            out.v += d(&[]);
            for i in 0..2 {
                out.g[i] += d(&[i]);
                for j in 0..2 {
                    out.h[i][j] += d(&[i, j]);
                    for k in 0..2 {
                        out.t[i][j][k] += d(&[i, j, k]);
                        for l in 0..2 {
                            out.q[i][j][k][l] += d(&[i, j, k, l]);
                        }
                    }
                }
            }
        }
        out.v += self.affine.0 + self.affine.1[0] * x[0] + self.affine.1[1] * x[1];
        out.g[0] += self.affine.1[0];
        out.g[1] += self.affine.1[1];
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_recurrence_matches_closed_forms() {
        let s: f64 = 0.37;
        let t = chebyshev_derivatives(s, 6);
        // T4 = 8s⁴ − 8s² + 1.
        assert!((t[4][0] - (8.0 * s.powi(4) - 8.0 * s * s + 1.0)).abs() < 1e-14);
        assert!((t[4][1] - (32.0 * s.powi(3) - 16.0 * s)).abs() < 1e-14);
        assert!((t[4][2] - (96.0 * s * s - 16.0)).abs() < 1e-13);
        assert!((t[4][3] - 192.0 * s).abs() < 1e-12);
        assert!((t[4][4] - 192.0).abs() < 1e-12);
        // T_k(cos θ) = cos kθ.
        let theta = s.acos();
        assert!((t[6][0] - (6.0 * theta).cos()).abs() < 1e-14);
    }

    #[test]
    fn field_jet_matches_finite_differences() {
        let mut f = ChebyshevField::zero([1.0, 0.0], [2.0, 2.0], 5, 2);
        for (k, c) in f.coeffs.iter_mut().enumerate() {
            *c = 0.1 * ((k as f64) * 0.7).sin();
        }
        f.affine = (0.3, [0.2, -0.1]);
        let x = [1.4, 0.8];
        let j = f.jet(&x);
        let h = 1e-5;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!((fd - j.g[i]).abs() < 1e-8);
            let (jp, jm) = (f.jet(&xp), f.jet(&xm));
            for a in 0..2 {
                for b in 0..2 {
                    let fd = (jp.h[a][b] - jm.h[a][b]) / (2.0 * h);
                    assert!((fd - j.t[a][b][i]).abs() < 1e-6);
                    for c in 0..2 {
                        let fd = (jp.t[a][b][c] - jm.t[a][b][c]) / (2.0 * h);
                        assert!((fd - j.q[a][b][c][i]).abs() < 1e-5);
                    }
                }
            }
        }
    }

    #[test]
    fn term_ordering() {
        assert_eq!(terms(2, 0), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(terms(2, 2).len(), 3);
    }
}
