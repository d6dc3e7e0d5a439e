//! Integration over a labelled polytope and its boundary.
//!
//! Polynomials of degree at most two are integrated exactly from simplex
//! moments of the fan triangulation. The boundary measure of facet `k` is the
//! Euclidean surface measure divided by `‖ν_k‖`, so doubling a label halves
//! every boundary integral over that facet. Smooth non-polynomial integrands
//! (exponential weights, curvature densities) go through an adaptive
//! Gauss–Legendre rule on collapsed simplices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::exact::{self, Rational};
use crate::polytope::{factorial, LabelledPolytope, Point, PolytopeError, Simplex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error("quadrature did not converge within {max_depth} refinement levels")]
    QuadratureNotConverged { max_depth: usize },
}

/// `x ↦ constant + ⟨linear, x⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunction {
    pub constant: f64,
    pub linear: DVector<f64>,
}

impl AffineFunction {
    pub fn new(constant: f64, linear: DVector<f64>) -> Self {
        Self { constant, linear }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(value, DVector::zeros(dim))
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut linear = DVector::zeros(dim);
        linear[i] = 1.0;
        Self::new(0.0, linear)
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.constant + self.linear.dot(x)
    }

    /// Coefficients `(a₀, a₁, …, a_n)`.
    pub fn coefficients(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.linear.len() + 1);
        c[0] = self.constant;
        c.rows_mut(1, self.linear.len()).copy_from(&self.linear);
        c
    }

    pub fn from_coefficients(c: &DVector<f64>) -> Self {
        Self::new(c[0], c.rows(1, c.len() - 1).into_owned())
    }
}

/// `x ↦ constant + ⟨linear, x⟩ + xᵀ·quadratic·x` with `quadratic` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial2 {
    pub constant: f64,
    pub linear: DVector<f64>,
    pub quadratic: DMatrix<f64>,
}

impl Polynomial2 {
    pub fn zero(dim: usize) -> Self {
        Self {
            constant: 0.0,
            linear: DVector::zeros(dim),
            quadratic: DMatrix::zeros(dim, dim),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self {
            constant: 1.0,
            ..Self::zero(dim)
        }
    }

    /// `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.linear[i] = 1.0;
        p
    }

    /// `x_i x_j`.
    pub fn product(dim: usize, i: usize, j: usize) -> Self {
        let mut p = Self::zero(dim);
        p.quadratic[(i, j)] += 0.5;
        p.quadratic[(j, i)] += 0.5;
        p
    }

    /// `x_i x_j` with the convention `x₀ ≡ 1`.
    pub fn homogeneous_product(dim: usize, i: usize, j: usize) -> Self {
        match (i, j) {
            (0, 0) => Self::one(dim),
            (0, k) | (k, 0) => Self::coordinate(dim, k - 1),
            (a, b) => Self::product(dim, a - 1, b - 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.constant + self.linear.dot(x) + x.dot(&(&self.quadratic * x))
    }

    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut v = self.constant;
        for i in 0..n {
            v += self.linear[i] * x[i];
            for j in 0..n {
                v += self.quadratic[(i, j)] * x[i] * x[j];
            }
        }
        v
    }
}

impl From<&AffineFunction> for Polynomial2 {
    fn from(f: &AffineFunction) -> Self {
        Self {
            constant: f.constant,
            linear: f.linear.clone(),
            quadratic: DMatrix::zeros(f.linear.len(), f.linear.len()),
        }
    }
}

/// `W_ij = ∫_P x_i x_j dϖ` and `Z_i = ∫_∂P x_i dσ_ν`, indices from 0 with `x₀ ≡ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    pub w: DMatrix<f64>,
    pub z: DVector<f64>,
}

impl MomentData {
    pub fn volume(&self) -> f64 {
        self.w[(0, 0)]
    }

    /// Center of mass of `(P, dϖ)`.
    pub fn barycenter(&self) -> DVector<f64> {
        let n = self.z.len() - 1;
        DVector::from_fn(n, |i, _| self.w[(0, i + 1)] / self.w[(0, 0)])
    }

    /// Center of mass of `(∂P, dσ_ν)`.
    pub fn boundary_barycenter(&self) -> DVector<f64> {
        let n = self.z.len() - 1;
        DVector::from_fn(n, |i, _| self.z[i + 1] / self.z[0])
    }
}

/// Exact moment data, available when both vertices and labels are rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMomentData {
    pub w: Vec<Vec<Rational>>,
    pub z: Vec<Rational>,
}

impl ExactMomentData {
    pub fn to_float(&self) -> MomentData {
        let m = self.z.len();
        MomentData {
            w: DMatrix::from_fn(m, m, |i, j| exact::to_f64(&self.w[i][j])),
            z: DVector::from_iterator(m, self.z.iter().map(exact::to_f64)),
        }
    }

    pub fn barycenter(&self) -> Vec<Rational> {
        self.w[0][1..].iter().map(|v| v / &self.w[0][0]).collect()
    }

    pub fn boundary_barycenter(&self) -> Vec<Rational> {
        self.z[1..].iter().map(|v| v / &self.z[0]).collect()
    }
}

/// Mass, first and second moments of an `m`-simplex with respect to its
/// `m`-dimensional Euclidean measure.
fn simplex_moments(s: &Simplex) -> (f64, DVector<f64>, DMatrix<f64>) {
    let v = s.volume();
    let m = s.dim() as f64;
    let n = s.vertices[0].len();
    let mut sum = DVector::zeros(n);
    let mut outer = DMatrix::zeros(n, n);
    for p in &s.vertices {
        sum += p;
        outer += p * p.transpose();
    }
    let first = &sum * (v / (m + 1.0));
    let second = (outer + &sum * sum.transpose()) * (v / ((m + 1.0) * (m + 2.0)));
    (v, first, second)
}

fn integrate_with_moments(p: &Polynomial2, moments: (f64, DVector<f64>, DMatrix<f64>)) -> f64 {
    let (mass, first, second) = moments;
    p.constant * mass + p.linear.dot(&first) + p.quadratic.component_mul(&second).sum()
}

/// `∫_P g dϖ`, exact up to rounding.
pub fn integrate_interior(poly: &LabelledPolytope, g: &Polynomial2) -> f64 {
    poly.triangulate()
        .iter()
        .map(|s| integrate_with_moments(g, simplex_moments(s)))
        .sum()
}

/// `∫_{F_k} g dσ_ν` for the zero-based facet index `k`.
pub fn integrate_facet(poly: &LabelledPolytope, k: usize, g: &Polynomial2) -> Result<f64, PolytopeError> {
    let scale = poly.halfspace(k)?.normal.norm();
    let total: f64 = poly
        .facet_decomposition(k)?
        .iter()
        .map(|s| integrate_with_moments(g, simplex_moments(s)))
        .sum();
    Ok(total / scale)
}

/// `∫_∂P g dσ_ν`.
pub fn integrate_boundary(poly: &LabelledPolytope, g: &Polynomial2) -> f64 {
    (0..poly.num_facets())
        .map(|k| integrate_facet(poly, k, g).expect("facet index in range"))
        .sum()
}

pub fn moments(poly: &LabelledPolytope) -> MomentData {
    let n = poly.dim();
    let mut w = DMatrix::zeros(n + 1, n + 1);
    let mut z = DVector::zeros(n + 1);
    for s in poly.triangulate() {
        let (mass, first, second) = simplex_moments(&s);
        w[(0, 0)] += mass;
        for i in 0..n {
            w[(0, i + 1)] += first[i];
            for j in 0..n {
                w[(i + 1, j + 1)] += second[(i, j)];
            }
        }
    }
    for i in 0..n {
        w[(i + 1, 0)] = w[(0, i + 1)];
    }
    for k in 0..poly.num_facets() {
        let scale = poly.halfspaces()[k].normal.norm();
        for s in poly.facet_decomposition(k).expect("facet index in range") {
            let (mass, first, _) = simplex_moments(&s);
            z[0] += mass / scale;
            for i in 0..n {
                z[i + 1] += first[i] / scale;
            }
        }
    }
    MomentData { w, z }
}

/// Rational `W`, available whenever the vertices are known exactly.
pub fn exact_interior_moments(poly: &LabelledPolytope) -> Option<Vec<Vec<Rational>>> {
    let exact_data = poly.exact()?;
    if exact_data.vertices.len() != poly.vertices().len() {
        return None;
    }
    let verts = &exact_data.vertices;
    let n = poly.dim();
    let mut w = vec![vec![Rational::zero(); n + 1]; n + 1];
    for simplex in poly.fan_indices(&[]) {
        let base = &verts[simplex[0]];
        let edges: Vec<Vec<Rational>> = (0..n)
            .map(|r| (1..=n).map(|c| &verts[simplex[c]][r] - &base[r]).collect())
            .collect();
        let vol = exact::determinant(&edges).abs() / exact::from_i64(factorial(n) as i64);
        accumulate_exact(&mut w, &vol, &simplex, verts, n);
    }
    Some(w)
}

/// Rational moment data; `None` unless the polytope carries exact labels.
pub fn exact_moments(poly: &LabelledPolytope) -> Option<ExactMomentData> {
    let exact_data = poly.exact()?;
    if !exact_data.labels_exact {
        return None;
    }
    let w = exact_interior_moments(poly)?;
    let verts = &exact_data.vertices;
    let n = poly.dim();
    let zero = || Rational::zero();
    let mut z = vec![zero(); n + 1];
    for (k, plane) in exact_data.planes.iter().enumerate() {
        let nu = &plane.normal;
        let nu2 = nu.iter().fold(zero(), |acc, v| acc + v * v);
        for simplex in poly.fan_indices(&[k]) {
            // ∫_F dσ_ν = vol_{n−1}(F)/‖ν‖ = |det[edges | ν]| / (‖ν‖²·(n−1)!), which is rational.
            let base = &verts[simplex[0]];
            let rows: Vec<Vec<Rational>> = (0..n)
                .map(|r| {
                    let mut row: Vec<Rational> = (1..n).map(|c| &verts[simplex[c]][r] - &base[r]).collect();
                    row.push(nu[r].clone());
                    row
                })
                .collect();
            let mass = exact::determinant(&rows).abs() / (&nu2 * exact::from_i64(factorial(n - 1) as i64));
            let count = exact::from_i64(simplex.len() as i64);
            z[0] += &mass;
            for i in 0..n {
                let s = simplex.iter().fold(zero(), |acc, &v| acc + &verts[v][i]);
                z[i + 1] += &mass * s / &count;
            }
        }
    }
    Some(ExactMomentData { w, z })
}

fn accumulate_exact(
    w: &mut [Vec<Rational>],
    vol: &Rational,
    simplex: &[usize],
    verts: &[Vec<Rational>],
    n: usize,
) {
    let m1 = exact::from_i64(simplex.len() as i64);
    let m2 = exact::from_i64(simplex.len() as i64 + 1);
    let sum: Vec<Rational> = (0..n)
        .map(|i| simplex.iter().fold(Rational::zero(), |acc, &v| acc + &verts[v][i]))
        .collect();
    w[0][0] += vol;
    for i in 0..n {
        let first = vol * &sum[i] / &m1;
        w[0][i + 1] += &first;
        w[i + 1][0] += first;
        for j in 0..n {
            let outer = simplex
                .iter()
                .fold(Rational::zero(), |acc, &v| acc + &verts[v][i] * &verts[v][j]);
            w[i + 1][j + 1] += vol * (outer + &sum[i] * &sum[j]) / (&m1 * &m2);
        }
    }
}

/// `Ψ(f) = Σ_k (∫_{F_k} f dσ_ν) ν_k`, which equals `−vol(P)·linear(f)`
/// whatever the labels are.
pub fn psi_map(poly: &LabelledPolytope, f: &AffineFunction) -> DVector<f64> {
    let g = Polynomial2::from(f);
    let mut out = DVector::zeros(poly.dim());
    for (k, h) in poly.halfspaces().iter().enumerate() {
        out += &h.normal * integrate_facet(poly, k, &g).expect("facet index in range");
    }
    out
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Legendre quadrature on simplices.

/// Points per direction of the tensor Gauss–Legendre rule.
pub const GAUSS_ORDER: usize = 12;
/// Maximum number of bisection levels below the fan triangulation.
pub const MAX_DEPTH: usize = 20;
/// Default relative accuracy of [`integrate_exp_weighted`].
pub const QUADRATURE_TOL: f64 = 1e-13;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = order as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Reference rule on the standard `m`-simplex: barycentric coordinates and
/// weights summing to one (so a simplex of volume `V` gets weights `V·w`).
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub barycentric: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Collapsed (Duffy) tensor rule of `order` points per direction.
    pub fn collapsed(m: usize, order: usize) -> Self {
        let (nodes, w1) = gauss_legendre(order);
        let total = order.pow(m as u32);
        let mut barycentric = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; m];
        for _ in 0..total {
            let mut lam = vec![0.0; m + 1];
            let mut rest = 1.0;
            let mut w = factorial(m);
            for (d, &i) in idx.iter().enumerate() {
                let t = nodes[i];
                lam[d + 1] = rest * t;
                w *= w1[i];
                w *= (1.0 - t).powi((m - d - 1) as i32);
                rest *= 1.0 - t;
            }
            lam[0] = rest;
            barycentric.push(lam);
            weights.push(w);
            for d in (0..m).rev() {
                idx[d] += 1;
                if idx[d] < order {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self { barycentric, weights }
    }
}

fn map_point(s: &Simplex, lam: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (l, v) in lam.iter().zip(&s.vertices) {
        for (o, c) in out.iter_mut().zip(v.iter()) {
            *o += l * c;
        }
    }
}

/// Applies `rule` to `f` on `s`, returning the estimate and the estimate of `∫|f|`.
fn apply_rule<F>(rule: &SimplexRule, s: &Simplex, len: usize, f: &F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&[f64], &mut [f64]),
{
    let vol = s.volume();
    let n = s.vertices[0].len();
    let mut x = vec![0.0; n];
    let mut val = vec![0.0; len];
    let mut sum = vec![0.0; len];
    let mut abs = vec![0.0; len];
    for (lam, &w) in rule.barycentric.iter().zip(&rule.weights) {
        map_point(s, lam, &mut x);
        f(&x, &mut val);
        for i in 0..len {
            sum[i] += w * vol * val[i];
            abs[i] += w * vol * val[i].abs();
        }
    }
    (sum, abs)
}

/// Longest-edge bisection.
fn bisect(s: &Simplex) -> [Simplex; 2] {
    let m = s.vertices.len();
    let mut best = (0, 1, -1.0);
    for i in 0..m {
        for j in i + 1..m {
            let d = (&s.vertices[i] - &s.vertices[j]).norm_squared();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, _) = best;
    let mid: Point = (&s.vertices[i] + &s.vertices[j]) * 0.5;
    let mut a = s.clone();
    let mut b = s.clone();
    a.vertices[j] = mid.clone();
    b.vertices[i] = mid;
    [a, b]
}

/// `m` levels of longest-edge bisection of an `m`-simplex, so that every
/// original edge gets split. A single bisection keeps some edges intact and
/// can leave an edge-aligned quadrature error unchanged.
fn subdivide(s: &Simplex) -> Vec<Simplex> {
    let mut pieces = vec![s.clone()];
    for _ in 0..s.dim().max(1) {
        pieces = pieces.iter().flat_map(bisect).collect();
    }
    pieces
}

fn refine<F>(
    rule: &SimplexRule,
    s: &Simplex,
    coarse: Vec<f64>,
    len: usize,
    f: &F,
    tol: &[f64],
    depth: usize,
) -> Result<Vec<f64>, MeasureError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let children = subdivide(s);
    let parts: Vec<Vec<f64>> = children.iter().map(|c| apply_rule(rule, c, len, f).0).collect();
    let fine: Vec<f64> = (0..len).map(|i| parts.iter().map(|p| p[i]).sum()).collect();
    let ok = (0..len).all(|i| (fine[i] - coarse[i]).abs() <= tol[i]);
    if ok {
        return Ok(fine);
    }
    if depth >= MAX_DEPTH {
        return Err(MeasureError::QuadratureNotConverged { max_depth: MAX_DEPTH });
    }
    let share = 1.0 / children.len() as f64;
    let child_tol: Vec<f64> = tol.iter().map(|t| share * t).collect();
    let mut out = vec![0.0; len];
    for (child, part) in children.iter().zip(parts) {
        let r = refine(rule, child, part, len, f, &child_tol, depth + 1)?;
        for i in 0..len {
            out[i] += r[i];
        }
    }
    Ok(out)
}

/// Adaptive integration of a vector-valued smooth function over `P`.
///
/// Each fan simplex is bisected until two successive levels agree to
/// `rel_tol` times the estimated `∫_P |f_i|`. Simplices are processed in
/// parallel and summed in triangulation order, so results are deterministic.
pub fn integrate_vector<F>(poly: &LabelledPolytope, len: usize, f: F, rel_tol: f64) -> Result<Vec<f64>, MeasureError>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    integrate_vector_over(&poly.triangulate(), len, f, rel_tol)
}

pub fn integrate_vector_over<F>(simplices: &[Simplex], len: usize, f: F, rel_tol: f64) -> Result<Vec<f64>, MeasureError>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let m = simplices[0].dim();
    let rule = SimplexRule::collapsed(m, GAUSS_ORDER);
    let first: Vec<(Vec<f64>, Vec<f64>)> = simplices.par_iter().map(|s| apply_rule(&rule, s, len, &f)).collect();
    let total_vol: f64 = simplices.iter().map(Simplex::volume).sum();
    let mut scale = vec![0.0; len];
    for (_, abs) in &first {
        for i in 0..len {
            scale[i] += abs[i];
        }
    }
    let refined: Vec<Result<Vec<f64>, MeasureError>> = simplices
        .par_iter()
        .zip(first.into_par_iter())
        .map(|(s, (coarse, _))| {
            let share = s.volume() / total_vol;
            let tol: Vec<f64> = scale.iter().map(|sc| rel_tol * sc * share).collect();
            refine(&rule, s, coarse, len, &f, &tol, 1)
        })
        .collect();
    let mut out = vec![0.0; len];
    for r in refined {
        let r = r?;
        for i in 0..len {
            out[i] += r[i];
        }
    }
    Ok(out)
}

/// `∫_P e^{2⟨a, x−p⟩} g(x) dϖ`.
pub fn integrate_exp_weighted(
    poly: &LabelledPolytope,
    a: &DVector<f64>,
    p: &DVector<f64>,
    g: &Polynomial2,
) -> Result<f64, MeasureError> {
    let ap = a.dot(p);
    let out = integrate_vector(
        poly,
        1,
        |x, out| {
            let ax: f64 = a.iter().zip(x).map(|(u, v)| u * v).sum();
            out[0] = (2.0 * (ax - ap)).exp() * g.eval_slice(x);
        },
        QUADRATURE_TOL,
    )?;
    Ok(out[0])
}

/// Exponentially weighted moments about `p`: `∫w`, `∫w(x−p)`, `∫w(x−p)(x−p)ᵀ`
/// with `w = e^{2⟨a, x−p⟩}`, all from one quadrature pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpMoments {
    pub mass: f64,
    pub first: DVector<f64>,
    pub second: DMatrix<f64>,
}

pub fn exp_moments(poly: &LabelledPolytope, a: &DVector<f64>, p: &DVector<f64>) -> Result<ExpMoments, MeasureError> {
    let n = poly.dim();
    let len = 1 + n + n * n;
    let out = integrate_vector(
        poly,
        len,
        |x, out| {
            let mut e = 0.0;
            for i in 0..n {
                e += a[i] * (x[i] - p[i]);
            }
            let w = (2.0 * e).exp();
            out[0] = w;
            for i in 0..n {
                let yi = x[i] - p[i];
                out[1 + i] = w * yi;
                for j in 0..n {
                    out[1 + n + i * n + j] = w * yi * (x[j] - p[j]);
                }
            }
        },
        QUADRATURE_TOL,
    )?;
    Ok(ExpMoments {
        mass: out[0],
        first: DVector::from_fn(n, |i, _| out[1 + i]),
        second: DMatrix::from_fn(n, n, |i, j| out[1 + n + i * n + j]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_23() {
        let (x, w) = gauss_legendre(GAUSS_ORDER);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for d in 0..24 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            assert!((q - 1.0 / (d as f64 + 1.0)).abs() < 1e-15, "degree {d}");
        }
    }

    #[test]
    fn collapsed_rule_integrates_monomials() {
        // ∫ over the unit triangle of x²y = 2!·1!/5! = 1/60.
        let rule = SimplexRule::collapsed(2, GAUSS_ORDER);
        let tri = fixtures::simplex(2).triangulate().remove(0);
        let (v, _) = apply_rule(&rule, &tri, 1, &|x: &[f64], out: &mut [f64]| out[0] = x[0] * x[0] * x[1]);
        assert!((v[0] - 1.0 / 60.0).abs() < 1e-16);
        let rule3 = SimplexRule::collapsed(3, 6);
        assert!((rule3.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interior_integrals() {
        let sq = fixtures::square();
        assert!(close(integrate_interior(&sq, &Polynomial2::one(2)), 4.0, 1e-15));
        assert!(close(integrate_interior(&sq, &Polynomial2::product(2, 0, 0)), 4.0 / 3.0, 1e-15));
        assert_eq!(integrate_interior(&sq, &Polynomial2::zero(2)), 0.0);
        let t = fixtures::simplex(2);
        assert!(close(integrate_interior(&t, &Polynomial2::product(2, 0, 1)), 1.0 / 24.0, 1e-15));
    }

    #[test]
    fn facet_integrals() {
        let t = fixtures::simplex(2);
        for k in 0..3 {
            assert!(close(integrate_facet(&t, k, &Polynomial2::one(2)).unwrap(), 1.0, 1e-15));
        }
        assert!(close(integrate_facet(&t, 2, &Polynomial2::coordinate(2, 0)).unwrap(), 0.5, 1e-15));
        let t3 = fixtures::simplex(3);
        for k in 0..4 {
            assert!(close(integrate_facet(&t3, k, &Polynomial2::one(3)).unwrap(), 0.5, 1e-15));
        }
        let sq = fixtures::square();
        assert!(integrate_facet(&sq, 1, &Polynomial2::coordinate(2, 1)).unwrap().abs() < 1e-15);
        let doubled = sq.rescaled(&[1.0, 2.0, 1.0, 1.0]);
        assert!(close(integrate_facet(&doubled, 1, &Polynomial2::one(2)).unwrap(), 1.0, 1e-15));
        assert!(integrate_facet(&sq, 4, &Polynomial2::one(2)).is_err());
    }

    #[test]
    fn moment_data_of_fixtures() {
        let m = moments(&fixtures::square());
        let expect_w = DMatrix::from_row_slice(3, 3, &[4.0, 0.0, 0.0, 0.0, 4.0 / 3.0, 0.0, 0.0, 0.0, 4.0 / 3.0]);
        assert!((m.w - expect_w).amax() < 1e-15);
        assert!((m.z - DVector::from_row_slice(&[8.0, 0.0, 0.0])).amax() < 1e-15);

        let m = moments(&fixtures::simplex(2));
        let expect_w = DMatrix::from_row_slice(
            3,
            3,
            &[
                0.5,
                1.0 / 6.0,
                1.0 / 6.0,
                1.0 / 6.0,
                1.0 / 12.0,
                1.0 / 24.0,
                1.0 / 6.0,
                1.0 / 24.0,
                1.0 / 12.0,
            ],
        );
        assert!((m.w - expect_w).amax() < 1e-15);
        assert!((m.z - DVector::from_row_slice(&[3.0, 1.0, 1.0])).amax() < 1e-15);

        let sq = fixtures::square();
        let scaled = sq.rescaled(&[2.5; 4]);
        let (a, b) = (moments(&sq), moments(&scaled));
        assert!((a.w - b.w).amax() < 1e-15);
        assert!((a.z / 2.5 - b.z).amax() < 1e-15);
    }

    #[test]
    fn exact_moments_agree_with_float() {
        for poly in [
            fixtures::square(),
            fixtures::simplex(2),
            fixtures::simplex(3),
            fixtures::hirzebruch_unit(),
            fixtures::rectangle(),
        ] {
            let ex = exact_moments(&poly).unwrap().to_float();
            let fl = moments(&poly);
            assert!((ex.w - fl.w).amax() < 1e-13);
            assert!((ex.z - fl.z).amax() < 1e-13);
        }
        let r = exact_moments(&fixtures::rectangle()).unwrap();
        let z: Vec<String> = r.z.iter().map(exact::format_rational).collect();
        assert_eq!(z, ["16", "24", "0"]);
        let h = exact_moments(&fixtures::hirzebruch_unit()).unwrap();
        assert_eq!(exact::format_rational(&h.z[0]), "27/7");
        assert_eq!(exact::format_rational(&h.w[0][0]), "3/2");
    }

    #[test]
    fn psi_map_examples() {
        let sq = fixtures::square();
        assert!(psi_map(&sq, &AffineFunction::constant(2, 3.0)).amax() < 1e-14);
        let v = psi_map(&sq, &AffineFunction::coordinate(2, 0));
        assert!((v - DVector::from_row_slice(&[-4.0, 0.0])).amax() < 1e-14);
        for c in [1i64, 3] {
            let q = fixtures::hirzebruch(&exact::from_i64(c));
            let v = psi_map(&q, &AffineFunction::coordinate(2, 1));
            assert!((v - DVector::from_row_slice(&[0.0, -1.5])).amax() < 1e-14);
        }
    }

    #[test]
    fn exponential_quadrature() {
        let sq = fixtures::square();
        let zero = DVector::zeros(2);
        let vol = integrate_exp_weighted(&sq, &zero, &zero, &Polynomial2::one(2)).unwrap();
        assert!(close(vol, 4.0, 1e-14));
        let a = DVector::from_row_slice(&[1.0, 0.0]);
        let v = integrate_exp_weighted(&sq, &a, &zero, &Polynomial2::one(2)).unwrap();
        let e2 = 2f64.exp();
        assert!(close(v, e2 - 1.0 / e2, 1e-13));

        let q = fixtures::hirzebruch_unit();
        let g = Polynomial2::product(2, 0, 1);
        let direct = integrate_interior(&q, &g);
        let quad = integrate_exp_weighted(&q, &zero, &DVector::from_row_slice(&[1.5, 0.5]), &g).unwrap();
        assert!(close(quad, direct, 1e-13));

        // A steep weight forces refinement; compare with the separable closed form.
        let a = DVector::from_row_slice(&[6.0, -4.0]);
        let v = integrate_exp_weighted(&sq, &a, &zero, &Polynomial2::one(2)).unwrap();
        let f = |c: f64| ((2.0 * c).exp() - (-2.0 * c).exp()) / (2.0 * c);
        assert!(close(v, f(6.0) * f(-4.0), 1e-12), "{} vs {}", v, f(6.0) * f(-4.0));
    }

    #[test]
    fn exp_moments_reduce_to_polynomial_moments() {
        let q = fixtures::hirzebruch_unit();
        let p = DVector::from_row_slice(&[14.0 / 9.0, 7.0 / 9.0]);
        let em = exp_moments(&q, &DVector::zeros(2), &p).unwrap();
        let m = moments(&q);
        assert!(close(em.mass, m.volume(), 1e-14));
        let bary = m.barycenter();
        assert!((em.first / em.mass - (bary - &p)).amax() < 1e-13);
    }
}
