//! Compact simple convex polytopes with labelled facets.
//!
//! A [`LabelledPolytope`] is the set `{x : L_k(x) > 0}` where each defining
//! function `L_k(x) = ⟨ν_k, x⟩ + c_k` carries its label `ν_k` at a meaningful
//! scale. Vertices and vertex/facet incidences are derived on construction by
//! exhaustive intersection of `n` hyperplanes, which is fine for the handful of
//! facets these computations deal with.
//!
//! Facet indices are zero-based throughout the library.

use std::cmp::Ordering;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};

use crate::exact::{self, Rational};

pub type Point = DVector<f64>;

/// Relative tolerance for incidence and feasibility tests, scaled by the diameter.
pub const GEOMETRIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolytopeError {
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("no half-spaces given")]
    NoHalfSpaces,
    #[error("half-space {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("half-space {index} has a zero or non-finite normal")]
    ZeroNormal { index: usize },
    #[error("region is unbounded (recession along facets {facets:?})")]
    Unbounded { facets: Vec<usize> },
    #[error("region is empty or not full-dimensional")]
    Empty,
    #[error("vertex {vertex:?} lies on {} facets {facets:?}; polytope is not simple", facets.len())]
    NotSimple { vertex: Vec<f64>, facets: Vec<usize> },
    #[error("half-space {index} is redundant (it does not support a facet)")]
    RedundantFacet { index: usize },
    #[error("points span only a {rank}-dimensional affine subspace")]
    DegenerateHull { rank: usize },
    #[error("facet index {index} out of range ({count} facets)")]
    BadIndex { index: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: impl Into<Vec<f64>>, offset: f64) -> Self {
        Self {
            normal: DVector::from_vec(normal.into()),
            offset,
        }
    }

    /// The defining function `L(x) = ⟨normal, x⟩ + offset`.
    #[inline]
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) + self.offset
    }

    fn signed_distance(&self, x: &DVector<f64>) -> f64 {
        self.eval(x) / self.normal.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactHalfSpace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl ExactHalfSpace {
    pub fn to_float(&self) -> HalfSpace {
        HalfSpace {
            normal: DVector::from_iterator(self.normal.len(), self.normal.iter().map(exact::to_f64)),
            offset: exact::to_f64(&self.offset),
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.normal
            .iter()
            .zip(x)
            .fold(self.offset.clone(), |acc, (a, b)| acc + a * b)
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        Self {
            normal: self.normal.iter().map(|v| v * s).collect(),
            offset: &self.offset * s,
        }
    }
}

/// Exact companion data, present when the facet hyperplanes are known exactly.
///
/// `planes[k]` is a positive multiple of the defining function of facet `k`;
/// when `labels_exact` holds it *is* the defining function.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFacets {
    pub planes: Vec<ExactHalfSpace>,
    pub labels_exact: bool,
    pub vertices: Vec<Vec<Rational>>,
}

/// An `m`-simplex in `ℝⁿ` given by its `m + 1` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<Point>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// `m`-dimensional Euclidean volume, `sqrt(det(EᵀE)) / m!`.
    pub fn volume(&self) -> f64 {
        let m = self.dim();
        if m == 0 {
            return 1.0;
        }
        let e = self.edge_matrix();
        let gram = e.transpose() * &e;
        gram.determinant().max(0.0).sqrt() / factorial(m)
    }

    pub fn centroid(&self) -> Point {
        let mut c = self.vertices[0].clone() * 0.0;
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    /// Columns `v_i - v_0`.
    pub fn edge_matrix(&self) -> DMatrix<f64> {
        let v0 = &self.vertices[0];
        let n = v0.len();
        let m = self.dim();
        DMatrix::from_fn(n, m, |r, c| self.vertices[c + 1][r] - v0[r])
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

#[derive(Debug, Clone)]
pub struct LabelledPolytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Point>,
    vertex_facets: Vec<Vec<usize>>,
    diameter: f64,
    exact: Option<ExactFacets>,
}

impl LabelledPolytope {
    /// Builds and validates `{x : ⟨ν_k, x⟩ + c_k > 0}`.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self, PolytopeError> {
        check_input(dim, &halfspaces)?;
        let (vertices, vertex_facets, diameter) = enumerate_vertices(dim, &halfspaces)?;
        Ok(Self {
            dim,
            halfspaces,
            vertices,
            vertex_facets,
            diameter,
            exact: None,
        })
    }

    /// Same as [`from_halfspaces`](Self::from_halfspaces), keeping the exact
    /// labels around for lattice computations.
    pub fn from_exact_halfspaces(dim: usize, planes: Vec<ExactHalfSpace>) -> Result<Self, PolytopeError> {
        let halfspaces = planes.iter().map(ExactHalfSpace::to_float).collect();
        let mut poly = Self::from_halfspaces(dim, halfspaces)?;
        poly.attach_exact(planes, true);
        Ok(poly)
    }

    /// Convex hull of `points`, labelled by unit inward normals.
    ///
    /// Facets are ordered lexicographically by unit normal.
    pub fn from_vertices(dim: usize, points: &[Point]) -> Result<Self, PolytopeError> {
        let hull = hull_facets(dim, points)?;
        let halfspaces = hull.into_iter().map(|(h, _)| h).collect();
        Self::from_halfspaces(dim, halfspaces)
    }

    /// Hull of exactly-known points. Labels are still unit normals, but the
    /// facet hyperplanes are kept exactly so that label-independent exact
    /// computations (barycenter, Einstein normalization) stay rational.
    pub fn from_rational_vertices(dim: usize, points: &[Vec<Rational>]) -> Result<Self, PolytopeError> {
        let float_points: Vec<Point> = points
            .iter()
            .map(|p| DVector::from_iterator(dim, p.iter().map(exact::to_f64)))
            .collect();
        let hull = hull_facets(dim, &float_points)?;
        let mut planes = Vec::with_capacity(hull.len());
        for (h, support) in &hull {
            planes.push(exact_plane_through(dim, points, support, h));
        }
        let halfspaces = hull.into_iter().map(|(h, _)| h).collect();
        let mut poly = Self::from_halfspaces(dim, halfspaces)?;
        poly.attach_exact(planes, false);
        Ok(poly)
    }

    fn attach_exact(&mut self, planes: Vec<ExactHalfSpace>, labels_exact: bool) {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for facets in &self.vertex_facets {
            let rows: Vec<Vec<Rational>> = facets.iter().map(|&k| planes[k].normal.clone()).collect();
            let rhs: Vec<Rational> = facets.iter().map(|&k| -planes[k].offset.clone()).collect();
            match exact::solve(&rows, &rhs) {
                Some(v) => vertices.push(v),
                None => return,
            }
        }
        self.exact = Some(ExactFacets {
            planes,
            labels_exact,
            vertices,
        });
    }

    /// Replaces every label, keeping the shape. `scales[k] > 0` multiplies `ν_k`.
    pub fn rescaled(&self, scales: &[f64]) -> Self {
        assert_eq!(scales.len(), self.halfspaces.len());
        let halfspaces = self
            .halfspaces
            .iter()
            .zip(scales)
            .map(|(h, &s)| {
                assert!(s > 0.0, "label scale must be positive");
                HalfSpace {
                    normal: &h.normal * s,
                    offset: h.offset * s,
                }
            })
            .collect();
        let exact = self.exact.as_ref().map(|e| ExactFacets {
            labels_exact: false,
            ..e.clone()
        });
        Self {
            halfspaces,
            exact,
            ..self.clone()
        }
    }

    /// Rescales labels by exact positive factors; exactness of labels is kept.
    pub fn rescaled_exact(&self, scales: &[Rational]) -> Self {
        let floats: Vec<f64> = scales.iter().map(exact::to_f64).collect();
        let mut out = self.rescaled(&floats);
        if let Some(e) = &self.exact {
            if e.labels_exact {
                out.exact = Some(ExactFacets {
                    planes: e.planes.iter().zip(scales).map(|(p, s)| p.scaled(s)).collect(),
                    labels_exact: true,
                    vertices: e.vertices.clone(),
                });
            }
        }
        out
    }

    /// The same polytope moved by `shift`; labels are unchanged.
    pub fn translated(&self, shift: &DVector<f64>) -> Self {
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| HalfSpace {
                normal: h.normal.clone(),
                offset: h.offset - h.normal.dot(shift),
            })
            .collect();
        Self {
            halfspaces,
            vertices: self.vertices.iter().map(|v| v + shift).collect(),
            exact: None,
            ..self.clone()
        }
    }

    pub(crate) fn with_exact_labels(&self, planes: Vec<ExactHalfSpace>) -> Self {
        let halfspaces = planes.iter().map(ExactHalfSpace::to_float).collect();
        let mut out = Self {
            halfspaces,
            exact: None,
            ..self.clone()
        };
        out.attach_exact(planes, true);
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn num_facets(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn halfspace(&self, k: usize) -> Result<&HalfSpace, PolytopeError> {
        self.halfspaces.get(k).ok_or(PolytopeError::BadIndex {
            index: k,
            count: self.halfspaces.len(),
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Sorted facet indices incident to each vertex.
    pub fn vertex_facets(&self) -> &[Vec<usize>] {
        &self.vertex_facets
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn exact(&self) -> Option<&ExactFacets> {
        self.exact.as_ref()
    }

    /// Exact labels, when the input provided them.
    pub fn exact_labels(&self) -> Option<&[ExactHalfSpace]> {
        self.exact
            .as_ref()
            .filter(|e| e.labels_exact)
            .map(|e| e.planes.as_slice())
    }

    pub fn tolerance(&self) -> f64 {
        GEOMETRIC_TOL * self.diameter
    }

    /// All defining functions at `x`.
    pub fn defining_values(&self, x: &DVector<f64>) -> Vec<f64> {
        self.halfspaces.iter().map(|h| h.eval(x)).collect()
    }

    /// Strict interior membership.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.halfspaces.iter().all(|h| h.eval(x) > 0.0)
    }

    /// Smallest Euclidean distance from `x` to a facet hyperplane (negative outside).
    pub fn depth(&self, x: &DVector<f64>) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.signed_distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vertex indices incident to every facet in `facets`.
    pub fn face_vertices(&self, facets: &[usize]) -> Vec<usize> {
        self.vertex_facets
            .iter()
            .enumerate()
            .filter(|(_, inc)| facets.iter().all(|k| inc.binary_search(k).is_ok()))
            .map(|(i, _)| i)
            .collect()
    }

    /// Vertices of facet `k`.
    pub fn facet_vertices(&self, k: usize) -> Result<Vec<usize>, PolytopeError> {
        self.halfspace(k)?;
        Ok(self.face_vertices(&[k]))
    }

    /// Index of the lexicographically smallest vertex among `candidates`.
    fn lex_min(&self, candidates: &[usize]) -> usize {
        *candidates
            .iter()
            .min_by(|&&a, &&b| lex_cmp(&self.vertices[a], &self.vertices[b]))
            .expect("nonempty face")
    }

    /// Fan triangulation of the face cut out by `facets`, as vertex-index lists.
    ///
    /// Recursively cones the lexicographically smallest vertex of the face over
    /// the sub-faces that avoid it. Faces of a simple polytope are simple and
    /// every nonempty `face ∩ F_j` is a facet of the face, so the recursion
    /// only needs the incidence table.
    pub(crate) fn fan_indices(&self, facets: &[usize]) -> Vec<Vec<usize>> {
        let verts = self.face_vertices(facets);
        let face_dim = self.dim - facets.len();
        if face_dim == 0 {
            return vec![vec![verts[0]]];
        }
        let apex = self.lex_min(&verts);
        let mut out = Vec::new();
        for j in 0..self.num_facets() {
            if facets.contains(&j) {
                continue;
            }
            let mut sub = facets.to_vec();
            sub.push(j);
            sub.sort_unstable();
            let sub_verts = self.face_vertices(&sub);
            if sub_verts.is_empty() || sub_verts.contains(&apex) {
                continue;
            }
            for mut simplex in self.fan_indices(&sub) {
                simplex.insert(0, apex);
                out.push(simplex);
            }
        }
        out
    }

    fn simplices_from(&self, indices: Vec<Vec<usize>>) -> Vec<Simplex> {
        indices
            .into_iter()
            .map(|s| Simplex {
                vertices: s.into_iter().map(|i| self.vertices[i].clone()).collect(),
            })
            .collect()
    }

    /// Fan triangulation from the lexicographically smallest vertex.
    pub fn triangulate(&self) -> Vec<Simplex> {
        self.simplices_from(self.fan_indices(&[]))
    }

    /// Fan over an arbitrary vertex; used to cross-check volumes.
    pub fn triangulate_from(&self, apex: usize) -> Vec<Simplex> {
        let mut out = Vec::new();
        for k in 0..self.num_facets() {
            if self.vertex_facets[apex].contains(&k) {
                continue;
            }
            for mut s in self.fan_indices(&[k]) {
                s.insert(0, apex);
                out.push(s);
            }
        }
        self.simplices_from(out)
    }

    /// `(n−1)`-simplices tiling facet `k`.
    pub fn facet_decomposition(&self, k: usize) -> Result<Vec<Simplex>, PolytopeError> {
        self.halfspace(k)?;
        Ok(self.simplices_from(self.fan_indices(&[k])))
    }

    pub fn volume(&self) -> f64 {
        self.triangulate().iter().map(Simplex::volume).sum()
    }

    /// Axis-aligned bounding box `(lo, hi)` of the vertices.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Same shape (vertex sets equal as sets, within tolerance).
    pub fn same_shape(&self, other: &LabelledPolytope) -> bool {
        if self.dim != other.dim || self.vertices.len() != other.vertices.len() {
            return false;
        }
        let tol = 1e-9 * self.diameter.max(other.diameter);
        self.vertices
            .iter()
            .all(|v| other.vertices.iter().any(|w| (v - w).norm() <= tol))
    }
}

pub(crate) fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn check_input(dim: usize, halfspaces: &[HalfSpace]) -> Result<(), PolytopeError> {
    if dim == 0 {
        return Err(PolytopeError::BadDimension);
    }
    if halfspaces.is_empty() {
        return Err(PolytopeError::NoHalfSpaces);
    }
    for (index, h) in halfspaces.iter().enumerate() {
        if h.normal.len() != dim {
            return Err(PolytopeError::DimensionMismatch {
                index,
                expected: dim,
                found: h.normal.len(),
            });
        }
        let norm = h.normal.norm();
        if !(norm > 0.0 && norm.is_finite() && h.offset.is_finite()) {
            return Err(PolytopeError::ZeroNormal { index });
        }
    }
    Ok(())
}

struct RawVertex {
    point: Point,
    tight: Vec<usize>,
}

/// Intersections of `n` hyperplanes that satisfy every constraint.
fn feasible_intersections(dim: usize, planes: &[HalfSpace], tol: f64) -> Vec<RawVertex> {
    let mut out: Vec<RawVertex> = Vec::new();
    for combo in (0..planes.len()).combinations(dim) {
        let a = DMatrix::from_fn(dim, dim, |r, c| planes[combo[r]].normal[c]);
        let scale: f64 = combo.iter().map(|&k| planes[k].normal.norm()).product();
        let lu = a.clone().lu();
        if lu.determinant().abs() <= 1e-12 * scale {
            continue;
        }
        let b = DVector::from_iterator(dim, combo.iter().map(|&k| -planes[k].offset));
        let Some(x) = lu.solve(&b) else { continue };
        if planes.iter().all(|h| h.signed_distance(&x) >= -tol) {
            if out.iter().any(|v| (&v.point - &x).norm() <= tol) {
                continue;
            }
            out.push(RawVertex {
                point: x,
                tight: Vec::new(),
            });
        }
    }
    for v in &mut out {
        v.tight = (0..planes.len())
            .filter(|&k| planes[k].signed_distance(&v.point).abs() <= tol)
            .collect();
    }
    out
}

fn affine_rank(points: &[&Point], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let n = points[0].len();
    let m = DMatrix::from_fn(n, points.len() - 1, |r, c| points[c + 1][r] - points[0][r]);
    let sv = m.singular_values();
    sv.iter().filter(|&&s| s > tol).count()
}

type Enumerated = (Vec<Point>, Vec<Vec<usize>>, f64);

fn enumerate_vertices(dim: usize, halfspaces: &[HalfSpace]) -> Result<Enumerated, PolytopeError> {
    let scale0 = halfspaces
        .iter()
        .map(|h| h.offset.abs() / h.normal.norm())
        .fold(1.0, f64::max);
    let pre = feasible_intersections(dim, halfspaces, GEOMETRIC_TOL * scale0);
    let reach = pre
        .iter()
        .map(|v| v.point.amax())
        .fold(scale0, f64::max);

    // Box the region far outside every candidate vertex; a feasible box corner
    // or box-face point means the region escapes to infinity.
    let radius = 10.0 * (reach + scale0) + 1.0;
    let mut boxed = halfspaces.to_vec();
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut normal = DVector::zeros(dim);
            normal[i] = sign;
            boxed.push(HalfSpace {
                normal,
                offset: radius,
            });
        }
    }
    let boxed_vertices = feasible_intersections(dim, &boxed, GEOMETRIC_TOL * radius);
    if boxed_vertices.is_empty() {
        return Err(PolytopeError::Empty);
    }
    let d = halfspaces.len();
    let escaping: Vec<&RawVertex> = boxed_vertices
        .iter()
        .filter(|v| v.tight.iter().any(|&k| k >= d))
        .collect();
    if !escaping.is_empty() {
        let mut facets: Vec<usize> = escaping
            .iter()
            .flat_map(|v| v.tight.iter().copied().filter(|&k| k < d))
            .collect();
        facets.sort_unstable();
        facets.dedup();
        return Err(PolytopeError::Unbounded { facets });
    }

    let points: Vec<&Point> = boxed_vertices.iter().map(|v| &v.point).collect();
    let mut diameter: f64 = 0.0;
    for (a, b) in points.iter().tuple_combinations() {
        diameter = diameter.max((*a - *b).norm());
    }
    if diameter == 0.0 || affine_rank(&points, 1e-9 * diameter) < dim {
        return Err(PolytopeError::Empty);
    }

    // Re-derive incidences with the diameter-relative tolerance.
    let tol = GEOMETRIC_TOL * diameter;
    let mut vertices = Vec::new();
    let mut incidences = Vec::new();
    for v in &boxed_vertices {
        let tight: Vec<usize> = (0..d)
            .filter(|&k| halfspaces[k].signed_distance(&v.point).abs() <= tol)
            .collect();
        vertices.push(v.point.clone());
        incidences.push(tight);
    }

    for k in 0..d {
        let on: Vec<&Point> = incidences
            .iter()
            .zip(&vertices)
            .filter(|(inc, _)| inc.contains(&k))
            .map(|(_, v)| v)
            .collect();
        if on.len() < dim || affine_rank(&on, 1e-9 * diameter) + 1 < dim {
            return Err(PolytopeError::RedundantFacet { index: k });
        }
    }
    for (v, inc) in vertices.iter().zip(&incidences) {
        if inc.len() != dim {
            return Err(PolytopeError::NotSimple {
                vertex: v.iter().copied().collect(),
                facets: inc.clone(),
            });
        }
    }

    // Deterministic vertex order.
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&vertices[a], &vertices[b]));
    let vertices = order.iter().map(|&i| vertices[i].clone()).collect();
    let incidences = order.iter().map(|&i| incidences[i].clone()).collect();
    Ok((vertices, incidences, diameter))
}

/// Facet hyperplanes of the hull of `points` with unit inward normals, together
/// with the indices of the input points lying on each.
fn hull_facets(dim: usize, points: &[Point]) -> Result<Vec<(HalfSpace, Vec<usize>)>, PolytopeError> {
    if dim == 0 {
        return Err(PolytopeError::BadDimension);
    }
    let refs: Vec<&Point> = points.iter().collect();
    let mut diameter: f64 = 0.0;
    for (a, b) in refs.iter().tuple_combinations() {
        diameter = diameter.max((*a - *b).norm());
    }
    let rank = if diameter > 0.0 {
        affine_rank(&refs, 1e-9 * diameter)
    } else {
        0
    };
    if rank < dim {
        return Err(PolytopeError::DegenerateHull { rank });
    }
    let tol = GEOMETRIC_TOL * diameter;
    let mut facets: Vec<(HalfSpace, Vec<usize>)> = Vec::new();
    for combo in (0..points.len()).combinations(dim) {
        let base = &points[combo[0]];
        let edges = DMatrix::from_fn(dim, dim - 1, |r, c| points[combo[c + 1]][r] - base[r]);
        let normal = if dim == 1 {
            DVector::from_element(1, 1.0)
        } else {
            let svd = (edges.clone() * edges.transpose()).symmetric_eigen();
            let (imin, _) = svd
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            let second = svd
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != imin)
                .map(|(_, v)| *v)
                .fold(f64::INFINITY, f64::min);
            if dim > 1 && second <= (1e-9 * diameter).powi(2) {
                continue;
            }
            svd.eigenvectors.column(imin).into_owned()
        };
        let mut h = HalfSpace {
            offset: -normal.dot(base),
            normal,
        };
        let dists: Vec<f64> = points.iter().map(|p| h.eval(p)).collect();
        let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
        let max = dists.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if min < -tol && max > tol {
            continue;
        }
        if max <= tol {
            h.normal = -h.normal;
            h.offset = -h.offset;
        }
        let norm = h.normal.norm();
        h.normal /= norm;
        h.offset /= norm;
        if facets
            .iter()
            .any(|(g, _)| (&g.normal - &h.normal).norm() <= 1e-9 && (g.offset - h.offset).abs() <= tol)
        {
            continue;
        }
        let support = (0..points.len()).filter(|&i| h.eval(&points[i]).abs() <= tol).collect();
        facets.push((h, support));
    }
    facets.sort_by(|a, b| lex_cmp(&a.0.normal, &b.0.normal));
    Ok(facets)
}

/// Exact hyperplane through the exact points on a float facet, oriented like `float`.
fn exact_plane_through(dim: usize, points: &[Vec<Rational>], support: &[usize], float: &HalfSpace) -> ExactHalfSpace {
    let base = &points[support[0]];
    let rows: Vec<Vec<Rational>> = support[1..]
        .iter()
        .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let normal = if dim == 1 {
        vec![exact::from_i64(1)]
    } else {
        exact::null_vector(&rows, dim).expect("facet support spans a hyperplane")
    };
    let mut plane = ExactHalfSpace {
        offset: -normal.iter().zip(base).fold(Rational::zero(), |acc, (a, b)| acc + a * b),
        normal,
    };
    let dot: f64 = plane
        .normal
        .iter()
        .zip(float.normal.iter())
        .map(|(a, b)| exact::to_f64(a) * b)
        .sum();
    if dot < 0.0 {
        plane = plane.scaled(&exact::from_i64(-1));
    }
    debug_assert!(plane.normal.iter().any(|v| !v.is_zero()));
    debug_assert!(!plane.offset.is_negative() || plane.offset.is_negative());
    plane
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn pt(v: &[f64]) -> Point {
        DVector::from_column_slice(v)
    }

    fn has_vertex(p: &LabelledPolytope, v: &[f64]) -> bool {
        p.vertices().iter().any(|w| (w - pt(v)).norm() < 1e-12)
    }

    #[test]
    fn square_from_halfspaces() {
        let sq = fixtures::square();
        assert_eq!(sq.vertices().len(), 4);
        for inc in sq.vertex_facets() {
            assert_eq!(inc.len(), 2);
        }
        for v in [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]] {
            assert!(has_vertex(&sq, &v));
        }
    }

    #[test]
    fn hirzebruch_quadrilateral_vertices() {
        let q = fixtures::hirzebruch_unit();
        assert_eq!(q.vertices().len(), 4);
        for v in [[1.0, 0.0], [1.0, 1.0], [2.0, 2.0], [2.0, 0.0]] {
            assert!(has_vertex(&q, &v), "missing {v:?}");
        }
    }

    #[test]
    fn infeasible_system_is_empty() {
        let hs = vec![
            HalfSpace::new(vec![1.0, 0.0], 0.0),
            HalfSpace::new(vec![-1.0, 0.0], -1.0),
            HalfSpace::new(vec![0.0, 1.0], 0.0),
        ];
        assert_eq!(LabelledPolytope::from_halfspaces(2, hs).unwrap_err(), PolytopeError::Empty);
    }

    #[test]
    fn open_wedge_is_unbounded() {
        let hs = vec![
            HalfSpace::new(vec![1.0, 0.0], 0.0),
            HalfSpace::new(vec![0.0, 1.0], 0.0),
            HalfSpace::new(vec![1.0, -1.0], 1.0),
        ];
        match LabelledPolytope::from_halfspaces(2, hs) {
            Err(PolytopeError::Unbounded { facets }) => assert!(!facets.is_empty()),
            other => panic!("expected Unbounded, got {other:?}"),
        }
    }

    #[test]
    fn redundant_and_non_simple_inputs() {
        let mut hs = fixtures::square().halfspaces().to_vec();
        hs.push(HalfSpace::new(vec![1.0, 0.0], 5.0));
        assert_eq!(
            LabelledPolytope::from_halfspaces(2, hs).unwrap_err(),
            PolytopeError::RedundantFacet { index: 4 }
        );
        // The octahedron's vertices each lie on four facets.
        let mut hs = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    hs.push(HalfSpace::new(vec![sx, sy, sz], 1.0));
                }
            }
        }
        assert!(matches!(
            LabelledPolytope::from_halfspaces(3, hs),
            Err(PolytopeError::NotSimple { .. })
        ));
    }

    #[test]
    fn hull_of_unit_triangle() {
        let t = LabelledPolytope::from_vertices(2, &[pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0])]).unwrap();
        assert_eq!(t.num_facets(), 3);
        let s = 1.0 / 2f64.sqrt();
        assert!(t
            .halfspaces()
            .iter()
            .any(|h| (&h.normal - pt(&[-s, -s])).norm() < 1e-12 && (h.offset - s).abs() < 1e-12));
        for h in t.halfspaces() {
            assert!((h.normal.norm() - 1.0).abs() < 1e-12);
        }
        // Lexicographic order of unit normals.
        for w in t.halfspaces().windows(2) {
            assert_ne!(lex_cmp(&w[0].normal, &w[1].normal), Ordering::Greater);
        }
    }

    #[test]
    fn hull_of_hirzebruch_points_matches_shape() {
        let pts: Vec<Point> = [[1.0, 0.0], [1.0, 1.0], [2.0, 2.0], [2.0, 0.0]].iter().map(|v| pt(v)).collect();
        let q = LabelledPolytope::from_vertices(2, &pts).unwrap();
        assert!(q.same_shape(&fixtures::hirzebruch_unit()));
        assert!(q.halfspaces().iter().all(|h| (h.normal.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts: Vec<Point> = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]].iter().map(|v| pt(v)).collect();
        assert_eq!(
            LabelledPolytope::from_vertices(2, &pts).unwrap_err(),
            PolytopeError::DegenerateHull { rank: 1 }
        );
    }

    #[test]
    fn triangulations() {
        let sq = fixtures::square();
        let tri = sq.triangulate();
        assert_eq!(tri.len(), 2);
        assert!((tri.iter().map(Simplex::volume).sum::<f64>() - 4.0).abs() < 1e-14);

        let q = fixtures::hirzebruch_unit();
        let mut areas: Vec<f64> = q.triangulate().iter().map(Simplex::volume).collect();
        areas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Shoelace on the fan from (1,0): (1,0),(2,0),(2,2) and (1,0),(2,2),(1,1).
        let shoelace = |p: [[f64; 2]; 3]| {
            0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs()
        };
        let a1 = shoelace([[1.0, 0.0], [2.0, 2.0], [1.0, 1.0]]);
        let a2 = shoelace([[1.0, 0.0], [2.0, 0.0], [2.0, 2.0]]);
        assert_eq!((a1, a2), (0.5, 1.0));
        assert!((areas[0] - a1).abs() < 1e-14 && (areas[1] - a2).abs() < 1e-14);

        let t = fixtures::simplex(2);
        let tri = t.triangulate();
        assert_eq!(tri.len(), 1);
        assert!((tri[0].volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn facet_decompositions() {
        let sq = fixtures::square();
        // Facet 1 is x1 = 1 (normal (-1, 0)).
        let f = sq.facet_decomposition(1).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0].volume() - 2.0).abs() < 1e-14);
        assert!(f[0].vertices.iter().all(|v| (v[0] - 1.0).abs() < 1e-14));

        let q = fixtures::hirzebruch_unit();
        let diag = q.facet_decomposition(3).unwrap();
        let dist = ((2.0f64 - 1.0).powi(2) + (2.0f64 - 1.0).powi(2)).sqrt();
        assert!((diag[0].volume() - dist).abs() < 1e-14);

        let t = fixtures::simplex(2);
        let hyp = t.facet_decomposition(2).unwrap();
        assert!((hyp[0].volume() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(
            t.facet_decomposition(7).unwrap_err(),
            PolytopeError::BadIndex { index: 7, count: 3 }
        );
    }

    #[test]
    fn exact_vertices_follow_exact_labels() {
        let q = fixtures::hirzebruch_unit();
        let ex = q.exact().unwrap();
        assert!(ex.labels_exact);
        let two = exact::from_i64(2);
        assert!(ex.vertices.iter().any(|v| v[0] == two && v[1] == two));
    }

    #[test]
    fn rational_hull_keeps_exact_planes() {
        let pts: Vec<Vec<Rational>> = [[0, 0], [3, 0], [0, 2], [2, 2]]
            .iter()
            .map(|p| p.iter().map(|&c| exact::from_i64(c)).collect())
            .collect();
        let p = LabelledPolytope::from_rational_vertices(2, &pts).unwrap();
        let ex = p.exact().unwrap();
        assert!(!ex.labels_exact);
        for (plane, h) in ex.planes.iter().zip(p.halfspaces()) {
            let ratio = exact::to_f64(&plane.normal[0]) / h.normal[0];
            let ratio = if h.normal[0].abs() < 1e-12 {
                exact::to_f64(&plane.normal[1]) / h.normal[1]
            } else {
                ratio
            };
            assert!(ratio > 0.0);
            assert!((exact::to_f64(&plane.offset) - ratio * h.offset).abs() < 1e-9);
        }
    }
}
