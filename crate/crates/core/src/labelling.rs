//! Label algebra on a fixed polytope.
//!
//! The shape of a polytope says nothing about the lengths of its normals; the
//! labels carry that extra information. This module finds monotone labellings
//! (all defining functions agree at one interior point), computes the
//! Einstein normalization `ν_k / L_k(barycenter)`, answers lattice questions
//! about rational labels and compares two labellings facet by facet to
//! classify cone-angle singularities.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact::{self, Rational};
use crate::measure;
use crate::polytope::{ExactHalfSpace, HalfSpace, LabelledPolytope};

/// Relative tolerance for monotonicity: `|L_k(p) − c| ≤ MONOTONE_TOL·c`.
pub const MONOTONE_TOL: f64 = 1e-9;
/// Default tolerance for classifying a cone-angle ratio as smooth.
pub const SMOOTH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabellingError {
    #[error("the origin must be interior with every defining function equal to 1 there")]
    NormalizationRequired,
    #[error("point {point:?} is not in the interior of the polytope")]
    PointNotInterior { point: Vec<f64> },
    #[error("scale must be positive, got {value}")]
    NonPositiveScale { value: f64 },
    #[error("labels are not known exactly; lattice questions need rational input")]
    IrrationalInput,
    #[error("labels are not integral (facet {facet}); rescale them first")]
    NonIntegralLabels { facet: usize },
    #[error("labels of facet {facet} are not positively collinear")]
    NotCollinear { facet: usize },
    #[error("labellings describe different polytopes: {reason}")]
    FacetMismatch { reason: String },
}

/// Witness that every defining function takes the value `common_value` at
/// `preferred_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCertificate {
    pub preferred_point: DVector<f64>,
    pub common_value: f64,
    /// `max_k |L_k(p) − c| / c`.
    pub residual: f64,
    /// Exact preferred point and common value, when the labels are rational.
    pub exact: Option<(Vec<Rational>, Rational)>,
}

fn certify(poly: &LabelledPolytope, p: DVector<f64>, exact: Option<(Vec<Rational>, Rational)>) -> Option<MonotoneCertificate> {
    if !poly.contains(&p) {
        return None;
    }
    let values = poly.defining_values(&p);
    let c = values.iter().sum::<f64>() / values.len() as f64;
    let residual = values.iter().map(|v| (v - c).abs()).fold(0.0, f64::max) / c;
    let common_value = match &exact {
        Some((_, c)) => exact::to_f64(c),
        None => c,
    };
    (residual <= MONOTONE_TOL).then_some(MonotoneCertificate {
        preferred_point: p,
        common_value,
        residual,
        exact,
    })
}

/// The point where all defining functions agree, if there is one inside `P`.
pub fn monotone_point(poly: &LabelledPolytope) -> Option<MonotoneCertificate> {
    if let Some(planes) = poly.exact_labels() {
        return monotone_point_exact(poly, planes);
    }
    // Unknowns (p, c): ⟨ν_k, p⟩ − c = −c_k, solved in the least-squares sense.
    let n = poly.dim();
    let hs = poly.halfspaces();
    let a = DMatrix::from_fn(hs.len(), n + 1, |r, col| if col < n { hs[r].normal[col] } else { -1.0 });
    let b = DVector::from_iterator(hs.len(), hs.iter().map(|h| -h.offset));
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-14).ok()?;
    let p = sol.rows(0, n).into_owned();
    certify(poly, p, None)
}

fn monotone_point_exact(poly: &LabelledPolytope, planes: &[ExactHalfSpace]) -> Option<MonotoneCertificate> {
    let n = poly.dim();
    let rows: Vec<Vec<Rational>> = planes
        .iter()
        .map(|h| {
            let mut r = h.normal.clone();
            r.push(-Rational::one());
            r
        })
        .collect();
    // Pick n + 1 independent equations greedily, solve, then check the rest.
    let mut chosen: Vec<usize> = Vec::new();
    for k in 0..rows.len() {
        let mut trial = chosen.clone();
        trial.push(k);
        if rank(&trial.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>()) == trial.len() {
            chosen = trial;
        }
        if chosen.len() == n + 1 {
            break;
        }
    }
    if chosen.len() < n + 1 {
        return None;
    }
    let sys: Vec<Vec<Rational>> = chosen.iter().map(|&i| rows[i].clone()).collect();
    let rhs: Vec<Rational> = chosen.iter().map(|&i| -planes[i].offset.clone()).collect();
    let sol = exact::solve(&sys, &rhs)?;
    let (p, c) = (sol[..n].to_vec(), sol[n].clone());
    if !c.is_positive() || planes.iter().any(|h| h.eval(&p) != c) {
        return None;
    }
    let pf = DVector::from_iterator(n, p.iter().map(exact::to_f64));
    certify(poly, pf, Some((p, c)))
}

fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if !m[i][col].is_zero() {
                let f = &m[i][col] / &m[r][col];
                for c in col..cols {
                    let sub = &f * &m[r][c];
                    m[i][c] = &m[i][c] - sub;
                }
            }
        }
        r += 1;
    }
    r
}

/// Rescales every label by `λ / L_k(p)`, which makes `p` the preferred point
/// with common value `λ`.
pub fn cone_labels(poly: &LabelledPolytope, lambda: f64, p: &DVector<f64>) -> Result<LabelledPolytope, LabellingError> {
    if !(lambda > 0.0) {
        return Err(LabellingError::NonPositiveScale { value: lambda });
    }
    if p.len() != poly.dim() || !poly.contains(p) {
        return Err(LabellingError::PointNotInterior {
            point: p.iter().copied().collect(),
        });
    }
    let scales: Vec<f64> = poly.defining_values(p).iter().map(|l| lambda / l).collect();
    Ok(poly.rescaled(&scales))
}

/// Exact variant of [`cone_labels`] for rational labels and a rational point.
pub fn cone_labels_exact(
    poly: &LabelledPolytope,
    lambda: &Rational,
    p: &[Rational],
) -> Result<LabelledPolytope, LabellingError> {
    let planes = poly.exact_labels().ok_or(LabellingError::IrrationalInput)?;
    let pf = DVector::from_iterator(p.len(), p.iter().map(exact::to_f64));
    if !lambda.is_positive() {
        return Err(LabellingError::NonPositiveScale {
            value: exact::to_f64(lambda),
        });
    }
    if p.len() != poly.dim() || !poly.contains(&pf) || planes.iter().any(|h| !h.eval(p).is_positive()) {
        return Err(LabellingError::PointNotInterior {
            point: pf.iter().copied().collect(),
        });
    }
    let scales: Vec<Rational> = planes.iter().map(|h| lambda / h.eval(p)).collect();
    Ok(poly.rescaled_exact(&scales))
}

/// Relabels by `ν_k / L_k(p̄)` with `p̄` the barycenter of `(P, dϖ)`.
///
/// The result depends only on the shape: it is monotone with preferred point
/// `p̄` and common value 1, and its extremal affine function is constant.
/// When the facet hyperplanes and vertices are rational the output labels are
/// exact.
pub fn einstein_normalize(poly: &LabelledPolytope) -> (LabelledPolytope, MonotoneCertificate) {
    let n = poly.dim();
    if let (Some(exact_data), Some(w)) = (poly.exact(), measure::exact_interior_moments(poly)) {
        let bary: Vec<Rational> = (1..=n).map(|i| &w[0][i] / &w[0][0]).collect();
        let planes: Vec<ExactHalfSpace> = exact_data
            .planes
            .iter()
            .map(|h| h.scaled(&h.eval(&bary).recip()))
            .collect();
        let out = poly.with_exact_labels(planes);
        let p = DVector::from_iterator(n, bary.iter().map(exact::to_f64));
        let residual = out
            .defining_values(&p)
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max);
        let cert = MonotoneCertificate {
            preferred_point: p,
            common_value: 1.0,
            residual,
            exact: Some((bary, Rational::one())),
        };
        return (out, cert);
    }
    let bary = measure::moments(poly).barycenter();
    let scales: Vec<f64> = poly.defining_values(&bary).iter().map(|l| 1.0 / l).collect();
    let out = poly.rescaled(&scales);
    let residual = out
        .defining_values(&bary)
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    let cert = MonotoneCertificate {
        preferred_point: bary,
        common_value: 1.0,
        residual,
        exact: None,
    };
    (out, cert)
}

/// `n / ((n+1)·∫_∂P dσ_ν) · (∫_∂P x_i dσ_ν)_i`, valid when `0 ∈ P` and every
/// `L_k(0) = 1`; it then coincides with the barycenter of `P`.
pub fn preferred_point_formula(poly: &LabelledPolytope) -> Result<DVector<f64>, LabellingError> {
    let n = poly.dim();
    let origin = DVector::zeros(n);
    let normalized = poly.contains(&origin)
        && poly
            .defining_values(&origin)
            .iter()
            .all(|v| (v - 1.0).abs() <= MONOTONE_TOL);
    if !normalized {
        return Err(LabellingError::NormalizationRequired);
    }
    let z = measure::moments(poly).z;
    let factor = n as f64 / ((n as f64 + 1.0) * z[0]);
    Ok(DVector::from_fn(n, |i, _| factor * z[i + 1]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalityReport {
    /// Vertices are rational, so some dilation of `P` is a lattice polytope.
    pub is_lattice_polytope: bool,
    /// Vertices already lie in `ℤⁿ`.
    pub vertices_integral: bool,
    /// Least common denominator of the vertex coordinates.
    pub vertex_denominator: Option<BigInt>,
    /// Least positive `s` with every `s·ν_k` integral.
    pub minimal_scale: Option<Rational>,
    pub scaled_normals: Option<Vec<Vec<BigInt>>>,
}

/// Lattice data of rational labels with respect to `ℤⁿ`.
pub fn rationality(poly: &LabelledPolytope) -> Result<RationalityReport, LabellingError> {
    let planes = poly.exact_labels().ok_or(LabellingError::IrrationalInput)?;
    let exact_data = poly.exact().expect("exact labels imply exact data");
    let has_vertices = exact_data.vertices.len() == poly.vertices().len();
    let vertex_denominator = has_vertices.then(|| {
        exact_data
            .vertices
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()))
    });
    let vertices_integral = vertex_denominator.as_ref().is_some_and(One::is_one);
    let minimal_scale = exact::minimal_integral_scale(planes.iter().flat_map(|h| h.normal.iter()));
    let scaled_normals = minimal_scale.as_ref().map(|s| {
        planes
            .iter()
            .map(|h| h.normal.iter().map(|v| (v * s).to_integer()).collect())
            .collect()
    });
    Ok(RationalityReport {
        is_lattice_polytope: has_vertices,
        vertices_integral,
        vertex_denominator,
        minimal_scale,
        scaled_normals,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexDeterminant {
    pub vertex: Vec<Rational>,
    pub facets: Vec<usize>,
    pub abs_det: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelzantReport {
    pub vertices: Vec<VertexDeterminant>,
    pub is_delzant: bool,
    /// Index of the lattice spanned by all labels in `ℤⁿ` (1 when they span `ℤⁿ`).
    pub label_lattice_index: BigInt,
    pub caveat: Option<String>,
}

/// Checks that the labels at every vertex form a basis of `ℤⁿ`.
pub fn delzant_check(poly: &LabelledPolytope) -> Result<DelzantReport, LabellingError> {
    let planes = poly.exact_labels().ok_or(LabellingError::IrrationalInput)?;
    for (facet, h) in planes.iter().enumerate() {
        if !h.normal.iter().all(exact::is_integer) {
            return Err(LabellingError::NonIntegralLabels { facet });
        }
    }
    let exact_vertices = &poly.exact().expect("exact labels imply exact data").vertices;
    let mut vertices = Vec::new();
    for (i, facets) in poly.vertex_facets().iter().enumerate() {
        let rows: Vec<Vec<Rational>> = facets.iter().map(|&k| planes[k].normal.clone()).collect();
        let det = exact::determinant(&rows).abs();
        vertices.push(VertexDeterminant {
            vertex: exact_vertices[i].clone(),
            facets: facets.clone(),
            abs_det: det.to_integer(),
        });
    }
    let is_delzant = vertices.iter().all(|v| v.abs_det.is_one());
    let label_lattice_index = lattice_index(planes, poly.dim());
    let caveat = (!label_lattice_index.is_one()).then(|| {
        format!(
            "labels span a sublattice of index {label_lattice_index} in Z^n; determinants are reported with respect to Z^n"
        )
    });
    Ok(DelzantReport {
        vertices,
        is_delzant,
        label_lattice_index,
        caveat,
    })
}

/// gcd of all maximal minors of the label matrix.
fn lattice_index(planes: &[ExactHalfSpace], n: usize) -> BigInt {
    use itertools::Itertools;
    let mut g = BigInt::zero();
    for combo in (0..planes.len()).combinations(n) {
        let rows: Vec<Vec<Rational>> = combo.iter().map(|&k| planes[k].normal.clone()).collect();
        let d = exact::determinant(&rows).to_integer();
        g = num_integer::Integer::gcd(&g, &d);
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularityClass {
    /// Cone angle `2π·a < 2π`.
    Conical { angle: f64 },
    Smooth,
    /// Cone angle `2π·a > 2π`.
    LargeAngle { angle: f64 },
}

impl SingularityClass {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Conical { .. } => "conical",
            Self::Smooth => "smooth",
            Self::LargeAngle { .. } => "large-angle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetSingularity {
    /// `a_k` with `a_k ν_k = η_k`.
    pub ratio: f64,
    pub exact_ratio: Option<Rational>,
    pub class: SingularityClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityReport {
    pub facets: Vec<FacetSingularity>,
    pub tolerance: f64,
}

/// Compares a candidate labelling `ν` against reference labels `η` on the same polytope.
pub fn cone_angles(
    reference: &LabelledPolytope,
    candidate: &LabelledPolytope,
    tolerance: f64,
) -> Result<SingularityReport, LabellingError> {
    if reference.dim() != candidate.dim() || reference.num_facets() != candidate.num_facets() {
        return Err(LabellingError::FacetMismatch {
            reason: format!(
                "{} facets in dimension {} vs {} facets in dimension {}",
                reference.num_facets(),
                reference.dim(),
                candidate.num_facets(),
                candidate.dim()
            ),
        });
    }
    let exact_pair = reference.exact_labels().zip(candidate.exact_labels());
    let mut facets = Vec::with_capacity(reference.num_facets());
    for k in 0..reference.num_facets() {
        let (eta, nu) = (&reference.halfspaces()[k], &candidate.halfspaces()[k]);
        check_collinear(k, eta, nu)?;
        let ratio = eta.normal.norm() / nu.normal.norm();
        let exact_ratio = match exact_pair {
            Some((e, c)) => Some(exact_collinear_ratio(k, &e[k], &c[k])?),
            None => None,
        };
        let class = match &exact_ratio {
            Some(q) => classify_exact(q),
            None => classify(ratio, tolerance),
        };
        facets.push(FacetSingularity {
            ratio: exact_ratio.as_ref().map_or(ratio, exact::to_f64),
            exact_ratio,
            class,
        });
    }
    Ok(SingularityReport { facets, tolerance })
}

fn check_collinear(k: usize, eta: &HalfSpace, nu: &HalfSpace) -> Result<(), LabellingError> {
    let (ne, nn) = (eta.normal.norm(), nu.normal.norm());
    let cos = eta.normal.dot(&nu.normal) / (ne * nn);
    if !(cos >= 1.0 - 1e-12) {
        return Err(LabellingError::NotCollinear { facet: k });
    }
    let (oe, on) = (eta.offset / ne, nu.offset / nn);
    if (oe - on).abs() > 1e-9 * (1.0 + oe.abs().max(on.abs())) {
        return Err(LabellingError::FacetMismatch {
            reason: format!("facet {} lies on different hyperplanes", k + 1),
        });
    }
    Ok(())
}

fn exact_collinear_ratio(k: usize, eta: &ExactHalfSpace, nu: &ExactHalfSpace) -> Result<Rational, LabellingError> {
    let i = nu
        .normal
        .iter()
        .position(|v| !v.is_zero())
        .ok_or(LabellingError::NotCollinear { facet: k })?;
    let a = &eta.normal[i] / &nu.normal[i];
    let same = a.is_positive() && eta.normal.iter().zip(&nu.normal).all(|(e, v)| *e == &a * v) && eta.offset == &a * &nu.offset;
    if same {
        Ok(a)
    } else {
        Err(LabellingError::NotCollinear { facet: k })
    }
}

fn classify(a: f64, tol: f64) -> SingularityClass {
    if (a - 1.0).abs() <= tol {
        SingularityClass::Smooth
    } else if a < 1.0 {
        SingularityClass::Conical { angle: 2.0 * PI * a }
    } else {
        SingularityClass::LargeAngle { angle: 2.0 * PI * a }
    }
}

fn classify_exact(a: &Rational) -> SingularityClass {
    let angle = 2.0 * PI * exact::to_f64(a);
    if a.is_one() {
        SingularityClass::Smooth
    } else if *a < Rational::one() {
        SingularityClass::Conical { angle }
    } else {
        SingularityClass::LargeAngle { angle }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(s: &str) -> Rational {
        exact::parse_rational(s).unwrap()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn monotone_points() {
        let c = monotone_point(&fixtures::simplex(2)).unwrap();
        assert!((c.preferred_point - v(&[1.0 / 3.0, 1.0 / 3.0])).amax() < 1e-15);
        assert_eq!(c.exact.unwrap().1, q("1/3"));

        let c = monotone_point(&fixtures::hirzebruch_unit()).unwrap();
        let (p, value) = c.exact.clone().unwrap();
        assert_eq!(p, vec![q("14/9"), q("7/9")]);
        assert_eq!(value, q("7/9"));
        assert!((c.common_value - 7.0 / 9.0).abs() < 1e-15);

        let sq = fixtures::square();
        assert!(monotone_point(&sq.rescaled(&[2.0, 1.0, 1.0, 1.0])).is_none());
        assert!(monotone_point(&sq.rescaled_exact(&[q("2"), q("1"), q("1"), q("1")])).is_none());
        // The float path agrees with the exact path.
        let floaty = fixtures::hirzebruch_unit().rescaled(&[1.0; 4]);
        let c = monotone_point(&floaty).unwrap();
        assert!((c.preferred_point - v(&[14.0 / 9.0, 7.0 / 9.0])).amax() < 1e-13);
    }

    #[test]
    fn einstein_normalization_examples() {
        let (sq, cert) = einstein_normalize(&fixtures::square().rescaled(&[3.0, 0.5, 2.0, 7.0]));
        assert!(cert.preferred_point.amax() < 1e-15);
        for h in sq.halfspaces() {
            assert!((h.normal.norm() - 1.0).abs() < 1e-14 && (h.offset - 1.0).abs() < 1e-14);
        }

        let (h, cert) = einstein_normalize(&fixtures::hirzebruch_unit());
        assert_eq!(cert.exact.clone().unwrap().0, vec![q("14/9"), q("7/9")]);
        let expected = fixtures::hirzebruch(&q("9/7"));
        assert_eq!(h.exact_labels(), expected.exact_labels());

        let (t, cert) = einstein_normalize(&fixtures::simplex(2));
        assert!((cert.preferred_point - v(&[1.0 / 3.0, 1.0 / 3.0])).amax() < 1e-15);
        let labels: Vec<Vec<Rational>> = t.exact_labels().unwrap().iter().map(|h| h.normal.clone()).collect();
        assert_eq!(labels, vec![vec![q("3"), q("0")], vec![q("0"), q("3")], vec![q("-3"), q("-3")]]);
    }

    #[test]
    fn normalization_from_rational_vertices_is_exact() {
        let pts: Vec<Vec<Rational>> = [["1", "0"], ["1", "1"], ["2", "2"], ["2", "0"]]
            .iter()
            .map(|p| p.iter().map(|s| q(s)).collect())
            .collect();
        let poly = LabelledPolytope::from_rational_vertices(2, &pts).unwrap();
        let (out, _) = einstein_normalize(&poly);
        // Same labels as the exact fixture, possibly in a different facet order.
        let mut got: Vec<Vec<Rational>> = out.exact_labels().unwrap().iter().map(|h| h.normal.clone()).collect();
        let mut want: Vec<Vec<Rational>> = fixtures::hirzebruch(&q("9/7"))
            .exact_labels()
            .unwrap()
            .iter()
            .map(|h| h.normal.clone())
            .collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn preferred_point_formula_examples() {
        let (sq, _) = einstein_normalize(&fixtures::square());
        assert!(preferred_point_formula(&sq).unwrap().amax() < 1e-15);
        let p = preferred_point_formula(&fixtures::rectangle()).unwrap();
        assert!((p - v(&[1.0, 0.0])).amax() < 1e-14);
        assert_eq!(
            preferred_point_formula(&fixtures::hirzebruch_unit()),
            Err(LabellingError::NormalizationRequired)
        );
    }

    #[test]
    fn cone_label_examples() {
        let sq = fixtures::square();
        let out = cone_labels(&sq, 1.0, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(out.halfspaces(), sq.halfspaces());

        let t = fixtures::simplex(2);
        let out = cone_labels(&t, 1.0, &v(&[0.4, 0.3])).unwrap();
        let want = [[1.0 / 0.4, 0.0], [0.0, 1.0 / 0.3], [-1.0 / 0.3, -1.0 / 0.3]];
        for (h, w) in out.halfspaces().iter().zip(want) {
            assert!((&h.normal - v(&w)).amax() < 1e-14);
        }
        let cert = monotone_point(&out).unwrap();
        assert!((cert.preferred_point - v(&[0.4, 0.3])).amax() < 1e-13);
        assert!((cert.common_value - 1.0).abs() < 1e-13);

        assert!(matches!(
            cone_labels(&t, 1.0, &v(&[0.8, 0.8])),
            Err(LabellingError::PointNotInterior { .. })
        ));
        let exact_out = cone_labels_exact(&t, &q("1"), &[q("2/5"), q("3/10")]).unwrap();
        let cert = monotone_point(&exact_out).unwrap();
        assert_eq!(cert.exact.unwrap(), (vec![q("2/5"), q("3/10")], q("1")));
    }

    #[test]
    fn rationality_examples() {
        let r = rationality(&fixtures::hirzebruch_unit()).unwrap();
        assert_eq!(r.minimal_scale, Some(q("20")));
        let want: Vec<Vec<BigInt>> = [[28, 0], [-35, 0], [0, 20], [20, -20]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(r.scaled_normals, Some(want));
        assert!(r.is_lattice_polytope && r.vertices_integral);

        assert_eq!(rationality(&fixtures::square()).unwrap().minimal_scale, Some(q("1")));
        let (t, _) = einstein_normalize(&fixtures::simplex(2));
        assert_eq!(rationality(&t).unwrap().minimal_scale, Some(q("1/3")));
        assert_eq!(
            rationality(&fixtures::square().rescaled(&[1.0; 4])),
            Err(LabellingError::IrrationalInput)
        );
    }

    #[test]
    fn delzant_examples() {
        let r = delzant_check(&fixtures::hirzebruch_reference()).unwrap();
        assert!(r.is_delzant && r.caveat.is_none());
        assert!(r.vertices.iter().all(|v| v.abs_det.is_one()));
        assert!(delzant_check(&fixtures::simplex(2)).unwrap().is_delzant);

        let skew = fixtures::simplex(2).rescaled_exact(&[q("2"), q("1"), q("1")]);
        let r = delzant_check(&skew).unwrap();
        assert!(!r.is_delzant);
        let origin = r.vertices.iter().find(|v| v.vertex.iter().all(Zero::is_zero)).unwrap();
        assert_eq!(origin.abs_det, BigInt::from(2));

        assert_eq!(
            delzant_check(&fixtures::hirzebruch_unit()),
            Err(LabellingError::NonIntegralLabels { facet: 0 })
        );
        let doubled = fixtures::simplex(2).rescaled_exact(&[q("2"), q("2"), q("2")]);
        assert!(delzant_check(&doubled).unwrap().caveat.is_some());
    }

    #[test]
    fn cone_angle_examples() {
        let eta = fixtures::hirzebruch_reference();
        let r = cone_angles(&eta, &fixtures::hirzebruch_unit(), SMOOTH_TOL).unwrap();
        let ratios: Vec<Rational> = r.facets.iter().map(|f| f.exact_ratio.clone().unwrap()).collect();
        assert_eq!(ratios, vec![q("5/7"), q("4/7"), q("1"), q("1")]);
        match r.facets[0].class {
            SingularityClass::Conical { angle } => assert!((angle - 2.0 * PI * 5.0 / 7.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(r.facets[2].class, SingularityClass::Smooth);

        let same = cone_angles(&eta, &eta, SMOOTH_TOL).unwrap();
        assert!(same.facets.iter().all(|f| f.class == SingularityClass::Smooth));

        let half = eta.rescaled(&[0.5; 4]);
        let r = cone_angles(&eta, &half, SMOOTH_TOL).unwrap();
        assert!(r.facets.iter().all(|f| (f.ratio - 2.0).abs() < 1e-15));
        assert!(r.facets.iter().all(|f| matches!(f.class, SingularityClass::LargeAngle { .. })));

        assert!(matches!(
            cone_angles(&eta, &fixtures::square(), SMOOTH_TOL),
            Err(LabellingError::NotCollinear { .. }) | Err(LabellingError::FacetMismatch { .. })
        ));
        assert!(matches!(
            cone_angles(&eta, &fixtures::simplex(2), SMOOTH_TOL),
            Err(LabellingError::FacetMismatch { .. })
        ));
    }
}
