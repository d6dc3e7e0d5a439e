//! Symplectic potentials and the curvature quantities read off from them.
//!
//! A symplectic potential `u` on a labelled polytope defines the metric
//! `H = (Hess u)⁻¹`. Every [`PotentialModel`] evaluates `u`, `∇u`, `Hess u`
//! and the second-order jet of `H` analytically, which feeds the Abreu
//! scalar curvature `S = −Σ ∂_i∂_j H_ij`, the boundary audit of `H` along
//! the facets, the Legendre function `h = ⟨x − p, ∇u⟩ − u`, and the residual
//! of the Kähler–Einstein / soliton equation
//! `½ log det Hess u − λ h − ⟨a, x − p⟩ = const`.

use nalgebra::{DMatrix, DVector};

use crate::chebyshev::ChebyshevField;
use crate::fixtures;
use crate::jet::{Jet2, MatrixJet};
use crate::labelling;
use crate::polytope::LabelledPolytope;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("point {point:?} lies on the boundary, where the potential is singular")]
    PointOnBoundary { point: Vec<f64> },
    #[error("Hessian is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("polytope labelling is not monotone")]
    NotMonotone,
    #[error("scale must be positive, got {value}")]
    BadScale { value: f64 },
    #[error("this model needs a {expected}-dimensional domain, got {found}")]
    UnsupportedDimension { expected: usize, found: usize },
}

/// A symplectic potential together with its domain.
#[derive(Debug, Clone)]
pub enum PotentialModel {
    /// `u = ½ Σ L_k log L_k`.
    Guillemin(LabelledPolytope),
    /// Closed-form Kähler–Einstein potential of the first Hirzebruch surface
    /// on the quadrilateral `(1,0), (1,1), (2,2), (2,0)` with labels `ν(c)`.
    Hirzebruch { c: f64, domain: LabelledPolytope },
    /// Guillemin potential of `base` plus a smooth Chebyshev correction (plane only).
    Perturbed { base: LabelledPolytope, field: ChebyshevField },
    /// `u = ½‖x‖²` on the given polytope; flat metric, used as a control.
    Flat(LabelledPolytope),
}

/// `H = (Hess u)⁻¹` and the scalar curvature at an interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub x: DVector<f64>,
    pub h: DMatrix<f64>,
    pub scalar_curvature: f64,
}

pub fn guillemin(poly: &LabelledPolytope) -> PotentialModel {
    PotentialModel::Guillemin(poly.clone())
}

/// The Hirzebruch metric for labels `c·ν(1)`; `H(c) = H(1)/c`.
pub fn hirzebruch_closed_form(c: f64) -> Result<PotentialModel, PotentialError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(PotentialError::BadScale { value: c });
    }
    let domain = fixtures::hirzebruch_unit().rescaled(&[c; 4]);
    Ok(PotentialModel::Hirzebruch { c, domain })
}

// Pieces of the closed form, for c = 1. With y = x₂/x₁:
//   u = ψ(x₁) + x₁ φ(y),  ψ'' = x/A(x),  φ'' = 1/B(y),
//   A(x) = −(2/7)(x−1)(x−2)(2+3x),  B(y) = −2y(y−1).
fn xlogx(t: f64) -> f64 {
    t * t.ln()
}

fn psi(x: f64) -> (f64, f64, f64) {
    let (a, b, c) = (x - 1.0, 2.0 - x, x + 2.0 / 3.0);
    let v = 0.7 * xlogx(a) + 0.875 * xlogx(b) + 0.175 * xlogx(c);
    let d1 = 0.7 * (a.ln() + 1.0) - 0.875 * (b.ln() + 1.0) + 0.175 * (c.ln() + 1.0);
    let d2 = 0.7 / a + 0.875 / b + 0.175 / c;
    (v, d1, d2)
}

fn phi(y: f64) -> (f64, f64, f64) {
    let v = 0.5 * (xlogx(y) + xlogx(1.0 - y));
    let d1 = 0.5 * (y.ln() - (1.0 - y).ln());
    let d2 = 0.5 / (y * (1.0 - y));
    (v, d1, d2)
}

fn hirzebruch_h_jet(c: f64, x: &DVector<f64>) -> MatrixJet {
    let x1 = Jet2::variable(x[0], 0);
    let x2 = Jet2::variable(x[1], 1);
    let y = x2 / x1;
    let a = (x1 - 1.0) * (x1 - 2.0) * (x1 * 3.0 + 2.0) * (-2.0 / 7.0);
    let b = y * (y - 1.0) * -2.0;
    let s = a / x1;
    let inv_c = 1.0 / c;
    let h11 = s * inv_c;
    let h12 = s * y * inv_c;
    let h22 = (s * y * y + x1 * b) * inv_c;
    MatrixJet::from_entries(&[vec![h11, h12], vec![h12, h22]])
}

/// The scale `c` when `poly` is the Hirzebruch quadrilateral labelled by `c·ν(1)`.
pub fn hirzebruch_scale(poly: &LabelledPolytope) -> Option<f64> {
    let unit = fixtures::hirzebruch_unit();
    if poly.dim() != 2 || poly.num_facets() != 4 || !poly.same_shape(&unit) {
        return None;
    }
    let c = poly.halfspaces()[0].normal.norm() / unit.halfspaces()[0].normal.norm();
    let matches = poly
        .halfspaces()
        .iter()
        .zip(unit.halfspaces())
        .all(|(h, u)| (&h.normal - &u.normal * c).norm() <= 1e-12 * c * u.normal.norm());
    matches.then_some(c)
}

impl PotentialModel {
    pub fn domain(&self) -> &LabelledPolytope {
        match self {
            Self::Guillemin(p) | Self::Flat(p) => p,
            Self::Hirzebruch { domain, .. } => domain,
            Self::Perturbed { base, .. } => base,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Guillemin(_) => "guillemin",
            Self::Hirzebruch { .. } => "hirzebruch",
            Self::Perturbed { .. } => "perturbed",
            Self::Flat(_) => "flat",
        }
    }

    fn check(&self, x: &DVector<f64>) -> Result<(), PotentialError> {
        let poly = self.domain();
        if x.len() != poly.dim() {
            return Err(PotentialError::UnsupportedDimension {
                expected: poly.dim(),
                found: x.len(),
            });
        }
        if poly.contains(x) {
            return Ok(());
        }
        let point = x.iter().copied().collect();
        if poly.depth(x) >= -poly.tolerance() {
            Err(PotentialError::PointOnBoundary { point })
        } else {
            Err(PotentialError::OutsideDomain { point })
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64, PotentialError> {
        self.check(x)?;
        Ok(match self {
            Self::Guillemin(p) => guillemin_value(p, x),
            Self::Hirzebruch { c, .. } => {
                let y = x[1] / x[0];
                c * (psi(x[0]).0 + x[0] * phi(y).0)
            }
            Self::Perturbed { base, field } => guillemin_value(base, x) + field.value(x.as_slice()),
            Self::Flat(_) => 0.5 * x.norm_squared(),
        })
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>, PotentialError> {
        self.check(x)?;
        Ok(match self {
            Self::Guillemin(p) => guillemin_gradient(p, x),
            Self::Hirzebruch { c, .. } => {
                let y = x[1] / x[0];
                let (f, f1, _) = phi(y);
                DVector::from_row_slice(&[c * (psi(x[0]).1 + f - y * f1), c * f1])
            }
            Self::Perturbed { base, field } => {
                let j = field.jet(x.as_slice());
                guillemin_gradient(base, x) + DVector::from_row_slice(&j.g)
            }
            Self::Flat(_) => x.clone(),
        })
    }

    /// `Hess u`.
    pub fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, PotentialError> {
        self.check(x)?;
        Ok(match self {
            Self::Guillemin(p) => guillemin_g_jet(p, x, false).m,
            Self::Hirzebruch { c, .. } => {
                let y = x[1] / x[0];
                let q = DVector::from_row_slice(&[-y, 1.0]);
                let mut g = &q * q.transpose() * (phi(y).2 / x[0]);
                g[(0, 0)] += psi(x[0]).2;
                g * *c
            }
            Self::Perturbed { base, field } => {
                let j = field.jet(x.as_slice());
                guillemin_g_jet(base, x, false).m + DMatrix::from_fn(2, 2, |a, b| j.h[a][b])
            }
            Self::Flat(p) => DMatrix::identity(p.dim(), p.dim()),
        })
    }

    /// Jet of `Hess u` (value, first and second derivatives), for models where it is natural.
    fn hessian_jet(&self, x: &DVector<f64>) -> Option<MatrixJet> {
        match self {
            Self::Guillemin(p) => Some(guillemin_g_jet(p, x, true)),
            Self::Perturbed { base, field } => {
                let mut g = guillemin_g_jet(base, x, true);
                let j = field.jet(x.as_slice());
                g.m += DMatrix::from_fn(2, 2, |a, b| j.h[a][b]);
                for k in 0..2 {
                    g.dm[k] += DMatrix::from_fn(2, 2, |a, b| j.t[a][b][k]);
                    for l in 0..2 {
                        g.d2m[k][l] += DMatrix::from_fn(2, 2, |a, b| j.q[a][b][k][l]);
                    }
                }
                Some(g)
            }
            Self::Flat(p) => {
                let n = p.dim();
                Some(MatrixJet {
                    m: DMatrix::identity(n, n),
                    dm: vec![DMatrix::zeros(n, n); n],
                    d2m: vec![vec![DMatrix::zeros(n, n); n]; n],
                })
            }
            Self::Hirzebruch { .. } => None,
        }
    }

    /// `H = (Hess u)⁻¹` with its first and second derivatives.
    pub fn metric_jet(&self, x: &DVector<f64>) -> Result<MatrixJet, PotentialError> {
        self.check(x)?;
        let not_pd = || PotentialError::NotPositiveDefinite {
            point: x.iter().copied().collect(),
        };
        match self {
            Self::Hirzebruch { c, .. } => Ok(hirzebruch_h_jet(*c, x)),
            Self::Guillemin(p) if p.dim() == 2 => Ok(guillemin_h_jet_2d(p, x)),
            _ => self.hessian_jet(x).expect("jet available").inverse().ok_or_else(not_pd),
        }
    }

    pub fn inverse_hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, PotentialError> {
        match self {
            Self::Hirzebruch { .. } => Ok(self.metric_jet(x)?.m),
            Self::Guillemin(p) if p.dim() == 2 => Ok(self.metric_jet(x)?.m),
            _ => self
                .hessian(x)?
                .cholesky()
                .map(|c| c.inverse())
                .ok_or_else(|| PotentialError::NotPositiveDefinite {
                    point: x.iter().copied().collect(),
                }),
        }
    }

    pub fn sample(&self, x: &DVector<f64>) -> Result<MetricSample, PotentialError> {
        let jet = self.metric_jet(x)?;
        Ok(MetricSample {
            x: x.clone(),
            scalar_curvature: jet.abreu(),
            h: jet.m,
        })
    }
}

fn guillemin_value(p: &LabelledPolytope, x: &DVector<f64>) -> f64 {
    0.5 * p.defining_values(x).iter().map(|&l| l * l.ln()).sum::<f64>()
}

fn guillemin_gradient(p: &LabelledPolytope, x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(p.dim());
    for h in p.halfspaces() {
        g += &h.normal * (0.5 * (h.eval(x).ln() + 1.0));
    }
    g
}

/// `G = ½ Σ ννᵀ/L`, `∂_k G = −½ Σ ννᵀ ν_k/L²`, `∂_k∂_l G = Σ ννᵀ ν_k ν_l/L³`.
fn guillemin_g_jet(p: &LabelledPolytope, x: &DVector<f64>, derivatives: bool) -> MatrixJet {
    let n = p.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut dm = vec![DMatrix::zeros(n, n); if derivatives { n } else { 0 }];
    let mut d2m = vec![vec![DMatrix::zeros(n, n); n]; if derivatives { n } else { 0 }];
    for h in p.halfspaces() {
        let l = h.eval(x);
        let outer = &h.normal * h.normal.transpose();
        m += &outer * (0.5 / l);
        if derivatives {
            for k in 0..n {
                dm[k] += &outer * (-0.5 * h.normal[k] / (l * l));
                for j in 0..n {
                    d2m[k][j] += &outer * (h.normal[k] * h.normal[j] / (l * l * l));
                }
            }
        }
    }
    MatrixJet { m, dm, d2m }
}

/// `H` of the Guillemin potential of a polygon in cancellation-free form.
///
/// With `G = Σ ννᵀ/(2L)`, clearing denominators gives
/// `det G · Π 2L_l = Σ_{j<k} [ν_j, ν_k]² Π_{l≠j,k} 2L_l` and
/// `adj G · Π 2L_l = Σ_k ν_k^⊥ ν_k^⊥ᵀ Π_{l≠k} 2L_l`. Both sides are sums of
/// nonnegative products, so `H` keeps full relative accuracy up to the
/// boundary, where inverting `G` numerically would lose digits like `1/L`.
fn guillemin_h_jet_2d(p: &LabelledPolytope, x: &DVector<f64>) -> MatrixJet {
    let hs = p.halfspaces();
    let twice_l: Vec<Jet2> = hs
        .iter()
        .map(|h| Jet2 {
            v: 2.0 * h.eval(x),
            d: [2.0 * h.normal[0], 2.0 * h.normal[1]],
            dd: [[0.0; 2]; 2],
        })
        .collect();
    let product_except = |skip: &[usize]| {
        (0..hs.len())
            .filter(|l| !skip.contains(l))
            .fold(Jet2::constant(1.0), |acc, l| acc * twice_l[l])
    };
    let mut num = [[Jet2::constant(0.0); 2]; 2];
    let mut den = Jet2::constant(0.0);
    for (k, hk) in hs.iter().enumerate() {
        let perp = [-hk.normal[1], hk.normal[0]];
        let pk = product_except(&[k]);
        for a in 0..2 {
            for b in 0..2 {
                num[a][b] = num[a][b] + pk * (perp[a] * perp[b]);
            }
        }
        for (j, hj) in hs.iter().enumerate().skip(k + 1) {
            let cross = hk.normal[0] * hj.normal[1] - hk.normal[1] * hj.normal[0];
            den = den + product_except(&[j, k]) * (cross * cross);
        }
    }
    let entries: Vec<Vec<Jet2>> = (0..2).map(|a| (0..2).map(|b| num[a][b] / den).collect()).collect();
    MatrixJet::from_entries(&entries)
}

/// The test-only flat potential `½‖x‖²` on `poly`.
pub fn flat(poly: &LabelledPolytope) -> PotentialModel {
    PotentialModel::Flat(poly.clone())
}

/// Guillemin potential of `base` plus `field`.
pub fn perturbed(base: &LabelledPolytope, field: ChebyshevField) -> Result<PotentialModel, PotentialError> {
    if base.dim() != 2 {
        return Err(PotentialError::UnsupportedDimension {
            expected: 2,
            found: base.dim(),
        });
    }
    Ok(PotentialModel::Perturbed {
        base: base.clone(),
        field,
    })
}

/// `S = −Σ ∂_i∂_j H_ij` from the analytic jet of `H`.
pub fn abreu_scalar(model: &PotentialModel, x: &DVector<f64>) -> Result<f64, PotentialError> {
    Ok(model.metric_jet(x)?.abreu())
}

/// Finite-difference Abreu curvature with step `step` and one Richardson level.
///
/// Only used as an independent check of the analytic path.
pub fn abreu_scalar_fd(model: &PotentialModel, x: &DVector<f64>, step: f64) -> Result<f64, PotentialError> {
    let n = model.dim();
    let h_at = |y: DVector<f64>| model.inverse_hessian(&y);
    let second = |h: f64| -> Result<f64, PotentialError> {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = |k: usize| {
                    let mut v = DVector::zeros(n);
                    v[k] = h;
                    v
                };
                let d = if i == j {
                    (h_at(x + e(i))?[(i, i)] - 2.0 * h_at(x.clone())?[(i, i)] + h_at(x - e(i))?[(i, i)]) / (h * h)
                } else {
                    (h_at(x + e(i) + e(j))?[(i, j)] - h_at(x + e(i) - e(j))?[(i, j)] - h_at(x - e(i) + e(j))?[(i, j)]
                        + h_at(x - e(i) - e(j))?[(i, j)])
                        / (4.0 * h * h)
                };
                s += d;
            }
        }
        Ok(-s)
    };
    let coarse = second(step)?;
    let fine = second(0.5 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `h(x) = ⟨x − p, ∇u(x)⟩ − u(x)`.
pub fn legendre_h_at(model: &PotentialModel, x: &DVector<f64>, p: &DVector<f64>) -> Result<f64, PotentialError> {
    Ok((x - p).dot(&model.gradient(x)?) - model.value(x)?)
}

/// `h(x) = ⟨x, ∇u(x)⟩ − u(x)`.
pub fn legendre_h(model: &PotentialModel, x: &DVector<f64>) -> Result<f64, PotentialError> {
    legendre_h_at(model, x, &DVector::zeros(x.len()))
}

/// `½ log det Hess u`.
pub fn ricci_potential(model: &PotentialModel, x: &DVector<f64>) -> Result<f64, PotentialError> {
    let g = model.hessian(x)?;
    let det = g.determinant();
    if !(det > 0.0) {
        return Err(PotentialError::NotPositiveDefinite {
            point: x.iter().copied().collect(),
        });
    }
    Ok(0.5 * det.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinResidual {
    pub points: Vec<DVector<f64>>,
    pub values: Vec<f64>,
    pub mean: f64,
    /// `max |r − mean(r)|`.
    pub deviation: f64,
    pub preferred_point: DVector<f64>,
    pub common_value: f64,
    /// `λ / common value`: the coefficient of `h` once labels are normalized to common value 1.
    pub lambda_effective: f64,
}

/// `r(x) = ½ log det Hess u − λ h(x) − ⟨a, x − p⟩` over `grid`.
///
/// Labels are normalized so that the common value at the preferred point `p`
/// is 1 (which turns `λ` into `λ / c`), and `h` is taken with respect to `p`.
pub fn einstein_residual(
    model: &PotentialModel,
    poly: &LabelledPolytope,
    lambda: f64,
    a: Option<&DVector<f64>>,
    grid: &[DVector<f64>],
) -> Result<EinsteinResidual, PotentialError> {
    let cert = labelling::monotone_point(poly).ok_or(PotentialError::NotMonotone)?;
    let p = cert.preferred_point;
    let lambda_effective = lambda / cert.common_value;
    let zero = DVector::zeros(poly.dim());
    let a = a.unwrap_or(&zero);
    let mut values = Vec::with_capacity(grid.len());
    for x in grid {
        let r = ricci_potential(model, x)? - lambda_effective * legendre_h_at(model, x, &p)? - a.dot(&(x - &p));
        values.push(r);
    }
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let deviation = values.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    Ok(EinsteinResidual {
        points: grid.to_vec(),
        values,
        mean,
        deviation,
        preferred_point: p,
        common_value: cert.common_value,
        lambda_effective,
    })
}

/// Cell-centered `n^dim` grid on the bounding box, restricted to points at
/// distance greater than `inset·diam(P)` from every facet.
pub fn interior_grid(poly: &LabelledPolytope, n: usize, inset: f64) -> Vec<DVector<f64>> {
    let (lo, hi) = poly.bounding_box();
    let dim = poly.dim();
    let margin = inset * poly.diameter();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    let total = n.pow(dim as u32);
    for _ in 0..total {
        let x = DVector::from_fn(dim, |i, _| lo[i] + (hi[i] - lo[i]) * (idx[i] as f64 + 0.5) / n as f64);
        if poly.depth(&x) > margin {
            out.push(x);
        }
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Grid points whose defining functions all exceed `delta`.
pub fn inset_grid(poly: &LabelledPolytope, n: usize, delta: f64) -> Vec<DVector<f64>> {
    interior_grid(poly, n, 0.0)
        .into_iter()
        .filter(|x| poly.defining_values(x).iter().all(|&l| l >= delta))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetBoundaryAudit {
    pub facet: usize,
    pub samples: usize,
    /// `max ‖H ν_k‖ / ‖ν_k‖` over samples.
    pub max_h_nu: f64,
    /// `max ‖dH(ν_k, ν_k) − 2ν_k‖ / ‖ν_k‖` over samples.
    pub max_dh_error: f64,
    /// Smallest eigenvalue of `H` restricted to the facet's tangent space.
    pub min_tangential_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub facets: Vec<FacetBoundaryAudit>,
    pub violations: Vec<String>,
    pub passed: bool,
    pub tolerance: f64,
}

/// Distances of the interior points used to extrapolate `H` to a boundary
/// point, in units of the local length scale: the diameter, or the distance
/// from the boundary point to the other facets if that is smaller.
pub const EXTRAPOLATION_DEPTHS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Neville extrapolation to `t = 0`.
fn extrapolate(ts: &[f64], values: &[f64]) -> f64 {
    let mut p = values.to_vec();
    let n = ts.len();
    for level in 1..n {
        for i in 0..n - level {
            p[i] = (ts[i] * p[i + 1] - ts[i + level] * p[i]) / (ts[i] - ts[i + level]);
        }
    }
    p[0]
}

fn facet_samples(poly: &LabelledPolytope, k: usize, count: usize) -> Vec<DVector<f64>> {
    let pieces = poly.facet_decomposition(k).expect("facet index in range");
    if poly.dim() == 2 {
        let s = &pieces[0];
        return (0..count)
            .map(|j| {
                let t = (j as f64 + 0.5) / count as f64;
                &s.vertices[0] * (1.0 - t) + &s.vertices[1] * t
            })
            .collect();
    }
    let blends = [0.0, 0.5, 0.75];
    let mut out = Vec::new();
    'outer: for &theta in &blends {
        for s in &pieces {
            let c = s.centroid();
            let corners: Vec<_> = if theta == 0.0 { vec![&c] } else { s.vertices.iter().collect() };
            for v in corners {
                out.push(&c * (1.0 - theta) + v * theta);
                if out.len() == count {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// Audits `H` along every facet of `poly`: `H ν_k = 0`, `dH(ν_k, ν_k) = 2ν_k`
/// and positivity on the facet's tangent space.
///
/// Boundary values of `H` are extrapolated from interior points along the
/// inward normal at the depths in [`EXTRAPOLATION_DEPTHS`].
pub fn boundary_check(model: &PotentialModel, poly: &LabelledPolytope, samples: usize, tol: f64) -> BoundaryReport {
    let n = poly.dim();
    let diam = poly.diameter();
    let mut facets = Vec::new();
    let mut violations = Vec::new();
    for (k, hs) in poly.halfspaces().iter().enumerate() {
        let nu = &hs.normal;
        let norm = nu.norm();
        let inward = nu / norm;
        let tangent = {
            let svd = (nu * nu.transpose()).symmetric_eigen();
            let mut cols = Vec::new();
            for (i, ev) in svd.eigenvalues.iter().enumerate() {
                if ev.abs() < 0.5 * norm * norm {
                    cols.push(svd.eigenvectors.column(i).into_owned());
                }
            }
            DMatrix::from_columns(&cols)
        };
        let mut audit = FacetBoundaryAudit {
            facet: k,
            samples: 0,
            max_h_nu: 0.0,
            max_dh_error: 0.0,
            min_tangential_eigenvalue: f64::INFINITY,
        };
        for y in facet_samples(poly, k, samples) {
            // Near a corner H changes on the scale of the distance to the
            // neighbouring facets, which must dominate the depths used.
            let clearance = poly
                .halfspaces()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, h)| h.eval(&y) / h.normal.norm())
                .fold(diam, f64::min);
            let ts: Vec<f64> = EXTRAPOLATION_DEPTHS.iter().map(|d| d * clearance).collect();
            let jets: Result<Vec<MatrixJet>, _> = ts.iter().map(|t| model.metric_jet(&(&y + &inward * *t))).collect();
            let jets = match jets {
                Ok(j) => j,
                Err(e) => {
                    violations.push(format!("facet {}: cannot evaluate near {:?}: {e}", k + 1, y.as_slice()));
                    continue;
                }
            };
            let h = DMatrix::from_fn(n, n, |i, j| {
                extrapolate(&ts, &jets.iter().map(|jt| jt.m[(i, j)]).collect::<Vec<_>>())
            });
            let dh = DVector::from_fn(n, |l, _| {
                let vals: Vec<f64> = jets.iter().map(|jt| nu.dot(&(&jt.dm[l] * nu))).collect();
                extrapolate(&ts, &vals)
            });
            let h_nu = (&h * nu).norm() / norm;
            let dh_err = (&dh - nu * 2.0).norm() / norm;
            let tangential = tangent.transpose() * &h * &tangent;
            let min_eig = if tangential.nrows() == 0 {
                f64::INFINITY
            } else {
                tangential.symmetric_eigen().eigenvalues.min()
            };
            audit.samples += 1;
            audit.max_h_nu = audit.max_h_nu.max(h_nu);
            audit.max_dh_error = audit.max_dh_error.max(dh_err);
            audit.min_tangential_eigenvalue = audit.min_tangential_eigenvalue.min(min_eig);
        }
        if audit.max_h_nu > tol {
            violations.push(format!("facet {}: |H nu| = {:.3e} exceeds {tol:e}", k + 1, audit.max_h_nu));
        }
        if audit.max_dh_error > tol {
            violations.push(format!(
                "facet {}: |dH(nu,nu) - 2 nu| = {:.3e} exceeds {tol:e}",
                k + 1,
                audit.max_dh_error
            ));
        }
        if !(audit.min_tangential_eigenvalue > 0.0) {
            violations.push(format!(
                "facet {}: H is not positive on the facet tangent space (min eigenvalue {:.3e})",
                k + 1,
                audit.min_tangential_eigenvalue
            ));
        }
        facets.push(audit);
    }
    BoundaryReport {
        passed: violations.is_empty(),
        facets,
        violations,
        tolerance: tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::extremal_affine;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn guillemin_square() {
        let m = guillemin(&fixtures::square());
        let origin = v(&[0.0, 0.0]);
        assert!((m.hessian(&origin).unwrap() - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert_eq!(m.value(&origin).unwrap(), 0.0);
        let x = v(&[0.3, -0.7]);
        let h = m.inverse_hessian(&x).unwrap();
        assert!((h - DMatrix::from_row_slice(2, 2, &[0.91, 0.0, 0.0, 0.51])).amax() < 1e-14);
        assert!((abreu_scalar(&m, &x).unwrap() - 4.0).abs() < 1e-12);
        let want_h = -0.5 * ((1.0 - 0.09f64).ln() + (1.0 - 0.49f64).ln());
        assert!((legendre_h(&m, &x).unwrap() - want_h).abs() < 1e-14);
        assert_eq!(legendre_h(&m, &origin).unwrap(), 0.0);
        assert!(matches!(m.value(&v(&[1.0, 0.0])), Err(PotentialError::PointOnBoundary { .. })));
        assert!(matches!(m.value(&v(&[1.5, 0.0])), Err(PotentialError::OutsideDomain { .. })));
    }

    #[test]
    fn guillemin_simplex_hessian() {
        let m = guillemin(&fixtures::simplex(2));
        let g = m.hessian(&v(&[1.0 / 3.0, 1.0 / 3.0])).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) * 1.5;
        assert!((g - want).amax() < 1e-13);
    }

    #[test]
    fn analytic_abreu_matches_finite_differences() {
        let poly = fixtures::hirzebruch_unit();
        let x = v(&[1.4, 0.6]);
        for m in [guillemin(&poly), hirzebruch_closed_form(1.0).unwrap()] {
            let s = abreu_scalar(&m, &x).unwrap();
            let fd = abreu_scalar_fd(&m, &x, 1e-3 * poly.diameter()).unwrap();
            assert!((s - fd).abs() < 1e-6, "{} {s} {fd}", m.name());
        }
    }

    #[test]
    fn hirzebruch_closed_form_properties() {
        let m = hirzebruch_closed_form(1.0).unwrap();
        let x = v(&[1.5, 0.75]);
        let h = m.inverse_hessian(&x).unwrap();
        assert!((&h - h.transpose()).amax() < 1e-15);
        assert!(h.clone().cholesky().is_some());
        assert!((&h * m.hessian(&x).unwrap() - DMatrix::identity(2, 2)).amax() < 1e-12);
        // The polynomial factors vanish on the facets.
        let a = |x: f64| -2.0 / 7.0 * (x - 1.0) * (x - 2.0) * (2.0 + 3.0 * x);
        let b = |y: f64| -2.0 * y * (y - 1.0);
        assert_eq!((a(1.0), a(2.0), b(0.0), b(1.0)), (0.0, 0.0, 0.0, 0.0));
        // Curvature equals the extremal constant 36/7.
        let want = extremal_affine(&fixtures::hirzebruch_unit()).a.constant;
        for p in interior_grid(&fixtures::hirzebruch_unit(), 7, 1e-3) {
            assert!((abreu_scalar(&m, &p).unwrap() - want).abs() < 1e-9);
        }
        // H(c) = H(1)/c, the metric of the labels c·ν(1).
        let m2 = hirzebruch_closed_form(9.0 / 7.0).unwrap();
        assert!((m2.inverse_hessian(&x).unwrap() * (9.0 / 7.0) - &h).amax() < 1e-14);
        // The gradient and value are consistent with the Hessian.
        let e = 1e-6;
        for i in 0..2 {
            let mut d = DVector::zeros(2);
            d[i] = e;
            let fd_g = (m.gradient(&(&x + &d)).unwrap() - m.gradient(&(&x - &d)).unwrap()) / (2.0 * e);
            assert!((fd_g - m.hessian(&x).unwrap().column(i)).amax() < 1e-7);
            let fd_u = (m.value(&(&x + &d)).unwrap() - m.value(&(&x - &d)).unwrap()) / (2.0 * e);
            assert!((fd_u - m.gradient(&x).unwrap()[i]).abs() < 1e-8);
        }
        assert!(hirzebruch_closed_form(-1.0).is_err());
        let scaled = fixtures::hirzebruch(&crate::exact::parse_rational("9/7").unwrap());
        assert!((hirzebruch_scale(&scaled).unwrap() - 9.0 / 7.0).abs() < 1e-15);
        assert_eq!(hirzebruch_scale(&fixtures::square()), None);
        assert!(matches!(m.value(&v(&[1.5, 1.7])), Err(PotentialError::OutsideDomain { .. })));
    }

    #[test]
    fn flat_model_has_zero_curvature() {
        let m = flat(&fixtures::square());
        assert_eq!(abreu_scalar(&m, &v(&[0.2, 0.1])).unwrap(), 0.0);
    }

    #[test]
    fn boundary_audits() {
        let sq = fixtures::square();
        let r = boundary_check(&guillemin(&sq), &sq, 5, 1e-6);
        assert!(r.passed, "{:?}", r.violations);
        let doubled = sq.rescaled(&[2.0; 4]);
        let r = boundary_check(&guillemin(&sq), &doubled, 5, 1e-6);
        assert!(!r.passed);
        assert!(r.facets.iter().all(|f| f.max_h_nu < 1e-6));
        // dH(2ν, 2ν) = 8ν against 2·(2ν) = 4ν: off by 2‖ν‖ relative to ‖2ν‖.
        assert!(r.facets.iter().all(|f| (f.max_dh_error - 2.0).abs() < 1e-6));

        let q = fixtures::hirzebruch_unit();
        let r = boundary_check(&hirzebruch_closed_form(1.0).unwrap(), &q, 8, 1e-8);
        assert!(r.passed, "{:?}", r.violations);
    }

    #[test]
    fn einstein_residuals() {
        let sq = fixtures::square();
        let grid = interior_grid(&sq, 20, 1e-3);
        let r = einstein_residual(&guillemin(&sq), &sq, 1.0, None, &grid).unwrap();
        assert!(r.deviation < 1e-12);
        let r = einstein_residual(&guillemin(&sq), &sq, 2.0, None, &grid).unwrap();
        assert!(r.deviation > 0.1);

        let c = 9.0 / 7.0;
        let q = fixtures::hirzebruch(&crate::exact::parse_rational("9/7").unwrap());
        let model = hirzebruch_closed_form(c).unwrap();
        let grid = interior_grid(&q, 30, 1e-3);
        let r = einstein_residual(&model, &q, 1.0, None, &grid).unwrap();
        assert!(r.deviation < 1e-9, "{}", r.deviation);
        assert!((r.lambda_effective - 1.0).abs() < 1e-15);

        let skew = sq.rescaled(&[2.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            einstein_residual(&guillemin(&skew), &skew, 1.0, None, &grid).unwrap_err(),
            PotentialError::NotMonotone
        );
    }

    #[test]
    fn ricci_potential_through_eigenvalues() {
        let m = hirzebruch_closed_form(1.0).unwrap();
        let x = v(&[1.3, 0.4]);
        let eig = m.hessian(&x).unwrap().symmetric_eigen().eigenvalues;
        let via_eig = 0.5 * eig.iter().map(|e| e.ln()).sum::<f64>();
        assert!((ricci_potential(&m, &x).unwrap() - via_eig).abs() < 1e-10);
    }

    #[test]
    fn perturbed_model_matches_finite_differences() {
        let base = fixtures::square();
        let mut field = ChebyshevField::zero([-1.0, -1.0], [1.0, 1.0], 4, 2);
        field.coeffs[0] = 0.05;
        field.coeffs[4] = -0.03;
        let m = perturbed(&base, field).unwrap();
        let x = v(&[0.2, -0.3]);
        let s = abreu_scalar(&m, &x).unwrap();
        let fd = abreu_scalar_fd(&m, &x, 1e-3).unwrap();
        assert!((s - fd).abs() < 1e-6);
        let h = m.inverse_hessian(&x).unwrap();
        assert!((h * m.hessian(&x).unwrap() - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
