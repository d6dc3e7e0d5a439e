//! The extremal affine function of a labelled polytope.
//!
//! `A = A₀ + Σ A_i x_i` is the unique affine function with
//! `∫_P A f dϖ = 2∫_∂P f dσ_ν` for every affine `f`, i.e. `W·A = 2Z`. It is the
//! projection of the scalar curvature of any compatible metric onto affine
//! functions, and it is constant exactly when the barycenters of `(P, dϖ)`
//! and `(∂P, dσ_ν)` coincide.

use nalgebra::{DMatrix, DVector};

use crate::exact::{self, Rational};
use crate::measure::{self, AffineFunction, MomentData};
use crate::polytope::LabelledPolytope;

/// Relative tolerance of the constancy and barycenter tests.
pub const CONSTANCY_TOL: f64 = 1e-8;
/// Condition number of `W` above which results are flagged.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalResult {
    pub a: AffineFunction,
    /// Exact coefficients `(A₀, …, A_n)` when the labels are rational.
    pub exact: Option<Vec<Rational>>,
    pub condition_number: f64,
    /// Set when the condition number exceeds [`CONDITION_LIMIT`]; the value is still returned.
    pub ill_conditioned: bool,
    pub is_constant: bool,
    pub tolerance: f64,
    pub moments: MomentData,
}

/// Solves `W·A = 2Z`.
pub fn extremal_affine(poly: &LabelledPolytope) -> ExtremalResult {
    let exact_moments = measure::exact_moments(poly);
    let moments = match &exact_moments {
        Some(m) => m.to_float(),
        None => measure::moments(poly),
    };
    let rhs = &moments.z * 2.0;
    let coeffs = solve_spd(&moments.w, &rhs);
    let exact = exact_moments.and_then(|m| {
        let rhs: Vec<Rational> = m.z.iter().map(|z| z * exact::from_i64(2)).collect();
        exact::solve(&m.w, &rhs)
    });
    let coeffs = match &exact {
        Some(c) => DVector::from_iterator(c.len(), c.iter().map(exact::to_f64)),
        None => coeffs,
    };
    let eig = moments.w.clone().symmetric_eigen().eigenvalues;
    let condition_number = eig.max() / eig.min();
    let a = AffineFunction::from_coefficients(&coeffs);
    let is_constant = a.linear.norm() * poly.diameter() <= CONSTANCY_TOL * a.constant.abs();
    ExtremalResult {
        a,
        exact,
        condition_number,
        ill_conditioned: !(condition_number <= CONDITION_LIMIT),
        is_constant,
        tolerance: CONSTANCY_TOL,
        moments,
    }
}

fn solve_spd(w: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    match w.clone().cholesky() {
        Some(ch) => ch.solve(rhs),
        None => w.clone().lu().solve(rhs).unwrap_or_else(|| DVector::from_element(rhs.len(), f64::NAN)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterReport {
    pub bary_interior: DVector<f64>,
    pub bary_boundary: DVector<f64>,
    pub coincide: bool,
    pub tolerance: f64,
}

/// Compares the centers of mass of `(P, dϖ)` and `(∂P, dσ_ν)`.
pub fn barycenter_criterion(poly: &LabelledPolytope) -> BarycenterReport {
    let m = measure::moments(poly);
    let bary_interior = m.barycenter();
    let bary_boundary = m.boundary_barycenter();
    let coincide = (&bary_interior - &bary_boundary).norm() <= CONSTANCY_TOL * poly.diameter();
    BarycenterReport {
        bary_interior,
        bary_boundary,
        coincide,
        tolerance: CONSTANCY_TOL,
    }
}
