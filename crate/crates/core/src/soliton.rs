//! The Kähler–Ricci soliton vector of a monotone labelled polytope.
//!
//! With `p` the preferred point, the soliton vector is the unique `a` such
//! that the weighted barycenter of `e^{2⟨a, x−p⟩} dϖ` is `p`. It is the
//! minimizer of the strictly convex function `V(a) = ∫_P e^{2⟨a, x−p⟩} dϖ`,
//! found here by damped Newton iteration. `a = 0` exactly when `p` is the
//! barycenter of `P`.

use nalgebra::DVector;

use crate::labelling::{self, MonotoneCertificate};
use crate::measure::{self, MeasureError};
use crate::polytope::LabelledPolytope;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolitonError {
    #[error("polytope labelling is not monotone")]
    NotMonotone,
    #[error("Newton iteration stopped after {iterations} steps with residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("Hessian of the weighted volume lost positive definiteness at iteration {iteration}")]
    HessianNotPD { iteration: usize },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonVector {
    pub a: DVector<f64>,
    pub preferred_point: DVector<f64>,
    /// `max_i |∫ e^{2⟨a, x−p⟩}(x_i − p_i) dϖ| / vol(P)`.
    pub residual: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

/// Soliton vector of a monotone polytope.
pub fn soliton_vector(poly: &LabelledPolytope, tol: f64) -> Result<SolitonVector, SolitonError> {
    let cert = labelling::monotone_point(poly).ok_or(SolitonError::NotMonotone)?;
    soliton_vector_at(poly, &cert, tol)
}

/// Soliton vector for a given monotone certificate (skips re-detection).
pub fn soliton_vector_at(
    poly: &LabelledPolytope,
    cert: &MonotoneCertificate,
    tol: f64,
) -> Result<SolitonVector, SolitonError> {
    let p = &cert.preferred_point;
    let n = poly.dim();
    let vol = measure::moments(poly).volume();
    let mut a = DVector::zeros(n);
    let mut m = measure::exp_moments(poly, &a, p)?;
    for iteration in 0..MAX_ITERATIONS {
        let residual = m.first.amax() / vol;
        if residual <= tol {
            return Ok(SolitonVector {
                a,
                preferred_point: p.clone(),
                residual,
                iterations: iteration,
                tolerance: tol,
            });
        }
        let grad = &m.first * 2.0;
        let hess = &m.second * 4.0;
        let chol = hess.cholesky().ok_or(SolitonError::HessianNotPD { iteration })?;
        let step = -chol.solve(&grad);
        let slope = grad.dot(&step);
        let mut t = 1.0;
        loop {
            let trial = &a + &step * t;
            let mt = measure::exp_moments(poly, &trial, p)?;
            // Near the minimum the mass decrease drops below rounding, so a
            // smaller moment residual is accepted as progress too.
            let sufficient = mt.mass <= m.mass + ARMIJO * t * slope;
            if sufficient || mt.first.amax() < m.first.amax() || t < 1e-12 {
                a = trial;
                m = mt;
                break;
            }
            t *= 0.5;
        }
    }
    Err(SolitonError::MaxIterations {
        iterations: MAX_ITERATIONS,
        residual: m.first.amax() / vol,
    })
}

/// `max_i |∫_P e^{2⟨a, x−p⟩}(x_i − p_i) dϖ| / vol(P)`.
///
/// The weight is centered at `p`, which only rescales the integrals by
/// `e^{−2⟨a,p⟩}` compared with `e^{2⟨a,x⟩}`; for the constant test function
/// the moment condition is `∫(1 − 1) = 0` and carries no information.
pub fn soliton_residual(poly: &LabelledPolytope, p: &DVector<f64>, a: &DVector<f64>) -> Result<f64, MeasureError> {
    let vol = measure::moments(poly).volume();
    let m = measure::exp_moments(poly, a, p)?;
    Ok(m.first.amax() / vol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::labelling::{cone_labels, einstein_normalize};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn barycentric_preferred_point_gives_zero() {
        let s = soliton_vector(&fixtures::square(), DEFAULT_TOL).unwrap();
        assert_eq!(s.a, v(&[0.0, 0.0]));
        let (t, _) = einstein_normalize(&fixtures::simplex(2));
        let s = soliton_vector(&t, DEFAULT_TOL).unwrap();
        assert!(s.a.amax() <= 1e-12);
    }

    #[test]
    fn shifted_simplex_matches_oracle() {
        // Reference values from an independent 30-digit nested quadrature and root solve.
        let cases = [
            ([0.4, 0.3], [0.562778715960626022837530460964, 0.0]),
            ([0.2, 0.5], [-0.986558460850718647, 0.932582656857707889]),
            ([0.25, 0.25], [-1.34399967274974567, -1.34399967274974567]),
        ];
        for (p, want) in cases {
            let poly = cone_labels(&fixtures::simplex(2), 1.0, &v(&p)).unwrap();
            let s = soliton_vector(&poly, DEFAULT_TOL).unwrap();
            assert!(s.residual <= 1e-10);
            assert!((&s.a - v(&want)).amax() < 1e-9, "p = {p:?}: {} vs {want:?}", s.a);
            let r = soliton_residual(&poly, &v(&p), &s.a).unwrap();
            assert!(r <= 1e-10);
        }
    }

    #[test]
    fn residual_with_zero_vector_measures_barycenter_offset() {
        let t = fixtures::simplex(2);
        let bary = v(&[1.0 / 3.0, 1.0 / 3.0]);
        assert!(soliton_residual(&t, &bary, &v(&[0.0, 0.0])).unwrap() < 1e-15);
        let p = v(&[0.4, 0.3]);
        let r = soliton_residual(&t, &p, &v(&[0.0, 0.0])).unwrap();
        assert!((r - (&bary - &p).amax()).abs() < 1e-14);
    }

    #[test]
    fn requires_monotone_labels() {
        let poly = fixtures::square().rescaled(&[2.0, 1.0, 1.0, 1.0]);
        assert_eq!(soliton_vector(&poly, DEFAULT_TOL), Err(SolitonError::NotMonotone));
    }

    #[test]
    fn translation_equivariance() {
        let p = v(&[0.2, 0.5]);
        let poly = cone_labels(&fixtures::simplex(2), 1.0, &p).unwrap();
        let shift = v(&[3.0, -1.5]);
        let moved = poly.translated(&shift);
        let a = soliton_vector(&poly, DEFAULT_TOL).unwrap().a;
        let b = soliton_vector(&moved, DEFAULT_TOL).unwrap().a;
        assert!((a - b).amax() < 1e-10);
    }
}
