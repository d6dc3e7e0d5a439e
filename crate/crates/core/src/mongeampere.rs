//! Collocation solver for the toric Kähler–Einstein / Kähler–Ricci soliton
//! equation on a monotone labelled polygon.
//!
//! The unknown potential is `u = u_o + f` with `u_o` the Guillemin potential
//! and `f` a total-degree Chebyshev expansion on the bounding box, smooth up
//! to the boundary. At collocation points the residual
//! `r = ½ log det Hess u − λ h_u − ⟨a, x − p⟩ − κ` is driven to zero in the
//! least-squares sense by damped Gauss–Newton steps, with the constant `κ` as
//! an extra unknown. Affine terms of `f` are gauge directions (they shift `r`
//! by a constant) and are excluded from the unknowns; after convergence the
//! gauge is fixed by `f(p) = 0`, `∇f(p) = 0`.
//!
//! If the direct iteration cannot make progress, the solver falls back to a
//! homotopy in `s ∈ [0, 1]` that subtracts `(1 − s)` times the residual of
//! `u_o` from the target; `s = 0` is solved by `f = 0`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::chebyshev::{ChebyshevField, MAX_ORDER};
use crate::labelling;
use crate::polytope::LabelledPolytope;
use crate::potential::{self, PotentialError, PotentialModel};
use crate::soliton::{self, SolitonError};

#[derive(Debug, Clone, PartialEq)]
pub enum Continuation {
    /// Direct Gauss–Newton first, homotopy only if that fails.
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Collocation points per direction in each fan triangle.
    pub resolution: usize,
    /// Total degree of the correction; defaults to `2·resolution/3`.
    pub degree: Option<usize>,
    /// Target for the residual deviation `max |r − mean r|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest step fraction tried by the line search.
    pub min_step: f64,
    pub continuation: Continuation,
    pub continuation_steps: usize,
    /// Width of the excluded boundary layer, relative to the diameter.
    pub boundary_margin: f64,
    /// Relative singular-value cutoff of the least-squares solve.
    pub rcond: f64,
    /// Starting correction; must use the solver's box and term set.
    pub initial: Option<ChebyshevField>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            resolution: 24,
            degree: None,
            tolerance: 1e-8,
            max_iterations: 40,
            min_step: 1.0 / 1024.0,
            continuation: Continuation::Auto,
            continuation_steps: 4,
            boundary_margin: 1e-3,
            rcond: 1e-13,
            initial: None,
        }
    }
}

impl SolverConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(2 * self.resolution / 3)
    }

    fn validate(&self) -> Result<(), SolverError> {
        let bad = |why: &str| Err(SolverError::InvalidConfig(why.to_string()));
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.resolution < 8 {
            return bad("resolution must be at least 8");
        }
        if self.degree() < 2 {
            return bad("degree must be at least 2");
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return bad("min_step must lie in (0, 1]");
        }
        if self.continuation_steps == 0 {
            return bad("continuation needs at least one step");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Homotopy parameter of the stage (1 for the direct solve).
    pub s: f64,
    pub iteration: usize,
    pub deviation: f64,
    pub residual_rms: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub model: PotentialModel,
    pub field: ChebyshevField,
    pub deviation: f64,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub used_continuation: bool,
    pub soliton: DVector<f64>,
    pub preferred_point: DVector<f64>,
    pub lambda_effective: f64,
    pub collocation_points: usize,
    pub unknowns: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolverError {
    #[error("polytope labelling is not monotone")]
    NotMonotone,
    #[error("the solver works in dimension 2, got {found}")]
    UnsupportedDimension { found: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("Hessian of the potential left the positive cone at iteration {iteration}")]
    HessianNotPD { iteration: usize },
    #[error("no convergence: deviation {:e} after {} iterations", .best.deviation, .best.iterations)]
    NoConvergence { best: Box<SolverResult> },
    #[error(transparent)]
    Soliton(#[from] SolitonError),
}

/// Chebyshev-graded collocation points: each fan triangle `(p, a, b)` over a
/// boundary edge is sampled on a collapsed grid clustered toward the edge and
/// its endpoints; points closer than `margin` to `∂P` are dropped.
pub fn collocation_points(poly: &LabelledPolytope, center: &DVector<f64>, m: usize, margin: f64) -> Vec<[f64; 2]> {
    let graded_out: Vec<f64> = (0..m)
        .map(|i| (std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / m as f64).sin())
        .collect();
    let graded_both: Vec<f64> = (0..m)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos()))
        .collect();
    let mut out = Vec::new();
    for k in 0..poly.num_facets() {
        for edge in poly.facet_decomposition(k).expect("facet index in range") {
            let a = &edge.vertices[0] - center;
            let b = &edge.vertices[1] - center;
            for &s in &graded_out {
                for &t in &graded_both {
                    let x = center + (&a * (1.0 - t) + &b * t) * s;
                    if poly.depth(&x) > margin {
                        out.push([x[0], x[1]]);
                    }
                }
            }
        }
    }
    out
}

/// Everything about the collocation problem that does not depend on `f`.
struct Problem {
    points: Vec<[f64; 2]>,
    /// `Hess u_o` as `(xx, xy, yy)`.
    g0: Vec<[f64; 3]>,
    u0: Vec<f64>,
    du0: Vec<[f64; 2]>,
    /// Basis values and derivatives: `b, b_x, b_y, b_xx, b_xy, b_yy`, points × terms.
    basis: [DMatrix<f64>; 6],
    p: [f64; 2],
    a: [f64; 2],
    lambda: f64,
}

struct Evaluation {
    /// Raw residual `½ log det G − λh − ⟨a, x − p⟩`.
    r: Vec<f64>,
    /// `G⁻¹` as `(xx, xy, yy)`.
    h: Vec<[f64; 3]>,
}

impl Problem {
    fn new(poly: &LabelledPolytope, template: &ChebyshevField, points: Vec<[f64; 2]>, p: [f64; 2], a: [f64; 2], lambda: f64) -> Self {
        let n = points.len();
        let m = template.terms.len();
        let rows: Vec<([f64; 3], f64, [f64; 2], Vec<[f64; 6]>)> = points
            .par_iter()
            .map(|x| {
                let mut g = [0.0; 3];
                let mut u = 0.0;
                let mut du = [0.0; 2];
                for hs in poly.halfspaces() {
                    let (n0, n1) = (hs.normal[0], hs.normal[1]);
                    let l = n0 * x[0] + n1 * x[1] + hs.offset;
                    u += 0.5 * l * l.ln();
                    let w = 0.5 * (l.ln() + 1.0);
                    du[0] += w * n0;
                    du[1] += w * n1;
                    g[0] += 0.5 * n0 * n0 / l;
                    g[1] += 0.5 * n0 * n1 / l;
                    g[2] += 0.5 * n1 * n1 / l;
                }
                let tab = template.tables(x);
                let b = template
                    .terms
                    .iter()
                    .map(|&t| {
                        let d = |i, j| ChebyshevField::basis_derivative(&tab, t, i, j);
                        [d(0, 0), d(1, 0), d(0, 1), d(2, 0), d(1, 1), d(0, 2)]
                    })
                    .collect();
                (g, u, du, b)
            })
            .collect();
        let basis = std::array::from_fn(|k| DMatrix::from_fn(n, m, |i, j| rows[i].3[j][k]));
        Self {
            g0: rows.iter().map(|r| r.0).collect(),
            u0: rows.iter().map(|r| r.1).collect(),
            du0: rows.iter().map(|r| r.2).collect(),
            points,
            basis,
            p,
            a,
            lambda,
        }
    }

    fn evaluate(&self, c: &DVector<f64>) -> Option<Evaluation> {
        let d: Vec<DVector<f64>> = self.basis.iter().map(|b| b * c).collect();
        let mut r = Vec::with_capacity(self.points.len());
        let mut h = Vec::with_capacity(self.points.len());
        for (i, x) in self.points.iter().enumerate() {
            let g = [self.g0[i][0] + d[3][i], self.g0[i][1] + d[4][i], self.g0[i][2] + d[5][i]];
            let det = g[0] * g[2] - g[1] * g[1];
            if !(det > 0.0 && g[0] > 0.0) {
                return None;
            }
            let (dx, dy) = (x[0] - self.p[0], x[1] - self.p[1]);
            let u = self.u0[i] + d[0][i];
            let legendre = dx * (self.du0[i][0] + d[1][i]) + dy * (self.du0[i][1] + d[2][i]) - u;
            r.push(0.5 * det.ln() - self.lambda * legendre - self.a[0] * dx - self.a[1] * dy);
            h.push([g[2] / det, -g[1] / det, g[0] / det]);
        }
        Some(Evaluation { r, h })
    }

    /// `∂r/∂c_j = ½ tr(H Hess b_j) − λ(⟨x − p, ∇b_j⟩ − b_j)`, with a trailing `−1` column for `κ`.
    fn jacobian(&self, ev: &Evaluation) -> DMatrix<f64> {
        let (n, m) = self.basis[0].shape();
        let [b, bx, by, bxx, bxy, byy] = &self.basis;
        let mut j = DMatrix::zeros(n, m + 1);
        for col in 0..m {
            for i in 0..n {
                let h = ev.h[i];
                let (dx, dy) = (self.points[i][0] - self.p[0], self.points[i][1] - self.p[1]);
                j[(i, col)] = 0.5 * (h[0] * bxx[(i, col)] + 2.0 * h[1] * bxy[(i, col)] + h[2] * byy[(i, col)])
                    - self.lambda * (dx * bx[(i, col)] + dy * by[(i, col)] - b[(i, col)]);
            }
        }
        j.column_mut(m).fill(-1.0);
        j
    }
}

fn deviation(r: &[f64]) -> f64 {
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    r.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

/// Minimum-norm least-squares solution of `J δ = rhs` with column scaling,
/// Householder QR and an SVD of the triangular factor.
fn least_squares(j: DMatrix<f64>, rhs: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let m = j.ncols();
    let scale: Vec<f64> = (0..m)
        .map(|c| {
            let nrm = j.column(c).norm();
            if nrm > 0.0 {
                1.0 / nrm
            } else {
                1.0
            }
        })
        .collect();
    let mut js = j;
    for (c, s) in scale.iter().enumerate() {
        js.column_mut(c).scale_mut(*s);
    }
    let qr = js.qr();
    let mut qtb = rhs.clone();
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let top = qtb.rows(0, m).into_owned();
    let svd = r.svd(true, true);
    let smax = svd.singular_values.max();
    let y = svd.solve(&top, rcond * smax).expect("both factors computed");
    DVector::from_fn(m, |c, _| y[c] * scale[c])
}

struct Stage<'a> {
    problem: &'a Problem,
    /// Subtracted from the raw residual (nonzero only during continuation).
    target: Option<Vec<f64>>,
    s: f64,
}

enum StageOutcome {
    Converged,
    Stalled,
    NotPd,
}

impl Stage<'_> {
    fn residual(&self, ev: &Evaluation, kappa: f64) -> DVector<f64> {
        DVector::from_fn(ev.r.len(), |i, _| {
            ev.r[i] - kappa - self.target.as_ref().map_or(0.0, |t| t[i])
        })
    }

    fn shifted(&self, ev: &Evaluation) -> Vec<f64> {
        match &self.target {
            None => ev.r.clone(),
            Some(t) => ev.r.iter().zip(t).map(|(r, t)| r - t).collect(),
        }
    }

    /// Runs Gauss–Newton from `c`, updating it in place.
    fn run(
        &self,
        c: &mut DVector<f64>,
        config: &SolverConfig,
        history: &mut Vec<IterationRecord>,
        tol: f64,
    ) -> StageOutcome {
        let m = c.len();
        let Some(mut ev) = self.problem.evaluate(c) else {
            return StageOutcome::NotPd;
        };
        let shifted = self.shifted(&ev);
        let mut kappa = shifted.iter().sum::<f64>() / shifted.len() as f64;
        let mut res = self.residual(&ev, kappa);
        let mut slow = 0;
        for iteration in 0..config.max_iterations {
            let dev = deviation(&self.shifted(&ev));
            let rms = res.norm() / (res.len() as f64).sqrt();
            history.push(IterationRecord {
                s: self.s,
                iteration,
                deviation: dev,
                residual_rms: rms,
                step: 0.0,
            });
            if dev <= tol {
                return StageOutcome::Converged;
            }
            let jac = self.problem.jacobian(&ev);
            let delta = least_squares(jac, &(-&res), config.rcond);
            let mut t = 1.0;
            let accepted = loop {
                let trial = &*c + delta.rows(0, m) * t;
                if let Some(ev_t) = self.problem.evaluate(&trial) {
                    let kappa_t = kappa + t * delta[m];
                    let res_t = self.residual(&ev_t, kappa_t);
                    if res_t.norm() < res.norm() {
                        break Some((trial, ev_t, kappa_t, res_t));
                    }
                }
                t *= 0.5;
                if t < config.min_step {
                    break None;
                }
            };
            let Some((trial, ev_t, kappa_t, res_t)) = accepted else {
                return if history.last().map_or(true, |h| h.deviation.is_finite()) && iteration > 0 {
                    StageOutcome::Stalled
                } else {
                    StageOutcome::NotPd
                };
            };
            let gain = 1.0 - res_t.norm() / res.norm();
            if let Some(last) = history.last_mut() {
                last.step = t;
            }
            *c = trial;
            ev = ev_t;
            kappa = kappa_t;
            res = res_t;
            slow = if gain < 1e-3 { slow + 1 } else { 0 };
            if slow >= 2 {
                let dev = deviation(&self.shifted(&ev));
                history.push(IterationRecord {
                    s: self.s,
                    iteration: iteration + 1,
                    deviation: dev,
                    residual_rms: res.norm() / (res.len() as f64).sqrt(),
                    step: 0.0,
                });
                return if dev <= tol { StageOutcome::Converged } else { StageOutcome::Stalled };
            }
        }
        let dev = deviation(&self.shifted(&ev));
        if dev <= tol {
            StageOutcome::Converged
        } else {
            StageOutcome::Stalled
        }
    }
}

/// Solves for a Kähler–Ricci soliton (Kähler–Einstein when `a = 0`) potential.
///
/// `a` defaults to the soliton vector of `poly`. Labels are used as given;
/// `λ` is divided by the common value of the defining functions at the
/// preferred point, matching [`potential::einstein_residual`].
pub fn solve(
    poly: &LabelledPolytope,
    lambda: f64,
    a: Option<&DVector<f64>>,
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    if poly.dim() != 2 {
        return Err(SolverError::UnsupportedDimension { found: poly.dim() });
    }
    config.validate()?;
    let cert = labelling::monotone_point(poly).ok_or(SolverError::NotMonotone)?;
    let a = match a {
        Some(a) => a.clone(),
        None => soliton::soliton_vector_at(poly, &cert, soliton::DEFAULT_TOL)?.a,
    };
    let p = cert.preferred_point.clone();
    let lambda_effective = lambda / cert.common_value;
    let (lo, hi) = poly.bounding_box();
    let mut field = ChebyshevField::zero([lo[0], lo[1]], [hi[0], hi[1]], config.degree(), 2);
    debug_assert!(MAX_ORDER >= 2);
    let mut c = DVector::zeros(field.terms.len());
    if let Some(init) = &config.initial {
        if init.terms != field.terms || init.lo != field.lo || init.hi != field.hi {
            return Err(SolverError::InvalidConfig(
                "initial field must use the solver's box, degree and terms".into(),
            ));
        }
        c = DVector::from_column_slice(&init.coeffs);
    }
    let points = collocation_points(poly, &p, config.resolution, config.boundary_margin * poly.diameter());
    let problem = Problem::new(poly, &field, points, [p[0], p[1]], [a[0], a[1]], lambda_effective);

    let mut history = Vec::new();
    let direct = |c: &mut DVector<f64>, history: &mut Vec<IterationRecord>| {
        Stage {
            problem: &problem,
            target: None,
            s: 1.0,
        }
        .run(c, config, history, config.tolerance)
    };
    let mut used_continuation = false;
    let direct_outcome = match config.continuation {
        Continuation::Always => None,
        _ => Some(direct(&mut c, &mut history)),
    };
    let retry = match &direct_outcome {
        None => true,
        Some(StageOutcome::NotPd) => config.continuation == Continuation::Auto,
        Some(_) => false,
    };
    if retry {
        used_continuation = true;
        let base = problem
            .evaluate(&DVector::zeros(c.len()))
            .ok_or(SolverError::HessianNotPD { iteration: 0 })?;
        let mean = base.r.iter().sum::<f64>() / base.r.len() as f64;
        let mut cs = DVector::zeros(c.len());
        let steps = config.continuation_steps;
        for k in 1..=steps {
            let s = k as f64 / steps as f64;
            let target = (k < steps).then(|| base.r.iter().map(|r| (1.0 - s) * (r - mean)).collect());
            let stage_tol = if k < steps { config.tolerance.max(1e-6) } else { config.tolerance };
            let stage = Stage {
                problem: &problem,
                target,
                s,
            };
            if let StageOutcome::NotPd = stage.run(&mut cs, config, &mut history, stage_tol) {
                return Err(SolverError::HessianNotPD { iteration: history.len() });
            }
        }
        c = cs;
    } else if let Some(StageOutcome::NotPd) = direct_outcome {
        return Err(SolverError::HessianNotPD { iteration: history.len() });
    }
    let ev = problem.evaluate(&c).ok_or(SolverError::HessianNotPD { iteration: history.len() })?;
    let dev = deviation(&ev.r);
    field.coeffs = c.iter().copied().collect();
    let j = field.jet(&[p[0], p[1]]);
    field.affine = (-j.v + j.g[0] * p[0] + j.g[1] * p[1], [-j.g[0], -j.g[1]]);
    let model = potential::perturbed(poly, field.clone()).expect("dimension checked");
    let result = SolverResult {
        model,
        field,
        deviation: dev,
        iterations: history.len(),
        history,
        converged: dev <= config.tolerance,
        used_continuation,
        soliton: a,
        preferred_point: p,
        lambda_effective,
        collocation_points: problem.points.len(),
        unknowns: c.len() + 1,
        tolerance: config.tolerance,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(SolverError::NoConvergence { best: Box::new(result) })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("models live on different polytopes")]
    DomainMismatch,
    #[error("no grid point lies at depth at least {delta} in every defining function")]
    EmptyGrid { delta: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// `max ‖H_A − H_B‖_max / ‖H_B‖_max` over the retained points.
    pub h_max_relative: f64,
    pub h_mean_relative: f64,
    /// `min over affine g of max |u_A − u_B − g|`.
    pub u_gauge_max: f64,
    /// The minimizing affine function as `(g₀, ∇g)`.
    pub gauge: (f64, Vec<f64>),
    pub points_used: usize,
    pub delta: f64,
}

/// Minimax affine fit `min_g max_i |v_i − g(x_i)|`, solved as a linear program.
fn minimax_affine(points: &[DVector<f64>], values: &[f64]) -> (f64, DVector<f64>) {
    use microlp::{ComparisonOp, OptimizationDirection, Problem as Lp};
    let n = points[0].len();
    let mut lp = Lp::new(OptimizationDirection::Minimize);
    let g: Vec<_> = (0..=n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for (x, &v) in points.iter().zip(values) {
        let mut row: Vec<_> = std::iter::once((g[0], 1.0)).chain((0..n).map(|k| (g[k + 1], x[k]))).collect();
        row.push((t, 1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, v);
        row[n + 1] = (t, -1.0);
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, v);
    }
    let coef = match lp.solve().ok().and_then(|o| o.into_solution().ok()) {
        Some(sol) => DVector::from_fn(n + 1, |k, _| sol.var_value(g[k])),
        // Fall back to the least-squares fit.
        None => {
            let design = DMatrix::from_fn(points.len(), n + 1, |i, j| if j == 0 { 1.0 } else { points[i][j - 1] });
            design
                .svd(true, true)
                .solve(&DVector::from_column_slice(values), 1e-14)
                .unwrap_or_else(|_| DVector::zeros(n + 1))
        }
    };
    // Report the achieved maximum rather than the LP objective.
    let err = points
        .iter()
        .zip(values)
        .map(|(x, v)| (v - coef[0] - (0..n).map(|k| coef[k + 1] * x[k]).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    (err, coef)
}

/// Compares two potentials on the grid points whose defining functions are all at least `delta`.
pub fn compare(
    a: &PotentialModel,
    b: &PotentialModel,
    grid: &[DVector<f64>],
    delta: f64,
) -> Result<Comparison, CompareError> {
    let poly = b.domain();
    if !a.domain().same_shape(poly) {
        return Err(CompareError::DomainMismatch);
    }
    let pts: Vec<DVector<f64>> = grid
        .iter()
        .filter(|x| poly.defining_values(x).iter().all(|&l| l >= delta))
        .cloned()
        .collect();
    if pts.is_empty() {
        return Err(CompareError::EmptyGrid { delta });
    }
    let mut rel = Vec::with_capacity(pts.len());
    let mut du = Vec::with_capacity(pts.len());
    for x in &pts {
        let ha = a.inverse_hessian(x)?;
        let hb = b.inverse_hessian(x)?;
        rel.push((ha - &hb).amax() / hb.amax());
        du.push(a.value(x)? - b.value(x)?);
    }
    let (u_gauge_max, coef) = minimax_affine(&pts, &du);
    Ok(Comparison {
        h_max_relative: rel.iter().copied().fold(0.0, f64::max),
        h_mean_relative: rel.iter().sum::<f64>() / rel.len() as f64,
        u_gauge_max,
        gauge: (coef[0], coef.iter().skip(1).copied().collect()),
        points_used: pts.len(),
        delta,
    })
}
