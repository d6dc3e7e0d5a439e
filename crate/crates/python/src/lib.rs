//! Python bindings for `abreu_lab`.
//!
//! The module exposes two classes, `Polytope` and `Potential`, plus the
//! solver entry points. Vectors cross the boundary as lists of floats and
//! reports come back as plain dictionaries.

use abreu_lab::cli::PolytopeFile;
use abreu_lab::exact::{self, Rational};
use abreu_lab::measure::{self, AffineFunction};
use abreu_lab::mongeampere::{self, Continuation, SolverConfig, SolverError};
use abreu_lab::polytope::{ExactHalfSpace, HalfSpace};
use abreu_lab::{extremal, fixtures, labelling, potential, soliton, LabelledPolytope, PotentialModel};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(exact::format_rational).collect()
}

fn point(poly: &LabelledPolytope, x: Vec<f64>) -> PyResult<DVector<f64>> {
    if x.len() != poly.dim() {
        return Err(PyValueError::new_err(format!(
            "expected a point with {} coordinates, got {}",
            poly.dim(),
            x.len()
        )));
    }
    Ok(DVector::from_vec(x))
}

/// A convex polytope together with its labels `L_k(x) = ⟨ν_k, x⟩ + c_k`.
#[pyclass(name = "Polytope", module = "abreu_lab", frozen)]
struct PyPolytope {
    inner: LabelledPolytope,
    reference: Option<LabelledPolytope>,
}

impl PyPolytope {
    fn wrap(inner: LabelledPolytope) -> Self {
        Self { inner, reference: None }
    }
}

#[pymethods]
impl PyPolytope {
    /// Polytope from floating-point normals and offsets.
    #[new]
    fn new(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> PyResult<Self> {
        if normals.len() != offsets.len() {
            return Err(PyValueError::new_err("normals and offsets differ in length"));
        }
        let dim = normals.first().map_or(0, Vec::len);
        let hs = normals.into_iter().zip(offsets).map(|(n, c)| HalfSpace::new(n, c)).collect();
        LabelledPolytope::from_halfspaces(dim, hs).map(Self::wrap).map_err(value_error)
    }

    /// Polytope from exact labels written as `"p/q"` strings.
    #[staticmethod]
    fn from_rational(normals: Vec<Vec<String>>, offsets: Vec<String>) -> PyResult<Self> {
        if normals.len() != offsets.len() {
            return Err(PyValueError::new_err("normals and offsets differ in length"));
        }
        let dim = normals.first().map_or(0, Vec::len);
        let parse = |s: &str| exact::parse_rational(s).map_err(value_error);
        let planes = normals
            .iter()
            .zip(&offsets)
            .map(|(n, c)| {
                Ok(ExactHalfSpace {
                    normal: n.iter().map(|s| parse(s)).collect::<PyResult<_>>()?,
                    offset: parse(c)?,
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        LabelledPolytope::from_exact_halfspaces(dim, planes)
            .map(Self::wrap)
            .map_err(value_error)
    }

    /// Convex hull of `points`, with primitive-direction unit-offset labels.
    #[staticmethod]
    fn from_vertices(points: Vec<Vec<f64>>) -> PyResult<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let pts: Vec<DVector<f64>> = points.into_iter().map(DVector::from_vec).collect();
        LabelledPolytope::from_vertices(dim, &pts).map(Self::wrap).map_err(value_error)
    }

    /// One of the built-in fixtures: square, simplex, hirzebruch or rectangle.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let (inner, reference) =
            fixtures::by_name(name).ok_or_else(|| PyValueError::new_err(format!("unknown fixture {name:?}")))?;
        Ok(Self { inner, reference })
    }

    /// The Hirzebruch quadrilateral with parameter `c` (a rational string).
    #[staticmethod]
    fn hirzebruch(c: &str) -> PyResult<Self> {
        let c = exact::parse_rational(c).map_err(value_error)?;
        Ok(Self::wrap(fixtures::hirzebruch(&c)))
    }

    /// Parses the JSON polytope file format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = PolytopeFile::parse_str(text, "<string>").map_err(value_error)?;
        let (inner, reference) = file.to_polytope().map_err(PyValueError::new_err)?;
        Ok(Self { inner, reference })
    }

    fn to_json(&self) -> String {
        PolytopeFile::from_polytope(&self.inner, self.reference.as_ref(), None).to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn num_facets(&self) -> usize {
        self.inner.num_facets()
    }

    #[getter]
    fn normals(&self) -> Vec<Vec<f64>> {
        self.inner.halfspaces().iter().map(|h| vector(&h.normal)).collect()
    }

    #[getter]
    fn offsets(&self) -> Vec<f64> {
        self.inner.halfspaces().iter().map(|h| h.offset).collect()
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.vertices().iter().map(vector).collect()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    #[getter]
    fn has_reference(&self) -> bool {
        self.reference.is_some()
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        Ok(self.inner.contains(&point(&self.inner, x)?))
    }

    /// Labels multiplied facet by facet by positive `scales`.
    fn rescaled(&self, scales: Vec<f64>) -> PyResult<Self> {
        if scales.len() != self.inner.num_facets() || scales.iter().any(|s| !(*s > 0.0)) {
            return Err(PyValueError::new_err("need one positive scale per facet"));
        }
        Ok(Self::wrap(self.inner.rescaled(&scales)))
    }

    fn translated(&self, shift: Vec<f64>) -> PyResult<Self> {
        Ok(Self::wrap(self.inner.translated(&point(&self.inner, shift)?)))
    }

    /// `W`, `Z`, volume and both barycenters.
    fn moments<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = measure::moments(&self.inner);
        let d = PyDict::new(py);
        d.set_item("w", matrix(&m.w))?;
        d.set_item("z", vector(&m.z))?;
        d.set_item("volume", m.volume())?;
        d.set_item("barycenter", vector(&m.barycenter()))?;
        d.set_item("boundary_barycenter", vector(&m.boundary_barycenter()))?;
        if let Some(e) = measure::exact_moments(&self.inner) {
            d.set_item("z_exact", rationals(&e.z))?;
        }
        Ok(d)
    }

    /// `Ψ(f)` for the affine function `constant + ⟨linear, x⟩`.
    fn psi(&self, constant: f64, linear: Vec<f64>) -> PyResult<Vec<f64>> {
        let f = AffineFunction::new(constant, point(&self.inner, linear)?);
        Ok(vector(&measure::psi_map(&self.inner, &f)))
    }

    /// Extremal affine function `A` as `[a₀, a₁, …]` with diagnostics.
    fn extremal<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = extremal::extremal_affine(&self.inner);
        let b = extremal::barycenter_criterion(&self.inner);
        let d = PyDict::new(py);
        d.set_item("coefficients", vector(&r.a.coefficients()))?;
        d.set_item("exact", r.exact.as_deref().map(rationals))?;
        d.set_item("is_constant", r.is_constant)?;
        d.set_item("condition_number", r.condition_number)?;
        d.set_item("ill_conditioned", r.ill_conditioned)?;
        d.set_item("barycenters_coincide", b.coincide)?;
        Ok(d)
    }

    /// Preferred point and common value when the labelling is monotone, else `None`.
    fn monotone_point<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        labelling::monotone_point(&self.inner)
            .map(|c| {
                let d = PyDict::new(py);
                d.set_item("preferred_point", vector(&c.preferred_point))?;
                d.set_item("common_value", c.common_value)?;
                d.set_item("residual", c.residual)?;
                if let Some((p, v)) = &c.exact {
                    d.set_item("preferred_point_exact", rationals(p))?;
                    d.set_item("common_value_exact", exact::format_rational(v))?;
                }
                Ok(d)
            })
            .transpose()
    }

    /// The Kähler–Einstein labelling of the same polytope and its preferred point.
    fn normalize(&self) -> (Self, Vec<f64>) {
        let (norm, cert) = labelling::einstein_normalize(&self.inner);
        (Self::wrap(norm), vector(&cert.preferred_point))
    }

    /// Labels rescaled by `λ / L_k(p)`, making `p` the preferred point with common value `λ`.
    fn cone_labels(&self, lam: f64, p: Vec<f64>) -> PyResult<Self> {
        let p = point(&self.inner, p)?;
        labelling::cone_labels(&self.inner, lam, &p)
            .map(Self::wrap)
            .map_err(value_error)
    }

    /// Soliton vector `a` of a monotone labelling.
    #[pyo3(signature = (tol = soliton::DEFAULT_TOL))]
    fn soliton<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let s = soliton::soliton_vector(&self.inner, tol).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("a", vector(&s.a))?;
        d.set_item("preferred_point", vector(&s.preferred_point))?;
        d.set_item("residual", s.residual)?;
        d.set_item("iterations", s.iterations)?;
        Ok(d)
    }

    fn rationality<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = labelling::rationality(&self.inner).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("is_lattice_polytope", r.is_lattice_polytope)?;
        d.set_item("vertices_integral", r.vertices_integral)?;
        d.set_item("vertex_denominator", r.vertex_denominator.map(|v| v.to_string()))?;
        d.set_item("minimal_scale", r.minimal_scale.as_ref().map(exact::format_rational))?;
        Ok(d)
    }

    /// Vertex determinants of integral labels; uses the reference labels if asked.
    #[pyo3(signature = (use_reference = false))]
    fn delzant<'py>(&self, py: Python<'py>, use_reference: bool) -> PyResult<Bound<'py, PyDict>> {
        let target = if use_reference {
            self.reference
                .as_ref()
                .ok_or_else(|| PyValueError::new_err("this polytope carries no reference labels"))?
        } else {
            &self.inner
        };
        let r = labelling::delzant_check(target).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("is_delzant", r.is_delzant)?;
        d.set_item(
            "determinants",
            r.vertices.iter().map(|v| v.abs_det.to_string()).collect::<Vec<_>>(),
        )?;
        d.set_item("label_lattice_index", r.label_lattice_index.to_string())?;
        Ok(d)
    }

    /// Cone-angle ratios `a_k` of these labels against `reference` (default: the file's reference labels).
    #[pyo3(signature = (reference = None, tol = labelling::SMOOTH_TOL))]
    fn cone_angles(&self, reference: Option<PyRef<'_, PyPolytope>>, tol: f64) -> PyResult<Vec<(f64, String)>> {
        let eta = match &reference {
            Some(r) => &r.inner,
            None => self
                .reference
                .as_ref()
                .ok_or_else(|| PyValueError::new_err("no reference labels given"))?,
        };
        let r = labelling::cone_angles(eta, &self.inner, tol).map_err(value_error)?;
        Ok(r.facets.iter().map(|f| (f.ratio, f.class.name().to_string())).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Polytope(dim={}, facets={}, volume={})",
            self.inner.dim(),
            self.inner.num_facets(),
            self.inner.volume()
        )
    }
}

/// A symplectic potential with analytic derivatives.
#[pyclass(name = "Potential", module = "abreu_lab", frozen)]
struct PyPotential {
    inner: PotentialModel,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn guillemin(poly: PyRef<'_, PyPolytope>) -> Self {
        Self {
            inner: potential::guillemin(&poly.inner),
        }
    }

    /// The closed-form Kähler–Einstein potential on the Hirzebruch quadrilateral of scale `c`.
    #[staticmethod]
    fn hirzebruch(c: f64) -> PyResult<Self> {
        potential::hirzebruch_closed_form(c)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn domain(&self) -> PyPolytope {
        PyPolytope::wrap(self.inner.domain().clone())
    }

    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&point(self.inner.domain(), x)?).map_err(value_error)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let g = self.inner.gradient(&point(self.inner.domain(), x)?).map_err(value_error)?;
        Ok(vector(&g))
    }

    fn hessian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let h = self.inner.hessian(&point(self.inner.domain(), x)?).map_err(value_error)?;
        Ok(matrix(&h))
    }

    /// `H = (Hess u)⁻¹`.
    fn inverse_hessian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let h = self
            .inner
            .inverse_hessian(&point(self.inner.domain(), x)?)
            .map_err(value_error)?;
        Ok(matrix(&h))
    }

    /// Abreu scalar curvature `S = −Σ ∂_i∂_j H_ij`.
    fn scalar_curvature(&self, x: Vec<f64>) -> PyResult<f64> {
        potential::abreu_scalar(&self.inner, &point(self.inner.domain(), x)?).map_err(value_error)
    }

    /// Boundary-condition audit against the labels of `poly`.
    #[pyo3(signature = (poly, samples = 8, tol = 1e-6))]
    fn boundary_check<'py>(
        &self,
        py: Python<'py>,
        poly: PyRef<'_, PyPolytope>,
        samples: usize,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = potential::boundary_check(&self.inner, &poly.inner, samples, tol);
        let d = PyDict::new(py);
        d.set_item("passed", r.passed)?;
        d.set_item("violations", r.violations)?;
        d.set_item("max_h_nu", r.facets.iter().map(|f| f.max_h_nu).collect::<Vec<_>>())?;
        d.set_item("max_dh_error", r.facets.iter().map(|f| f.max_dh_error).collect::<Vec<_>>())?;
        Ok(d)
    }

    /// Einstein / soliton residual on an `n × n` interior grid of `poly`.
    #[pyo3(signature = (poly, lam = 1.0, a = None, n = 50))]
    fn einstein_residual<'py>(
        &self,
        py: Python<'py>,
        poly: PyRef<'_, PyPolytope>,
        lam: f64,
        a: Option<Vec<f64>>,
        n: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let a = a.map(|a| point(&poly.inner, a)).transpose()?;
        let grid = potential::interior_grid(&poly.inner, n, 1e-3);
        let r = potential::einstein_residual(&self.inner, &poly.inner, lam, a.as_ref(), &grid).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("deviation", r.deviation)?;
        d.set_item("mean", r.mean)?;
        d.set_item("points", r.points.len())?;
        d.set_item("preferred_point", vector(&r.preferred_point))?;
        d.set_item("lambda_effective", r.lambda_effective)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.inner.name())
    }
}

/// Solves the Kähler–Einstein (or soliton) equation on a monotone polygon.
///
/// Returns the solved potential and a report. `a = None` computes the
/// soliton vector first; pass `[0, 0]` for the Kähler–Einstein equation.
#[pyfunction]
#[pyo3(signature = (poly, lam = 1.0, a = None, resolution = 24, tolerance = 1e-8, continuation = "auto"))]
fn solve<'py>(
    py: Python<'py>,
    poly: PyRef<'_, PyPolytope>,
    lam: f64,
    a: Option<Vec<f64>>,
    resolution: usize,
    tolerance: f64,
    continuation: &str,
) -> PyResult<(PyPotential, Bound<'py, PyDict>)> {
    let continuation = match continuation {
        "auto" => Continuation::Auto,
        "always" => Continuation::Always,
        "never" => Continuation::Never,
        other => return Err(PyValueError::new_err(format!("unknown continuation mode {other:?}"))),
    };
    let a = a.map(|a| point(&poly.inner, a)).transpose()?;
    let config = SolverConfig {
        tolerance,
        continuation,
        ..SolverConfig::with_resolution(resolution)
    };
    let inner = poly.inner.clone();
    let result = py.detach(move || mongeampere::solve(&inner, lam, a.as_ref(), &config));
    let r = match result {
        Ok(r) => r,
        Err(SolverError::NoConvergence { best }) => {
            return Err(PyRuntimeError::new_err(format!(
                "solver did not converge: deviation {:e} after {} iterations",
                best.deviation, best.iterations
            )))
        }
        Err(e) => return Err(value_error(e)),
    };
    let d = PyDict::new(py);
    d.set_item("deviation", r.deviation)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged)?;
    d.set_item("used_continuation", r.used_continuation)?;
    d.set_item("soliton", vector(&r.soliton))?;
    d.set_item("preferred_point", vector(&r.preferred_point))?;
    d.set_item("collocation_points", r.collocation_points)?;
    d.set_item("unknowns", r.unknowns)?;
    Ok((PyPotential { inner: r.model }, d))
}

/// Relative `H` difference and gauge-fixed potential difference of two potentials on `poly`.
#[pyfunction]
#[pyo3(signature = (a, b, poly, delta = 0.05, n = 50))]
fn compare<'py>(
    py: Python<'py>,
    a: PyRef<'_, PyPotential>,
    b: PyRef<'_, PyPotential>,
    poly: PyRef<'_, PyPolytope>,
    delta: f64,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = potential::interior_grid(&poly.inner, n, 1e-3);
    let c = mongeampere::compare(&a.inner, &b.inner, &grid, delta).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("h_max_relative", c.h_max_relative)?;
    d.set_item("h_mean_relative", c.h_mean_relative)?;
    d.set_item("u_gauge_max", c.u_gauge_max)?;
    d.set_item("points_used", c.points_used)?;
    Ok(d)
}

#[pymodule(name = "abreu_lab")]
fn abreu_lab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolytope>()?;
    m.add_class::<PyPotential>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
