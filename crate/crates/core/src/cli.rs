//! Command-line front end: polytope files, built-in examples and one
//! subcommand per library operation.
//!
//! Polytope files are JSON. Exact numbers are JSON integers or `"p/q"`
//! strings; JSON floats are accepted but make lattice questions unavailable.
//! Every report exists in a text form and in a versioned JSON form
//! (`--json`), and always echoes the tolerances it used. Facets and vertices
//! are numbered from 1 in reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::chebyshev::ChebyshevField;
use crate::exact::{self, Rational};
use crate::extremal::{self, barycenter_criterion, extremal_affine};
use crate::fixtures;
use crate::labelling::{self, LabellingError, SingularityClass};
use crate::measure;
use crate::mongeampere::{self, CompareError, SolverConfig, SolverError, SolverResult};
use crate::polytope::{ExactHalfSpace, HalfSpace, LabelledPolytope, PolytopeError};
use crate::potential::{self, PotentialError, PotentialModel};
use crate::soliton::{self, SolitonError};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "abreu-lab", version, about = "Labelled polytopes and toric Kähler–Einstein metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Polytope file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Emit the machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Tolerance override for the command's main check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Coefficient λ of the Legendre term.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,
    /// Grid or collocation resolution.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Also write the JSON report to this file (the fixture itself for `examples`).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Guillemin,
    Hirzebruch,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertices, incidences, volume and labels.
    Info,
    /// Interior and boundary moments up to order two.
    Moments,
    /// Extremal affine function and the barycenter criterion.
    Extremal,
    /// Einstein normalization of the labels.
    Normalize,
    /// Kähler–Ricci soliton vector of a monotone labelling.
    Soliton,
    /// Cone angles of the labels against the file's reference labels.
    Angles,
    /// Lattice data of rational labels.
    Rationality,
    /// Vertex determinants of integral labels.
    Delzant {
        /// Check the file's reference labels instead of its facet labels.
        #[arg(long)]
        use_reference: bool,
    },
    /// Boundary audit, scalar curvature and Einstein residual of a potential.
    CheckPotential {
        #[arg(long, value_enum, default_value_t = ModelKind::Guillemin)]
        model: ModelKind,
        /// Sample points per facet for the boundary audit.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Solve the Kähler–Einstein / soliton equation (dimension 2).
    Solve {
        /// Use a = 0 instead of the computed soliton vector.
        #[arg(long)]
        zero_soliton: bool,
    },
    /// Compare a solver output with a closed-form or another solved potential.
    Compare {
        /// Solver output (the JSON report written by `solve --output`).
        #[arg(long)]
        solution: PathBuf,
        /// Reference model; ignored when --reference-solution is given.
        #[arg(long, value_enum, default_value_t = ModelKind::Hirzebruch)]
        against: ModelKind,
        /// A second solver output to compare against instead of a closed form
        #[arg(long)]
        reference_solution: Option<PathBuf>,
        /// Only grid points with every defining function at least this large are used.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Print a built-in fixture file: square, simplex, hirzebruch or rectangle.
    Examples { name: String },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}:{column}: {message} (field `{field}`)")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NoConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NoConvergence(_) => EXIT_NO_CONVERGENCE,
            _ => EXIT_INVALID,
        }
    }
}

/// A number in a polytope file: exact (integer or `"p/q"`) or floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(q) => exact::to_f64(q),
            Self::Float(x) => *x,
        }
    }

    fn exact(&self) -> Option<&Rational> {
        match self {
            Self::Exact(q) => Some(q),
            Self::Float(_) => None,
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Exact(q) if q.is_integer() => match q.to_integer().to_i64() {
                Some(i) => s.serialize_i64(i),
                None => s.serialize_str(&exact::format_rational(q)),
            },
            Self::Exact(q) => s.serialize_str(&exact::format_rational(q)),
            Self::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Number;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an integer, a float or a \"p/q\" string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Number, E> {
                Ok(Number::Exact(exact::from_i64(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Number, E> {
                Ok(Number::Exact(Rational::from_integer(BigInt::from(v))))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Number, E> {
                Ok(Number::Float(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Number, E> {
                exact::parse_rational(v).map(Number::Exact).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetEntry {
    pub normal: Vec<Number>,
    pub offset: Number,
}

/// On-disk description of a labelled polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub facets: Vec<FacetEntry>,
    /// Optional vertex list, cross-checked against the facets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<Number>>>,
    /// Optional second labelling of the same facets (for cone angles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_labels: Option<Vec<FacetEntry>>,
}

fn facet_entries(poly: &LabelledPolytope) -> Vec<FacetEntry> {
    match poly.exact_labels() {
        Some(planes) => planes
            .iter()
            .map(|h| FacetEntry {
                normal: h.normal.iter().cloned().map(Number::Exact).collect(),
                offset: Number::Exact(h.offset.clone()),
            })
            .collect(),
        None => poly
            .halfspaces()
            .iter()
            .map(|h| FacetEntry {
                normal: h.normal.iter().map(|&v| Number::Float(v)).collect(),
                offset: Number::Float(h.offset),
            })
            .collect(),
    }
}

fn build_polytope(dim: usize, facets: &[FacetEntry]) -> Result<LabelledPolytope, PolytopeError> {
    let all_exact = facets
        .iter()
        .all(|f| f.offset.exact().is_some() && f.normal.iter().all(|v| v.exact().is_some()));
    if all_exact {
        let planes = facets
            .iter()
            .map(|f| ExactHalfSpace {
                normal: f.normal.iter().map(|v| v.exact().expect("checked").clone()).collect(),
                offset: f.offset.exact().expect("checked").clone(),
            })
            .collect();
        LabelledPolytope::from_exact_halfspaces(dim, planes)
    } else {
        let hs = facets
            .iter()
            .map(|f| HalfSpace::new(f.normal.iter().map(Number::to_f64).collect::<Vec<_>>(), f.offset.to_f64()))
            .collect();
        LabelledPolytope::from_halfspaces(dim, hs)
    }
}

impl PolytopeFile {
    /// Canonical file for `poly`, with exact vertices when known.
    pub fn from_polytope(poly: &LabelledPolytope, reference: Option<&LabelledPolytope>, name: Option<&str>) -> Self {
        let vertices = match poly.exact() {
            Some(e) if e.vertices.len() == poly.vertices().len() => e
                .vertices
                .iter()
                .map(|v| v.iter().cloned().map(Number::Exact).collect())
                .collect(),
            _ => poly
                .vertices()
                .iter()
                .map(|v| v.iter().map(|&x| Number::Float(x)).collect())
                .collect(),
        };
        Self {
            name: name.map(str::to_string),
            dim: poly.dim(),
            facets: facet_entries(poly),
            vertices: Some(vertices),
            reference_labels: reference.map(facet_entries),
        }
    }

    pub fn has_floats(&self) -> bool {
        let floaty = |f: &FacetEntry| f.offset.exact().is_none() || f.normal.iter().any(|v| v.exact().is_none());
        self.facets.iter().any(floaty) || self.reference_labels.iter().flatten().any(floaty)
    }

    /// Builds the polytope (and reference labelling), checking optional vertices.
    pub fn to_polytope(&self) -> Result<(LabelledPolytope, Option<LabelledPolytope>), String> {
        let poly = build_polytope(self.dim, &self.facets).map_err(|e| describe_polytope_error(&e))?;
        if let Some(vs) = &self.vertices {
            let tol = 1e-9 * poly.diameter().max(1.0);
            if vs.len() != poly.vertices().len() {
                return Err(format!(
                    "file lists {} vertices but the facets have {}",
                    vs.len(),
                    poly.vertices().len()
                ));
            }
            for (i, v) in vs.iter().enumerate() {
                if v.len() != self.dim {
                    return Err(format!("vertex {} has {} coordinates, expected {}", i + 1, v.len(), self.dim));
                }
                let x = DVector::from_iterator(v.len(), v.iter().map(Number::to_f64));
                if !poly.vertices().iter().any(|w| (w - &x).norm() <= tol) {
                    return Err(format!("vertex {} {:?} is not a vertex of the facets", i + 1, x.as_slice()));
                }
            }
        }
        let reference = match &self.reference_labels {
            None => None,
            Some(r) => {
                let refp =
                    build_polytope(self.dim, r).map_err(|e| format!("reference labels: {}", describe_polytope_error(&e)))?;
                if !refp.same_shape(&poly) {
                    return Err("reference labels describe a different polytope".into());
                }
                Some(refp)
            }
        };
        Ok((poly, reference))
    }

    /// Canonical JSON text: two-space indentation and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn parse_str(text: &str, path: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let parsed: Result<Self, _> = serde_path_to_error::deserialize(de);
        parsed.map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CliError::Syntax {
                path: path.to_string(),
                line: inner.line(),
                column: inner.column(),
                field,
                message: inner.to_string(),
            }
        })
    }
}

/// Reads and validates a polytope file.
pub fn parse(path: &Path) -> Result<(PolytopeFile, LabelledPolytope, Option<LabelledPolytope>), CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let file = PolytopeFile::parse_str(&text, &shown)?;
    let (poly, reference) = file.to_polytope().map_err(|message| CliError::Invalid {
        path: shown,
        message,
    })?;
    Ok((file, poly, reference))
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// Polytope errors with facet numbers shifted to the 1-based convention of reports.
pub fn describe_polytope_error(e: &PolytopeError) -> String {
    match e {
        PolytopeError::DimensionMismatch { index, expected, found } => {
            format!("facet {} has {found} coordinates, expected {expected}", index + 1)
        }
        PolytopeError::ZeroNormal { index } => format!("facet {} has a zero or non-finite normal", index + 1),
        PolytopeError::Unbounded { facets } => {
            format!("region is unbounded (recession along facets {:?})", one_based(facets))
        }
        PolytopeError::NotSimple { vertex, facets } => format!(
            "vertex {vertex:?} lies on {} facets {:?}; polytope is not simple",
            facets.len(),
            one_based(facets)
        ),
        PolytopeError::RedundantFacet { index } => {
            format!("facet {} is redundant (it does not support a facet)", index + 1)
        }
        PolytopeError::BadIndex { index, count } => format!("facet {} out of range ({count} facets)", index + 1),
        other => other.to_string(),
    }
}

fn describe_labelling_error(e: &LabellingError) -> String {
    match e {
        LabellingError::NonIntegralLabels { facet } => {
            format!("labels are not integral (facet {}); rescale them first", facet + 1)
        }
        LabellingError::NotCollinear { facet } => {
            format!("labels of facet {} are not positively collinear", facet + 1)
        }
        other => other.to_string(),
    }
}

fn soliton_error(e: SolitonError) -> CliError {
    match e {
        SolitonError::NotMonotone => CliError::Validation(e.to_string()),
        other => CliError::NoConvergence(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Formatting helpers.

fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e12) {
        format!("{x:.6e}")
    } else {
        format!("{x}")
    }
}

fn vec_text(v: &[f64]) -> String {
    format!("({})", v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", "))
}

fn rat_text(v: &[Rational]) -> String {
    format!("({})", v.iter().map(exact::format_rational).collect::<Vec<_>>().join(", "))
}

fn fjson(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn vjson(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| fjson(x)).collect())
}

fn rjson(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|q| Value::String(exact::format_rational(q))).collect())
}

fn bigint_json(b: &BigInt) -> Value {
    b.to_i64().map_or_else(|| Value::String(b.to_string()), |i| json!(i))
}

fn matrix_json(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| vjson(&m.row(i).iter().copied().collect::<Vec<_>>())).collect())
}

fn affine_text(coeffs: &[String]) -> String {
    let mut s = coeffs[0].clone();
    for (i, c) in coeffs.iter().enumerate().skip(1) {
        if c == "0" {
            continue;
        }
        match c.strip_prefix('-') {
            Some(abs) => write!(s, " - {abs}·x{i}").unwrap(),
            None => write!(s, " + {c}·x{i}").unwrap(),
        }
    }
    s
}

/// A finished report: human text plus the JSON `result` object.
pub struct Report {
    pub command: &'static str,
    pub text: String,
    pub result: Value,
    pub tolerances: Value,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    fn new(command: &'static str, text: String, result: Value, tolerances: Value) -> Self {
        Self {
            command,
            text,
            result,
            tolerances,
            warnings: Vec::new(),
            exit_code: EXIT_OK,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "tolerances": self.tolerances,
            "warnings": self.warnings,
            "result": self.result,
        })
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
            s.push('\n');
            s
        } else {
            let mut s = String::new();
            for w in &self.warnings {
                writeln!(s, "warning: {w}").unwrap();
            }
            s.push_str(&self.text);
            s
        }
    }
}

/// Result of one invocation.
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), rendered)
            } else {
                (rendered, String::new())
            };
            Outcome {
                exit_code: code,
                stdout,
                stderr,
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    if let Command::Examples { name } = &cli.command {
        return examples(name, cli.output.as_deref());
    }
    match execute(cli) {
        Ok(report) => {
            let mut stderr = String::new();
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, report.render(true)) {
                    return Outcome {
                        exit_code: EXIT_INVALID,
                        stdout: String::new(),
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                    };
                }
                writeln!(stderr, "wrote {}", path.display()).unwrap();
            }
            Outcome {
                exit_code: report.exit_code,
                stdout: report.render(cli.json),
                stderr,
            }
        }
        Err(e) => Outcome {
            exit_code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn examples(name: &str, output: Option<&Path>) -> Outcome {
    let Some((poly, reference)) = fixtures::by_name(name) else {
        return Outcome {
            exit_code: EXIT_INVALID,
            stdout: String::new(),
            stderr: format!("error: unknown example {name:?}; choose one of {}\n", fixtures::NAMES.join(", ")),
        };
    };
    let text = PolytopeFile::from_polytope(&poly, reference.as_ref(), Some(name)).to_json();
    match output {
        None => Outcome {
            exit_code: EXIT_OK,
            stdout: text,
            stderr: String::new(),
        },
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                exit_code: EXIT_OK,
                stdout: String::new(),
                stderr: format!("wrote {}\n", path.display()),
            },
            Err(e) => Outcome {
                exit_code: EXIT_INVALID,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let path = cli
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("--input FILE is required".into()))?;
    let (file, poly, reference) = parse(path)?;
    let lattice_warning = file
        .has_floats()
        .then(|| "input contains floating-point entries; lattice operations need exact rationals".to_string());
    let mut report = match &cli.command {
        Command::Info => info(&poly),
        Command::Moments => moments(&poly),
        Command::Extremal => extremal_report(&poly),
        Command::Normalize => normalize(&poly),
        Command::Soliton => soliton_report(&poly, cli.tol.unwrap_or(soliton::DEFAULT_TOL))?,
        Command::Angles => {
            let reference = reference
                .as_ref()
                .ok_or_else(|| CliError::Usage("the input file has no reference_labels".into()))?;
            angles(&poly, reference, cli.tol.unwrap_or(1e-9))?
        }
        Command::Rationality => rationality(&poly),
        Command::Delzant { use_reference } => {
            let target = if *use_reference {
                reference
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("the input file has no reference_labels".into()))?
            } else {
                &poly
            };
            delzant(target, *use_reference)?
        }
        Command::CheckPotential { model, samples } => check_potential(&poly, *model, *samples, cli)?,
        Command::Solve { zero_soliton } => solve(&poly, *zero_soliton, cli)?,
        Command::Compare {
            solution,
            against,
            reference_solution,
            delta,
        } => compare(&poly, solution, *against, reference_solution.as_deref(), *delta, cli)?,
        Command::Examples { .. } => unreachable!("handled before parsing input"),
    };
    let lattice = matches!(
        cli.command,
        Command::Rationality | Command::Delzant { .. } | Command::Angles
    );
    if let (true, Some(w)) = (lattice, lattice_warning) {
        report.warnings.push(w);
    }
    Ok(report)
}

fn info(poly: &LabelledPolytope) -> Report {
    let mut t = String::new();
    writeln!(
        t,
        "dimension {}, {} facets, {} vertices",
        poly.dim(),
        poly.num_facets(),
        poly.vertices().len()
    )
    .unwrap();
    writeln!(t, "volume {}", num(poly.volume())).unwrap();
    writeln!(t, "diameter {}", num(poly.diameter())).unwrap();
    writeln!(t, "exact labels: {}", if poly.exact_labels().is_some() { "yes" } else { "no" }).unwrap();
    let exact = poly.exact_labels();
    for (k, h) in poly.halfspaces().iter().enumerate() {
        match exact {
            Some(p) => writeln!(
                t,
                "facet {}: normal {}, offset {}",
                k + 1,
                rat_text(&p[k].normal),
                exact::format_rational(&p[k].offset)
            ),
            None => writeln!(
                t,
                "facet {}: normal {}, offset {}",
                k + 1,
                vec_text(h.normal.as_slice()),
                num(h.offset)
            ),
        }
        .unwrap();
    }
    let exact_vertices = poly.exact().filter(|e| e.vertices.len() == poly.vertices().len());
    for (i, v) in poly.vertices().iter().enumerate() {
        let shown = match exact_vertices {
            Some(e) => rat_text(&e.vertices[i]),
            None => vec_text(v.as_slice()),
        };
        writeln!(t, "vertex {}: {} on facets {:?}", i + 1, shown, one_based(&poly.vertex_facets()[i])).unwrap();
    }
    let result = json!({
        "dim": poly.dim(),
        "facet_count": poly.num_facets(),
        "volume": fjson(poly.volume()),
        "diameter": fjson(poly.diameter()),
        "exact_labels": exact.is_some(),
        "facets": serde_json::to_value(facet_entries(poly)).expect("serializable"),
        "vertices": poly.vertices().iter().map(|v| vjson(v.as_slice())).collect::<Vec<_>>(),
        "exact_vertices": exact_vertices.map(|e| e.vertices.iter().map(|v| rjson(v)).collect::<Vec<_>>()),
        "vertex_facets": poly.vertex_facets().iter().map(|f| one_based(f)).collect::<Vec<_>>(),
    });
    Report::new("info", t, result, json!({"geometric": poly.tolerance()}))
}

fn moments(poly: &LabelledPolytope) -> Report {
    let m = measure::moments(poly);
    let ex = measure::exact_moments(poly);
    let mut t = String::new();
    writeln!(t, "volume {}", num(m.volume())).unwrap();
    writeln!(t, "barycenter {}", vec_text(m.barycenter().as_slice())).unwrap();
    writeln!(t, "boundary barycenter {}", vec_text(m.boundary_barycenter().as_slice())).unwrap();
    writeln!(t, "Z = {}", vec_text(m.z.as_slice())).unwrap();
    writeln!(t, "W =").unwrap();
    for i in 0..m.w.nrows() {
        writeln!(t, "  {}", vec_text(&m.w.row(i).iter().copied().collect::<Vec<_>>())).unwrap();
    }
    let exact_json = ex.as_ref().map(|e| {
        writeln!(t, "exact Z = {}", rat_text(&e.z)).unwrap();
        writeln!(t, "exact barycenter {}", rat_text(&e.barycenter())).unwrap();
        writeln!(t, "exact boundary barycenter {}", rat_text(&e.boundary_barycenter())).unwrap();
        json!({
            "w": e.w.iter().map(|r| rjson(r)).collect::<Vec<_>>(),
            "z": rjson(&e.z),
            "barycenter": rjson(&e.barycenter()),
            "boundary_barycenter": rjson(&e.boundary_barycenter()),
        })
    });
    let result = json!({
        "volume": fjson(m.volume()),
        "w": matrix_json(&m.w),
        "z": vjson(m.z.as_slice()),
        "barycenter": vjson(m.barycenter().as_slice()),
        "boundary_barycenter": vjson(m.boundary_barycenter().as_slice()),
        "exact": exact_json,
    });
    Report::new("moments", t, result, json!({}))
}

fn extremal_report(poly: &LabelledPolytope) -> Report {
    let r = extremal_affine(poly);
    let b = barycenter_criterion(poly);
    let coeffs: Vec<String> = match &r.exact {
        Some(e) => e.iter().map(exact::format_rational).collect(),
        None => r.a.coefficients().iter().map(|&x| num(x)).collect(),
    };
    let mut t = String::new();
    writeln!(
        t,
        "A(x) = {} (constant: {})",
        affine_text(&coeffs),
        if r.is_constant { "yes" } else { "no" }
    )
    .unwrap();
    writeln!(t, "condition number of W: {}", num(r.condition_number)).unwrap();
    if r.ill_conditioned {
        writeln!(t, "warning: W is ill-conditioned").unwrap();
    }
    writeln!(t, "barycenter {}", vec_text(b.bary_interior.as_slice())).unwrap();
    writeln!(t, "boundary barycenter {}", vec_text(b.bary_boundary.as_slice())).unwrap();
    writeln!(t, "barycenters coincide: {}", if b.coincide { "yes" } else { "no" }).unwrap();
    let result = json!({
        "coefficients": vjson(r.a.coefficients().as_slice()),
        "exact_coefficients": r.exact.as_ref().map(|e| rjson(e)),
        "is_constant": r.is_constant,
        "condition_number": fjson(r.condition_number),
        "ill_conditioned": r.ill_conditioned,
        "barycenter": vjson(b.bary_interior.as_slice()),
        "boundary_barycenter": vjson(b.bary_boundary.as_slice()),
        "barycenters_coincide": b.coincide,
    });
    Report::new(
        "extremal",
        t,
        result,
        json!({"constancy": r.tolerance, "condition_limit": extremal::CONDITION_LIMIT}),
    )
}

fn exact_scale(old: &[Rational], new: &[Rational]) -> Option<Rational> {
    old.iter().zip(new).find(|(o, _)| !o.is_zero()).map(|(o, n)| n / o)
}

fn normalize(poly: &LabelledPolytope) -> Report {
    let (normalized, cert) = labelling::einstein_normalize(poly);
    let mut t = String::new();
    let scales: Vec<(f64, Option<Rational>)> = (0..poly.num_facets())
        .map(|k| {
            let s = normalized.halfspaces()[k].normal.norm() / poly.halfspaces()[k].normal.norm();
            let e = poly
                .exact_labels()
                .zip(normalized.exact_labels())
                .and_then(|(a, b)| exact_scale(&a[k].normal, &b[k].normal));
            (s, e)
        })
        .collect();
    let exact_labels = normalized.exact_labels();
    for (k, h) in normalized.halfspaces().iter().enumerate() {
        let (normal, offset) = match exact_labels {
            Some(p) => (rat_text(&p[k].normal), exact::format_rational(&p[k].offset)),
            None => (vec_text(h.normal.as_slice()), num(h.offset)),
        };
        let scale = match &scales[k].1 {
            Some(q) => exact::format_rational(q),
            None => num(scales[k].0),
        };
        writeln!(
            t,
            "facet {}: label {} = {} × input, offset {}",
            k + 1,
            normal,
            scale,
            offset
        )
        .unwrap();
    }
    match &cert.exact {
        Some((p, c)) => {
            writeln!(
                t,
                "preferred point {} ≈ {}",
                rat_text(p),
                vec_text(cert.preferred_point.as_slice())
            )
            .unwrap();
            writeln!(t, "common value {}", exact::format_rational(c)).unwrap();
        }
        None => {
            writeln!(t, "preferred point {}", vec_text(cert.preferred_point.as_slice())).unwrap();
            writeln!(t, "common value {}", num(cert.common_value)).unwrap();
        }
    }
    writeln!(t, "monotonicity residual {}", num(cert.residual)).unwrap();
    let result = json!({
        "labels": serde_json::to_value(facet_entries(&normalized)).expect("serializable"),
        "scales": scales.iter().map(|s| fjson(s.0)).collect::<Vec<_>>(),
        "exact_scales": scales.iter().map(|s| s.1.as_ref().map(exact::format_rational)).collect::<Vec<_>>(),
        "preferred_point": vjson(cert.preferred_point.as_slice()),
        "exact_preferred_point": cert.exact.as_ref().map(|(p, _)| rjson(p)),
        "common_value": fjson(cert.common_value),
        "exact_common_value": cert.exact.as_ref().map(|(_, c)| exact::format_rational(c)),
        "residual": fjson(cert.residual),
        "polytope": serde_json::to_value(PolytopeFile::from_polytope(&normalized, None, None)).expect("serializable"),
    });
    Report::new("normalize", t, result, json!({"monotone": labelling::MONOTONE_TOL}))
}

fn soliton_report(poly: &LabelledPolytope, tol: f64) -> Result<Report, CliError> {
    let s = soliton::soliton_vector(poly, tol).map_err(soliton_error)?;
    let ke = s.a.norm() <= 1e-8;
    let mut t = String::new();
    writeln!(t, "soliton vector a = {}", vec_text(s.a.as_slice())).unwrap();
    writeln!(t, "preferred point {}", vec_text(s.preferred_point.as_slice())).unwrap();
    writeln!(t, "moment residual {} after {} Newton steps", num(s.residual), s.iterations).unwrap();
    writeln!(t, "Kähler–Einstein (a = 0): {}", if ke { "yes" } else { "no" }).unwrap();
    let result = json!({
        "a": vjson(s.a.as_slice()),
        "preferred_point": vjson(s.preferred_point.as_slice()),
        "residual": fjson(s.residual),
        "iterations": s.iterations,
        "kahler_einstein": ke,
    });
    Ok(Report::new(
        "soliton",
        t,
        result,
        json!({"residual": tol, "zero_vector": 1e-8, "quadrature": measure::QUADRATURE_TOL}),
    ))
}

fn angles(poly: &LabelledPolytope, reference: &LabelledPolytope, tol: f64) -> Result<Report, CliError> {
    let r = labelling::cone_angles(reference, poly, tol).map_err(|e| CliError::Validation(describe_labelling_error(&e)))?;
    let mut t = String::new();
    writeln!(t, "{:<6} {:<10} {:<12} angle", "facet", "ratio", "class").unwrap();
    let mut rows = Vec::new();
    for (k, f) in r.facets.iter().enumerate() {
        let ratio = f.exact_ratio.as_ref().map_or_else(|| num(f.ratio), exact::format_rational);
        let angle = match f.class {
            SingularityClass::Smooth => "2π".to_string(),
            _ => format!("2π·{ratio}"),
        };
        writeln!(t, "{:<6} {:<10} {:<12} {}", k + 1, ratio, f.class.name(), angle).unwrap();
        rows.push(json!({
            "facet": k + 1,
            "ratio": fjson(f.ratio),
            "exact_ratio": f.exact_ratio.as_ref().map(exact::format_rational),
            "class": f.class.name(),
            "angle": fjson(2.0 * std::f64::consts::PI * f.ratio),
            "angle_text": angle,
        }));
    }
    Ok(Report::new("angles", t, json!({ "facets": rows }), json!({"ratio": r.tolerance})))
}

fn rationality(poly: &LabelledPolytope) -> Report {
    let mut t = String::new();
    let result = match labelling::rationality(poly) {
        Err(_) => {
            writeln!(t, "labels are not exact: no minimal rationalizing scale").unwrap();
            json!({"rational": false})
        }
        Ok(r) => {
            writeln!(
                t,
                "rational vertices (lattice polytope after dilation): {}",
                if r.is_lattice_polytope { "yes" } else { "no" }
            )
            .unwrap();
            writeln!(t, "integral vertices: {}", if r.vertices_integral { "yes" } else { "no" }).unwrap();
            if let Some(d) = &r.vertex_denominator {
                writeln!(t, "vertex denominator {d}").unwrap();
            }
            match &r.minimal_scale {
                Some(s) => writeln!(t, "minimal scale s = {}", exact::format_rational(s)).unwrap(),
                None => writeln!(t, "labels are all zero: no scale").unwrap(),
            }
            for (k, n) in r.scaled_normals.iter().flatten().enumerate() {
                let shown: Vec<String> = n.iter().map(ToString::to_string).collect();
                writeln!(t, "facet {}: s·label = ({})", k + 1, shown.join(", ")).unwrap();
            }
            json!({
                "rational": true,
                "is_lattice_polytope": r.is_lattice_polytope,
                "vertices_integral": r.vertices_integral,
                "vertex_denominator": r.vertex_denominator.as_ref().map(bigint_json),
                "minimal_scale": r.minimal_scale.as_ref().map(exact::format_rational),
                "scaled_normals": r.scaled_normals.as_ref().map(|ns| ns
                    .iter()
                    .map(|n| n.iter().map(bigint_json).collect::<Vec<_>>())
                    .collect::<Vec<_>>()),
            })
        }
    };
    Report::new("rationality", t, result, json!({}))
}

fn delzant(poly: &LabelledPolytope, reference: bool) -> Result<Report, CliError> {
    let r = labelling::delzant_check(poly).map_err(|e| CliError::Validation(describe_labelling_error(&e)))?;
    let mut t = String::new();
    writeln!(t, "labels checked: {}", if reference { "reference" } else { "facet" }).unwrap();
    let mut rows = Vec::new();
    for (i, v) in r.vertices.iter().enumerate() {
        writeln!(
            t,
            "vertex {} {}: facets {:?}, |det| = {}",
            i + 1,
            rat_text(&v.vertex),
            one_based(&v.facets),
            v.abs_det
        )
        .unwrap();
        rows.push(json!({
            "vertex": rjson(&v.vertex),
            "facets": one_based(&v.facets),
            "abs_det": bigint_json(&v.abs_det),
        }));
    }
    writeln!(t, "Delzant: {}", if r.is_delzant { "yes" } else { "no" }).unwrap();
    if let Some(c) = &r.caveat {
        writeln!(t, "note: {c}").unwrap();
    }
    let result = json!({
        "labels": if reference { "reference" } else { "facets" },
        "is_delzant": r.is_delzant,
        "vertices": rows,
        "label_lattice_index": bigint_json(&r.label_lattice_index),
        "caveat": r.caveat,
    });
    Ok(Report::new("delzant", t, result, json!({})))
}

fn potential_error(e: PotentialError) -> CliError {
    CliError::Validation(e.to_string())
}

fn model_for(poly: &LabelledPolytope, kind: ModelKind) -> Result<PotentialModel, CliError> {
    match kind {
        ModelKind::Guillemin => Ok(potential::guillemin(poly)),
        ModelKind::Hirzebruch => {
            let c = potential::hirzebruch_scale(poly).ok_or_else(|| {
                CliError::Validation("the closed-form model needs the Hirzebruch quadrilateral with labels c·ν(1)".into())
            })?;
            potential::hirzebruch_closed_form(c).map_err(potential_error)
        }
    }
}

fn check_potential(poly: &LabelledPolytope, kind: ModelKind, samples: usize, cli: &Cli) -> Result<Report, CliError> {
    let model = model_for(poly, kind)?;
    let tol = cli.tol.unwrap_or(1e-6);
    let n = cli.resolution.unwrap_or(50);
    let boundary = potential::boundary_check(&model, poly, samples, tol);
    let grid = potential::interior_grid(poly, n, 1e-3);
    let ext = extremal_affine(poly);
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    let mut s_dev = 0.0f64;
    for x in &grid {
        let s = potential::abreu_scalar(&model, x).map_err(potential_error)?;
        s_min = s_min.min(s);
        s_max = s_max.max(s);
        s_dev = s_dev.max((s - ext.a.eval(x)).abs());
    }
    let einstein = if labelling::monotone_point(poly).is_some() {
        Some(potential::einstein_residual(&model, poly, cli.lambda, None, &grid).map_err(potential_error)?)
    } else {
        None
    };
    let mut t = String::new();
    writeln!(t, "model {}", model.name()).unwrap();
    writeln!(
        t,
        "boundary conditions: {} ({} samples per facet)",
        if boundary.passed { "pass" } else { "FAIL" },
        samples
    )
    .unwrap();
    for f in &boundary.facets {
        writeln!(
            t,
            "  facet {}: |H nu|/|nu| ≤ {}, |dH(nu,nu) - 2nu|/|nu| ≤ {}, tangential eigenvalue ≥ {}",
            f.facet + 1,
            num(f.max_h_nu),
            num(f.max_dh_error),
            num(f.min_tangential_eigenvalue)
        )
        .unwrap();
    }
    for v in &boundary.violations {
        writeln!(t, "  violation: {v}").unwrap();
    }
    writeln!(
        t,
        "scalar curvature on {} grid points: min {}, max {}, max |S - A| = {}",
        grid.len(),
        num(s_min),
        num(s_max),
        num(s_dev)
    )
    .unwrap();
    match &einstein {
        Some(e) => writeln!(
            t,
            "Einstein residual (lambda = {}, a = 0): deviation {}",
            num(cli.lambda),
            num(e.deviation)
        )
        .unwrap(),
        None => writeln!(t, "Einstein residual: labels are not monotone").unwrap(),
    }
    let result = json!({
        "model": model.name(),
        "scale": potential::hirzebruch_scale(poly).filter(|_| kind == ModelKind::Hirzebruch).map(fjson),
        "boundary": {
            "passed": boundary.passed,
            "violations": boundary.violations,
            "facets": boundary.facets.iter().map(|f| json!({
                "facet": f.facet + 1,
                "samples": f.samples,
                "max_h_nu": fjson(f.max_h_nu),
                "max_dh_error": fjson(f.max_dh_error),
                "min_tangential_eigenvalue": fjson(f.min_tangential_eigenvalue),
            })).collect::<Vec<_>>(),
        },
        "scalar_curvature": {
            "grid_points": grid.len(),
            "min": fjson(s_min),
            "max": fjson(s_max),
            "max_deviation_from_extremal": fjson(s_dev),
            "extremal_coefficients": vjson(ext.a.coefficients().as_slice()),
        },
        "einstein": einstein.as_ref().map(|e| json!({
            "lambda": fjson(cli.lambda),
            "lambda_effective": fjson(e.lambda_effective),
            "deviation": fjson(e.deviation),
            "preferred_point": vjson(e.preferred_point.as_slice()),
        })),
    });
    Ok(Report::new(
        "check-potential",
        t,
        result,
        json!({
            "boundary": tol,
            "extrapolation_depths": potential::EXTRAPOLATION_DEPTHS,
            "grid": n,
            "grid_inset": 1e-3,
        }),
    ))
}

/// The solution object embedded in `solve` reports and read back by `compare`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub polytope: PolytopeFile,
    pub lambda: f64,
    pub soliton: Vec<f64>,
    pub field: ChebyshevField,
}

fn solve_report(poly: &LabelledPolytope, r: &SolverResult, lambda: f64) -> (String, Value) {
    let mut t = String::new();
    writeln!(
        t,
        "converged: {} (deviation {} vs tolerance {})",
        if r.converged { "yes" } else { "no" },
        num(r.deviation),
        num(r.tolerance)
    )
    .unwrap();
    writeln!(
        t,
        "iterations {}, continuation {}",
        r.iterations,
        if r.used_continuation { "used" } else { "not needed" }
    )
    .unwrap();
    writeln!(
        t,
        "collocation points {}, unknowns {}, degree {}",
        r.collocation_points, r.unknowns, r.field.degree
    )
    .unwrap();
    writeln!(t, "soliton vector {}", vec_text(r.soliton.as_slice())).unwrap();
    writeln!(t, "preferred point {}", vec_text(r.preferred_point.as_slice())).unwrap();
    let fmax = r.field.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    writeln!(t, "largest correction coefficient {}", num(fmax)).unwrap();
    let solution = SolutionFile {
        polytope: PolytopeFile::from_polytope(poly, None, None),
        lambda,
        soliton: r.soliton.iter().copied().collect(),
        field: r.field.clone(),
    };
    let result = json!({
        "converged": r.converged,
        "deviation": fjson(r.deviation),
        "iterations": r.iterations,
        "used_continuation": r.used_continuation,
        "collocation_points": r.collocation_points,
        "unknowns": r.unknowns,
        "lambda_effective": fjson(r.lambda_effective),
        "preferred_point": vjson(r.preferred_point.as_slice()),
        "soliton": vjson(r.soliton.as_slice()),
        "history": r.history.iter().map(|h| json!({
            "s": fjson(h.s),
            "iteration": h.iteration,
            "deviation": fjson(h.deviation),
            "residual_rms": fjson(h.residual_rms),
            "step": fjson(h.step),
        })).collect::<Vec<_>>(),
        "solution": serde_json::to_value(&solution).expect("serializable"),
    });
    (t, result)
}

fn solve(poly: &LabelledPolytope, zero_soliton: bool, cli: &Cli) -> Result<Report, CliError> {
    let mut config = SolverConfig::default();
    if let Some(r) = cli.resolution {
        config.resolution = r;
    }
    if let Some(t) = cli.tol {
        config.tolerance = t;
    }
    let zero = DVector::zeros(poly.dim());
    let a = zero_soliton.then_some(&zero);
    let tolerances = json!({
        "deviation": config.tolerance,
        "resolution": config.resolution,
        "degree": config.degree(),
        "boundary_margin": config.boundary_margin,
        "rcond": config.rcond,
        "soliton": soliton::DEFAULT_TOL,
    });
    let (result, code) = match mongeampere::solve(poly, cli.lambda, a, &config) {
        Ok(r) => (r, EXIT_OK),
        Err(SolverError::NoConvergence { best }) => (*best, EXIT_NO_CONVERGENCE),
        Err(e @ (SolverError::HessianNotPD { .. } | SolverError::Soliton(_))) => {
            return Err(CliError::NoConvergence(e.to_string()))
        }
        Err(e) => return Err(CliError::Validation(e.to_string())),
    };
    let (t, json) = solve_report(poly, &result, cli.lambda);
    let mut report = Report::new("solve", t, json, tolerances);
    report.exit_code = code;
    Ok(report)
}

fn read_solution(path: &Path) -> Result<SolutionFile, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Syntax {
        path: shown.clone(),
        line: e.line(),
        column: e.column(),
        field: String::new(),
        message: e.to_string(),
    })?;
    let inner = value
        .pointer("/result/solution")
        .cloned()
        .unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| CliError::Invalid {
        path: shown,
        message: format!("not a solver output: {e}"),
    })
}

fn solution_model(path: &Path) -> Result<PotentialModel, CliError> {
    let sol = read_solution(path)?;
    let (poly, _) = sol.polytope.to_polytope().map_err(|message| CliError::Invalid {
        path: path.display().to_string(),
        message,
    })?;
    potential::perturbed(&poly, sol.field).map_err(potential_error)
}

fn compare(
    poly: &LabelledPolytope,
    solution: &Path,
    against: ModelKind,
    reference_solution: Option<&Path>,
    delta: f64,
    cli: &Cli,
) -> Result<Report, CliError> {
    let a = solution_model(solution)?;
    let b = match reference_solution {
        Some(p) => solution_model(p)?,
        None => model_for(poly, against)?,
    };
    if !a.domain().same_shape(poly) {
        return Err(CliError::Validation(CompareError::DomainMismatch.to_string()));
    }
    let n = cli.resolution.unwrap_or(50);
    let grid = potential::interior_grid(poly, n, 1e-3);
    let c = mongeampere::compare(&a, &b, &grid, delta).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut t = String::new();
    writeln!(t, "points used {} (all L_k ≥ {})", c.points_used, num(delta)).unwrap();
    writeln!(t, "H relative difference: max {}, mean {}", num(c.h_max_relative), num(c.h_mean_relative)).unwrap();
    writeln!(t, "u difference after affine gauge: {}", num(c.u_gauge_max)).unwrap();
    let result = json!({
        "reference": reference_solution.map_or(b.name().to_string(), |p| p.display().to_string()),
        "points_used": c.points_used,
        "h_max_relative": fjson(c.h_max_relative),
        "h_mean_relative": fjson(c.h_mean_relative),
        "u_gauge_max": fjson(c.u_gauge_max),
        "gauge": {"constant": fjson(c.gauge.0), "linear": vjson(&c.gauge.1)},
    });
    Ok(Report::new("compare", t, result, json!({"delta": delta, "grid": n, "grid_inset": 1e-3})))
}
