//! Labelled convex polytopes and the toric Kähler geometry attached to them.
//!
//! The crate is organised bottom-up:
//!
//! * [`polytope`] — half-space/vertex representations, incidences, triangulations;
//! * [`measure`] — exact polynomial moments, boundary measures and weighted quadrature;
//! * [`labelling`] — monotone labellings, the Einstein normalization, lattice checks
//!   and cone-angle classification;
//! * [`extremal`] — the extremal affine function and the barycenter criterion;
//! * [`soliton`] — the Kähler–Ricci soliton vector;
//! * [`potential`] — symplectic potentials, scalar curvature, boundary audits and
//!   Einstein residuals;
//! * [`mongeampere`] — a collocation solver for the two-dimensional toric
//!   Kähler–Einstein / soliton equation;
//! * [`cli`] — the command-line front end.

pub mod chebyshev;
pub mod cli;
pub mod exact;
pub mod extremal;
pub mod fixtures;
pub mod jet;
pub mod labelling;
pub mod measure;
pub mod mongeampere;
pub mod polytope;
pub mod potential;
pub mod soliton;

pub use extremal::{barycenter_criterion, extremal_affine, BarycenterReport, ExtremalResult};
pub use labelling::{
    cone_angles, cone_labels, delzant_check, einstein_normalize, monotone_point, preferred_point_formula,
    rationality, MonotoneCertificate, RationalityReport, SingularityClass, SingularityReport,
};
pub use measure::{AffineFunction, MomentData, Polynomial2};
pub use mongeampere::{compare, solve, Comparison, SolverConfig, SolverError, SolverResult};
pub use polytope::{HalfSpace, LabelledPolytope, PolytopeError, Simplex};
pub use potential::{MetricSample, PotentialModel};
pub use soliton::{soliton_residual, soliton_vector, SolitonVector};
