//! Reference polytopes used by the tests, the CLI `examples` command and the docs.
//!
//! Every fixture is built from exact rational labels so that lattice queries
//! work on them directly.

use crate::exact::{self, Rational};
use crate::polytope::{ExactHalfSpace, LabelledPolytope};

fn plane(normal: &[&str], offset: &str) -> ExactHalfSpace {
    let q = |s: &str| exact::parse_rational(s).expect("fixture literal");
    ExactHalfSpace {
        normal: normal.iter().map(|s| q(s)).collect(),
        offset: q(offset),
    }
}

fn build(dim: usize, planes: Vec<ExactHalfSpace>) -> LabelledPolytope {
    LabelledPolytope::from_exact_halfspaces(dim, planes).expect("fixture is a valid polytope")
}

/// `[-1, 1]²` with unit normals, facets ordered `x₁ ≥ −1, x₁ ≤ 1, x₂ ≥ −1, x₂ ≤ 1`.
pub fn square() -> LabelledPolytope {
    build(2, square_planes())
}

pub(crate) fn square_planes() -> Vec<ExactHalfSpace> {
    vec![
        plane(&["1", "0"], "1"),
        plane(&["-1", "0"], "1"),
        plane(&["0", "1"], "1"),
        plane(&["0", "-1"], "1"),
    ]
}

/// The unit `n`-simplex `{x_i > 0, Σx_i < 1}` with labels `e₁, …, e_n, −Σe_i`.
pub fn simplex(n: usize) -> LabelledPolytope {
    let mut planes = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut normal = vec![exact::from_i64(0); n];
        normal[i] = exact::from_i64(1);
        planes.push(ExactHalfSpace {
            normal,
            offset: exact::from_i64(0),
        });
    }
    planes.push(ExactHalfSpace {
        normal: vec![exact::from_i64(-1); n],
        offset: exact::from_i64(1),
    });
    build(n, planes)
}

/// The quadrilateral with vertices `(1,0), (1,1), (2,2), (2,0)` carrying the
/// labels of the Kähler–Einstein metric on the first Hirzebruch surface,
/// scaled by `c`:
/// `c·(7/5, 0)`, `c·(−7/4, 0)`, `c·(0, 1)`, `c·(1, −1)`.
pub fn hirzebruch(c: &Rational) -> LabelledPolytope {
    build(2, hirzebruch_planes().iter().map(|p| p.scaled(c)).collect())
}

pub fn hirzebruch_unit() -> LabelledPolytope {
    hirzebruch(&exact::from_i64(1))
}

fn hirzebruch_planes() -> Vec<ExactHalfSpace> {
    vec![
        plane(&["7/5", "0"], "-7/5"),
        plane(&["-7/4", "0"], "7/2"),
        plane(&["0", "1"], "0"),
        plane(&["1", "-1"], "0"),
    ]
}

/// Same quadrilateral with its primitive lattice normals, the Delzant labels
/// `(1, 0), (−1, 0), (0, 1), (1, −1)`.
pub fn hirzebruch_reference() -> LabelledPolytope {
    build(
        2,
        vec![
            plane(&["1", "0"], "-1"),
            plane(&["-1", "0"], "2"),
            plane(&["0", "1"], "0"),
            plane(&["1", "-1"], "0"),
        ],
    )
}

/// `[-1, 3] × [-1, 1]` labelled so that every defining function equals 1 at the origin.
pub fn rectangle() -> LabelledPolytope {
    build(
        2,
        vec![
            plane(&["1", "0"], "1"),
            plane(&["-1/3", "0"], "1"),
            plane(&["0", "1"], "1"),
            plane(&["0", "-1"], "1"),
        ],
    )
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 4] = ["square", "simplex", "hirzebruch", "rectangle"];

/// A fixture and, for the Hirzebruch quadrilateral, its reference labels.
pub fn by_name(name: &str) -> Option<(LabelledPolytope, Option<LabelledPolytope>)> {
    match name {
        "square" => Some((square(), None)),
        "simplex" => Some((simplex(2), None)),
        "hirzebruch" => Some((hirzebruch_unit(), Some(hirzebruch_reference()))),
        "rectangle" => Some((rectangle(), None)),
        _ => None,
    }
}
