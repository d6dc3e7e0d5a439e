//! Random polytope generators shared by the integration tests.

#![allow(dead_code)]

use abreu_lab::polytope::{HalfSpace, LabelledPolytope};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex polygon inscribed in a circle, from cumulative angle gaps.
///
/// Gaps are normalized to sum to 2π; every gap must stay below π for the
/// circle's center to be interior.
pub fn polygon_from_gaps(gaps: &[f64], center: [f64; 2], radius: f64, phase: f64) -> LabelledPolytope {
    let total: f64 = gaps.iter().sum();
    let mut angle = phase;
    let points: Vec<DVector<f64>> = gaps
        .iter()
        .map(|g| {
            let p = DVector::from_column_slice(&[center[0] + radius * angle.cos(), center[1] + radius * angle.sin()]);
            angle += g / total * std::f64::consts::TAU;
            p
        })
        .collect();
    LabelledPolytope::from_vertices(2, &points).expect("cyclic polygon")
}

/// A random inscribed polygon with 3 to 8 vertices and well-separated angles.
pub fn random_polygon(rng: &mut impl Rng) -> LabelledPolytope {
    loop {
        let m = rng.random_range(3..=8);
        let gaps: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..1.0)).collect();
        let total: f64 = gaps.iter().sum();
        if gaps.iter().any(|g| g / total * std::f64::consts::TAU >= 0.9 * std::f64::consts::PI) {
            continue;
        }
        let center = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let radius = rng.random_range(0.5..3.0);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        return polygon_from_gaps(&gaps, center, radius, phase);
    }
}

/// A random simple 3-polytope circumscribed about a ball, from random unit normals.
pub fn random_polytope3(rng: &mut impl Rng) -> LabelledPolytope {
    loop {
        let m = rng.random_range(5..=10);
        let center = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let hs: Vec<HalfSpace> = (0..m)
            .map(|_| {
                let v = loop {
                    let v: DVector<f64> = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
                    let n = v.norm();
                    if n > 0.2 && n <= 1.0 {
                        break v / n;
                    }
                };
                let offset = 1.0 - v.dot(&center);
                HalfSpace::new(v.iter().copied().collect::<Vec<_>>(), offset)
            })
            .collect();
        if let Ok(p) = LabelledPolytope::from_halfspaces(3, hs) {
            return p;
        }
    }
}

/// Independent positive factors in `[lo, hi]`, one per facet.
pub fn random_scales(rng: &mut impl Rng, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
