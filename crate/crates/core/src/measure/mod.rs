//! Geometry and measure on the simplex: points, the intrinsic distance,
//! Dirichlet moments, cubature, metric balls and separated sets.
//!
//! The map `x -> u = (sqrt(x_1), ..., sqrt(x_{d+1}))` sends the simplex onto
//! the closed positive orthant of the unit sphere `S^d`, and the intrinsic
//! distance is the geodesic angle between images. Ball computations live on
//! the sphere side of that map.

mod cubature;
mod doubling;
mod moments;
mod separated;
mod sphere;
mod weight;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::JacobiParams;

pub use cubature::{build_axis_cubature, build_cubature, Cubature};
pub use doubling::{ball_measure, ball_measure_with, estimate_doubling, DoublingEstimate};
pub(crate) use doubling::fit_slope;
pub use moments::{dirichlet_moment, inner_product, MomentTable};
pub use separated::{default_probe_density, probe_grid, separated_set, ProbeGrid, SeparatedSet};
pub use sphere::{ball_sample_points, integrate_ball, BallQuadrature};
pub use weight::{DoublingWeightSpec, SmoothFactor, WeightKind};

/// Snapping tolerance for points on the closed simplex.
pub const SNAP_TOLERANCE: f64 = 1e-14;

/// A point of the closed simplex with its cached slack `1 - |x|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
    slack: f64,
}

impl SimplexPoint {
    /// Validates and snaps `coords` onto the closed simplex.
    pub fn new(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("simplex points need d >= 1".into()));
        }
        for c in &mut coords {
            if !c.is_finite() || *c < -SNAP_TOLERANCE {
                return Err(Error::InvalidParameter(format!("coordinate {c} outside the simplex")));
            }
            *c = c.max(0.0);
        }
        let sum: f64 = coords.iter().sum();
        if sum > 1.0 + SNAP_TOLERANCE {
            return Err(Error::InvalidParameter(format!("|x| = {sum} exceeds 1")));
        }
        Ok(Self { coords, slack: (1.0 - sum).max(0.0) })
    }

    /// Builds from the `d+1` barycentric tuple; the last entry is recomputed.
    pub fn from_barycentric(bary: &[f64]) -> Result<Self> {
        if bary.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: bary.len() });
        }
        Self::new(bary[..bary.len() - 1].to_vec())
    }

    /// Image of a point `u` of the positive orthant of the unit sphere.
    pub fn from_sphere(u: &[f64]) -> Self {
        let norm2: f64 = u.iter().map(|v| v * v).sum();
        let coords: Vec<f64> = u[..u.len() - 1].iter().map(|v| v * v / norm2).collect();
        let sum: f64 = coords.iter().sum();
        Self { coords, slack: (1.0 - sum).max(0.0) }
    }

    /// Vertex `i` (0-based); `i = d` is the origin.
    pub fn vertex(d: usize, i: usize) -> Self {
        let mut coords = vec![0.0; d];
        if i < d {
            coords[i] = 1.0;
        }
        let slack = if i < d { 0.0 } else { 1.0 };
        Self { coords, slack }
    }

    /// Barycenter `(1/(d+1), ..., 1/(d+1))`.
    pub fn centroid(d: usize) -> Self {
        let c = 1.0 / (d as f64 + 1.0);
        Self { coords: vec![c; d], slack: 1.0 - d as f64 * c }
    }

    /// Uniform random point (Lebesgue measure) via normalized exponentials.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let e: Vec<f64> = (0..=d).map(|_| Exp1.sample(rng)).collect();
        Self::normalized(&e)
    }

    /// Random point distributed as `b_kappa W_kappa(x) dx` (a Dirichlet law).
    pub fn random_jacobi<R: Rng + ?Sized>(kappa: &JacobiParams, rng: &mut R) -> Self {
        let g: Vec<f64> = kappa
            .kappa()
            .iter()
            .map(|k| Gamma::new(k + 1.0, 1.0).expect("shape > 0").sample(rng))
            .collect();
        Self::normalized(&g)
    }

    fn normalized(bary: &[f64]) -> Self {
        let total: f64 = bary.iter().sum();
        let coords: Vec<f64> = bary[..bary.len() - 1].iter().map(|v| v / total).collect();
        let sum: f64 = coords.iter().sum();
        Self { coords, slack: (1.0 - sum).max(0.0) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    /// Barycentric coordinate `i` (0-based, `i = d` is the slack).
    pub fn bary(&self, i: usize) -> f64 {
        if i == self.coords.len() {
            self.slack
        } else {
            self.coords[i]
        }
    }

    /// The `d+1` barycentric tuple.
    pub fn barycentric(&self) -> Vec<f64> {
        let mut b = self.coords.clone();
        b.push(self.slack);
        b
    }

    /// Square roots of the barycentric tuple, a unit vector in `R^{d+1}`.
    pub fn sphere(&self) -> Vec<f64> {
        self.coords.iter().chain(std::iter::once(&self.slack)).map(|v| v.sqrt()).collect()
    }

    /// Smallest barycentric coordinate.
    pub fn min_barycentric(&self) -> f64 {
        self.coords.iter().fold(self.slack, |m, &c| m.min(c))
    }

    /// Distance from the boundary of the simplex in the intrinsic metric.
    pub fn boundary_distance(&self) -> f64 {
        self.min_barycentric().sqrt().min(1.0).asin()
    }
}

/// Intrinsic distance `arccos(sum_i sqrt(x_i y_i))` over barycentric
/// coordinates, evaluated as `2 asin(|sqrt x - sqrt y| / 2)`.
pub fn distance(x: &SimplexPoint, y: &SimplexPoint) -> f64 {
    let chord2: f64 = (0..=x.dim())
        .map(|i| {
            let t = x.bary(i).sqrt() - y.bary(i).sqrt();
            t * t
        })
        .sum();
    chord_to_angle(chord2)
}

/// Distance between two barycentric tuples.
pub fn distance_bary(x: &[f64], y: &[f64]) -> f64 {
    let chord2: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let t = a.max(0.0).sqrt() - b.max(0.0).sqrt();
            t * t
        })
        .sum();
    chord_to_angle(chord2)
}

/// Geodesic angle between unit vectors.
pub fn sphere_distance(u: &[f64], v: &[f64]) -> f64 {
    let chord2: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| {
            let t = a - b;
            t * t
        })
        .sum();
    chord_to_angle(chord2)
}

fn chord_to_angle(chord2: f64) -> f64 {
    let half = (chord2.sqrt() * 0.5).min(1.0);
    (2.0 * half.asin()).min(std::f64::consts::FRAC_PI_2)
}
