//! Probe grids and greedy maximal separated sets in the intrinsic metric.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{sphere_distance, SimplexPoint};

/// Barycentric lattice `{k / resolution : k in Z^{d+1}_{>=0}, |k| = resolution}`
/// in lexicographic order of `k`.
pub(crate) fn lattice(d: usize, resolution: usize) -> Vec<SimplexPoint> {
    compositions(d + 1, resolution)
        .into_iter()
        .map(|k| {
            let coords = k[..d].iter().map(|v| *v as f64 / resolution as f64).collect();
            SimplexPoint::new(coords).expect("lattice point")
        })
        .collect()
}

fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            let mut k = prefix.clone();
            k.push(total);
            out.push(k);
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(parts - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Probe points `u = k / |k|_2` on the positive orthant of `S^d`, for
/// `k in Z^{d+1}_{>=0}` with `|k|_1 = resolution`.
///
/// Normalizing lattice points onto the sphere keeps the spacing uniform in the
/// intrinsic metric up to a factor `sqrt(d+1)`, including near the faces.
#[derive(Debug, Clone)]
pub struct ProbeGrid {
    pub dim: usize,
    pub resolution: usize,
    /// Sphere coordinates, `d+1` per point, lexicographic in `k`.
    pub sphere: Vec<Vec<f64>>,
    /// Largest distance between lattice neighbours `k` and `k + e_i - e_j`.
    pub spacing: f64,
}

impl ProbeGrid {
    pub fn len(&self) -> usize {
        self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sphere.is_empty()
    }

    pub fn points(&self) -> Vec<SimplexPoint> {
        self.sphere.iter().map(|u| SimplexPoint::from_sphere(u)).collect()
    }
}

pub fn probe_grid(d: usize, resolution: usize) -> ProbeGrid {
    let comps = compositions(d + 1, resolution.max(1));
    let to_sphere = |k: &[usize]| {
        let n = k.iter().map(|v| (*v * *v) as f64).sum::<f64>().sqrt();
        k.iter().map(|v| *v as f64 / n).collect::<Vec<f64>>()
    };
    let sphere: Vec<Vec<f64>> = comps.iter().map(|k| to_sphere(k)).collect();
    let mut spacing: f64 = 0.0;
    let mut nb = vec![0usize; d + 1];
    for (k, u) in comps.iter().zip(&sphere) {
        for j in 0..=d {
            if k[j] == 0 {
                continue;
            }
            for i in 0..=d {
                if i == j {
                    continue;
                }
                nb.copy_from_slice(k);
                nb[j] -= 1;
                nb[i] += 1;
                spacing = spacing.max(sphere_distance(u, &to_sphere(&nb)));
            }
        }
    }
    ProbeGrid { dim: d, resolution: resolution.max(1), sphere, spacing }
}

/// A probe resolution whose spacing is comfortably below `epsilon / 4`.
pub fn default_probe_density(d: usize, epsilon: f64) -> usize {
    // neighbour angle <= sqrt(2) / |k|_2 <= sqrt(2 (d+1)) / resolution
    ((4.0 * (2.0 * (d as f64 + 1.0)).sqrt() / epsilon).ceil() as usize).max(2)
}

/// Set of points with pairwise intrinsic distance at least `epsilon`.
#[derive(Debug, Clone)]
pub struct SeparatedSet {
    pub epsilon: f64,
    pub points: Vec<SimplexPoint>,
    pub maximal: bool,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest pairwise distance (infinite for fewer than two points).
    pub fn min_separation(&self) -> f64 {
        let u: Vec<Vec<f64>> = self.points.iter().map(SimplexPoint::sphere).collect();
        let mut best = f64::INFINITY;
        for i in 0..u.len() {
            for j in 0..i {
                best = best.min(sphere_distance(&u[i], &u[j]));
            }
        }
        best
    }
}

// Relative slack on the separation test, so exact ties such as vertex pairs
// at distance pi/2 count as separated.
const TIE_SLACK: f64 = 1e-12;

/// Greedy lexicographic maximal `epsilon`-separated subset of the probe grid
/// of the given resolution.
pub fn separated_set(d: usize, epsilon: f64, probe_density: usize) -> Result<SeparatedSet> {
    if !(epsilon > 0.0 && epsilon < std::f64::consts::FRAC_PI_2 + TIE_SLACK) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, pi/2)")));
    }
    let grid = probe_grid(d, probe_density);
    let limit = epsilon / 4.0;
    if grid.spacing > limit {
        return Err(Error::GridTooCoarse { spacing: grid.spacing, limit });
    }
    let threshold = epsilon * (1.0 - TIE_SLACK);
    let mut hash = SphereHash::new(d, epsilon);
    let mut chosen: Vec<usize> = Vec::new();
    for (idx, u) in grid.sphere.iter().enumerate() {
        if hash.nearest_within(u, threshold, &grid.sphere).is_none() {
            hash.insert(u, idx);
            chosen.push(idx);
        }
    }
    let maximal = grid
        .sphere
        .iter()
        .all(|u| hash.nearest_within(u, epsilon, &grid.sphere).is_some());
    let points = chosen.iter().map(|&i| SimplexPoint::from_sphere(&grid.sphere[i])).collect();
    Ok(SeparatedSet { epsilon, points, maximal })
}

/// Uniform hash of sphere points in `R^{d+1}` with cell size equal to the
/// chord of the query radius.
struct SphereHash {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl SphereHash {
    fn new(d: usize, epsilon: f64) -> Self {
        let cell = 2.0 * (epsilon / 2.0).sin();
        Self { cell, dim: d + 1, buckets: HashMap::new() }
    }

    fn key(&self, u: &[f64]) -> Vec<i64> {
        u.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, u: &[f64], idx: usize) {
        let key = self.key(u);
        self.buckets.entry(key).or_default().push(idx);
    }

    /// Some member within distance `< radius` (`radius <= epsilon`), if any.
    fn nearest_within(&self, u: &[f64], radius: f64, all: &[Vec<f64>]) -> Option<usize> {
        let base = self.key(u);
        let mut offset = vec![-1i64; self.dim];
        let mut key = base.clone();
        loop {
            for ((k, b), o) in key.iter_mut().zip(&base).zip(&offset) {
                *k = b + o;
            }
            if let Some(members) = self.buckets.get(&key) {
                if let Some(&m) = members.iter().find(|&&m| sphere_distance(u, &all[m]) < radius) {
                    return Some(m);
                }
            }
            // odometer over {-1, 0, 1}^{d+1}
            let mut pos = 0;
            loop {
                if pos == self.dim {
                    return None;
                }
                offset[pos] += 1;
                if offset[pos] <= 1 {
                    break;
                }
                offset[pos] = -1;
                pos += 1;
            }
        }
    }
}
