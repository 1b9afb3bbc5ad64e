//! Tensor Gauss–Jacobi cubature on the simplex.
//!
//! The rule is built recursively in radial-angular form: `x = r theta` with
//! `r = |x|` and `theta` on the face `|theta| = 1`. Under this split the
//! Jacobi weight factors into a one-dimensional weight in `r` times the same
//! kind of weight on the lower-dimensional face, and a factor `|x|^s` only
//! shifts the radial exponent.

use crate::error::{Error, Result};
use crate::jacobi::{nodes_for_degree, GaussRule};
use crate::par::pairwise_sum;
use crate::poly::{monomials, JacobiParams, Polynomial};

use super::SimplexPoint;

/// Largest polynomial degree a cubature may be built for.
pub const MAX_CUBATURE_DEGREE: usize = 200;

/// Positive-weight cubature for `b_kappa W_kappa(x) dx`, possibly times a
/// radial or axis factor fixed at construction.
#[derive(Debug, Clone)]
pub struct Cubature {
    pub nodes: Vec<SimplexPoint>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl Cubature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, SimplexPoint::dim)
    }

    pub fn integrate<F: Fn(&SimplexPoint) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }

    /// Integral of a polynomial (exact when its degree is within `exact_degree`).
    pub fn integrate_poly(&self, f: &Polynomial) -> f64 {
        let set = monomials(f.dim(), f.degree_bound());
        let mut buf = vec![0.0; set.len()];
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                set.fill_values(x.coords(), &mut buf);
                w * f.eval_with(&buf)
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// Values of `f` at every node.
    pub fn values(&self, f: &Polynomial) -> Vec<f64> {
        let set = monomials(f.dim(), f.degree_bound());
        let mut buf = vec![0.0; set.len()];
        self.nodes
            .iter()
            .map(|x| {
                set.fill_values(x.coords(), &mut buf);
                f.eval_with(&buf)
            })
            .collect()
    }
}

/// Rule for `f -> b_kappa int f(x) |x|^shift W_kappa(x) dx`, exact for
/// polynomial `f` of total degree `<= exact_degree`.
pub fn build_cubature(kappa: &JacobiParams, exact_degree: usize, radial_shift: f64) -> Result<Cubature> {
    if exact_degree > MAX_CUBATURE_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: exact_degree, max: MAX_CUBATURE_DEGREE });
    }
    let count = nodes_for_degree(exact_degree);
    let (points, weights) = raw_rule(kappa.kappa(), count, radial_shift)?;
    let b = kappa.b();
    let nodes = points.into_iter().map(point_from_coords).collect();
    Ok(Cubature { nodes, weights: weights.into_iter().map(|w| w * b).collect(), exact_degree })
}

/// Rule for `f -> b_kappa int f(x) (1 - x_axis)^shift W_kappa(x) dx`.
///
/// Swapping the barycentric roles of `x_axis` and the slack is a
/// volume-preserving affine map under which `1 - x_axis` becomes `|y|`.
pub fn build_axis_cubature(
    kappa: &JacobiParams,
    exact_degree: usize,
    axis: usize,
    shift: f64,
) -> Result<Cubature> {
    let d = kappa.dim();
    if axis >= d {
        return Err(Error::AxisOutOfRange { axis, dim: d });
    }
    let swapped = kappa.swapped(axis, d);
    let base = build_cubature(&swapped, exact_degree, shift)?;
    let nodes = base
        .nodes
        .iter()
        .map(|y| {
            let mut b = y.barycentric();
            b.swap(axis, d);
            point_from_coords(b[..d].to_vec())
        })
        .collect();
    Ok(Cubature { nodes, weights: base.weights, exact_degree })
}

fn point_from_coords(coords: Vec<f64>) -> SimplexPoint {
    let clipped: Vec<f64> = coords.into_iter().map(|c| c.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    let scale = if sum > 1.0 { 1.0 / sum } else { 1.0 };
    SimplexPoint::new(clipped.into_iter().map(|c| c * scale).collect())
        .expect("cubature node inside the simplex")
}

// Nodes and weights for the unnormalized measure
// |x|^shift prod_{i<m} x_i^{k_i} (1-|x|)^{k_m} dx on the m-simplex, m = k.len()-1.
fn raw_rule(k: &[f64], count: usize, shift: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let m = k.len() - 1;
    if m == 1 {
        let g = GaussRule::unit_interval(count, k[0] + shift, k[1])
            .map_err(|e| invalid_exponent(e, k, shift))?;
        return Ok((g.nodes.iter().map(|r| vec![*r]).collect(), g.weights));
    }
    let radial_exp = k[..m].iter().sum::<f64>() + shift + (m - 1) as f64;
    let radial =
        GaussRule::unit_interval(count, radial_exp, k[m]).map_err(|e| invalid_exponent(e, k, shift))?;
    let (face_points, face_weights) = raw_rule(&k[..m], count, 0.0)?;
    let mut points = Vec::with_capacity(radial.len() * face_points.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
        for (theta, wt) in face_points.iter().zip(&face_weights) {
            let last = 1.0 - theta.iter().sum::<f64>();
            let mut x: Vec<f64> = theta.iter().map(|t| r * t).collect();
            x.push(r * last.max(0.0));
            points.push(x);
            weights.push(wr * wt);
        }
    }
    Ok((points, weights))
}

fn invalid_exponent(err: Error, k: &[f64], shift: f64) -> Error {
    Error::InvalidParameter(format!("cubature exponents kappa={k:?}, shift={shift}: {err}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::dirichlet_moment;

    #[test]
    fn constant_and_linear_examples() {
        for kappa in [vec![0.0, 0.0, 0.0], vec![1.5, 0.3, 2.0], vec![-0.5, 0.0, 4.0, 1.0]] {
            let k = JacobiParams::new(kappa).unwrap();
            let c = build_cubature(&k, 4, 0.0).unwrap();
            assert!((c.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
            assert!(c.weights.iter().all(|w| *w > 0.0));
        }
        let k = JacobiParams::lebesgue(2);
        let c = build_cubature(&k, 3, 0.0).unwrap();
        assert!((c.integrate(|x| x.coords()[0]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn radial_shift_cancels() {
        let k = JacobiParams::lebesgue(2);
        let c = build_cubature(&k, 2, -1.0).unwrap();
        let v = c.integrate(|x| x.coords().iter().sum::<f64>());
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_for_slack_moments() {
        let k = JacobiParams::new(vec![0.5, 1.0, 0.0, 2.3]).unwrap();
        let c = build_cubature(&k, 9, 0.0).unwrap();
        for alpha in [[2u32, 1, 3, 3], [0, 0, 0, 9], [4, 0, 5, 0]] {
            let v = c.integrate(|x| (0..4).map(|i| x.bary(i).powi(alpha[i] as i32)).product());
            let m = dirichlet_moment(&alpha, &k).unwrap();
            assert!((v - m).abs() <= 1e-12 * m.max(1e-3), "{alpha:?}");
        }
    }

    #[test]
    fn axis_rule_matches_moments() {
        // (1 - x_1)^2 times the Lebesgue measure, expanded by hand
        let k = JacobiParams::new(vec![1.0, 0.0, 0.5]).unwrap();
        let c = build_axis_cubature(&k, 4, 0, 2.0).unwrap();
        let v = c.integrate(|x| x.coords()[1]);
        let m = |a: [u32; 3]| dirichlet_moment(&a, &k).unwrap();
        let expected = m([0, 1, 0]) - 2.0 * m([1, 1, 0]) + m([2, 1, 0]);
        assert!((v - expected).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_exponents() {
        let k = JacobiParams::new(vec![-0.5, -0.5, 0.0]).unwrap();
        assert!(build_cubature(&k, 2, -1.0).is_err());
        assert!(build_cubature(&JacobiParams::lebesgue(2), 400, 0.0).is_err());
    }
}
