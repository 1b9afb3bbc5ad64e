//! Integration over intrinsic balls through the square-root map onto the
//! positive orthant of `S^d`.
//!
//! A ball `B(x, r)` is the image of the spherical cap of angular radius `r`
//! around `u = sqrt(x)`, cut by the orthant, and `dx = 2^d prod_i u_i dsigma(u)`.
//! The cap is parametrized in geodesic polar coordinates
//! `v = cos(theta) u + sin(theta) omega`, `dsigma = sin^{d-1}(theta) dtheta domega`.
//! For `d = 2` the admissible arc of `omega` is computed exactly; in higher
//! dimension a fixed direction set is used with an indicator.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::jacobi::GaussRule;

use super::SimplexPoint;

/// Resolution of ball integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallQuadrature {
    /// Uniform radial panels (further split at boundary crossings and grading points).
    pub radial_panels: usize,
    /// Gauss–Legendre points per radial panel.
    pub radial_points: usize,
    /// Angular resolution: points on a full circle (d = 2) or directions per
    /// unit solid angle scale (d >= 3).
    pub angular_points: usize,
}

impl Default for BallQuadrature {
    fn default() -> Self {
        Self { radial_panels: 4, radial_points: 8, angular_points: 32 }
    }
}

impl BallQuadrature {
    /// Doubles every resolution parameter.
    pub fn refined(self) -> Self {
        Self {
            radial_panels: 2 * self.radial_panels,
            radial_points: self.radial_points,
            angular_points: 2 * self.angular_points,
        }
    }
}

/// `int_{B(center, r)} f(y, d(center, y)) dy` for a density `f` given on
/// barycentric coordinates.
///
/// `grade` adds geometric radial breakpoints `grade, 2 grade, ...` for
/// integrands concentrated at scale `grade` around the center.
pub fn integrate_ball<F>(center: &SimplexPoint, r: f64, grade: Option<f64>, quad: &BallQuadrature, f: F) -> f64
where
    F: Fn(&[f64], f64) -> f64,
{
    let u = center.sphere();
    let d = center.dim();
    let r = r.min(PI / 2.0);
    if r <= 0.0 {
        return 0.0;
    }
    let breaks = radial_breaks(&u, r, grade, quad.radial_panels);
    let gl = GaussRule::legendre(quad.radial_points).expect("legendre rule");
    let frame = tangent_frame(&u);
    let directions = if d == 2 { Vec::new() } else { direction_set(d, quad.angular_points) };
    let jac = 2f64.powi(d as i32);

    let mut v = vec![0.0; d + 1];
    let mut bary = vec![0.0; d + 1];
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        for (t, wt) in gl.nodes.iter().zip(&gl.weights) {
            let theta = a + half * (t + 1.0);
            let (s, c) = theta.sin_cos();
            let mut density = |omega: &[f64]| -> f64 {
                let mut prod = jac;
                for i in 0..=d {
                    v[i] = c * u[i] + s * omega[i];
                    if v[i] < 0.0 {
                        return 0.0;
                    }
                    prod *= v[i];
                    bary[i] = v[i] * v[i];
                }
                prod * f(&bary, theta)
            };
            let shell = if d == 2 {
                circle_integral(&u, &frame, c, s, quad.angular_points, &mut density)
            } else {
                let scale = sphere_area(d - 1) / directions.len() as f64;
                let mut omega = vec![0.0; d + 1];
                let mut acc = 0.0;
                for dir in &directions {
                    for (k, o) in omega.iter_mut().enumerate() {
                        *o = frame.iter().zip(dir).map(|(e, a)| a * e[k]).sum();
                    }
                    acc += density(&omega);
                }
                acc * scale
            };
            total += wt * half * s.powi(d as i32 - 1) * shell;
        }
    }
    total
}

/// Points of `B(center, r)` on a polar grid, including the center.
pub fn ball_sample_points(center: &SimplexPoint, r: f64, radial: usize, angular: usize) -> Vec<Vec<f64>> {
    let u = center.sphere();
    let d = center.dim();
    let frame = tangent_frame(&u);
    let directions: Vec<Vec<f64>> = if d == 2 {
        (0..angular)
            .map(|k| {
                let phi = TAU * k as f64 / angular as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect()
    } else {
        direction_set(d, angular)
    };
    let mut out = vec![center.barycentric()];
    for step in 1..=radial {
        let theta = r.min(PI / 2.0) * step as f64 / radial as f64;
        let (s, c) = theta.sin_cos();
        for dir in &directions {
            let v: Vec<f64> = (0..=d)
                .map(|k| c * u[k] + s * frame.iter().zip(dir).map(|(e, a)| a * e[k]).sum::<f64>())
                .collect();
            if v.iter().all(|x| *x >= 0.0) {
                out.push(SimplexPoint::from_sphere(&v).barycentric());
            }
        }
    }
    out
}

fn radial_breaks(u: &[f64], r: f64, grade: Option<f64>, panels: usize) -> Vec<f64> {
    let mut breaks: Vec<f64> = (0..=panels.max(1)).map(|k| r * k as f64 / panels.max(1) as f64).collect();
    // angles at which the cap starts to cross a face v_i = 0
    breaks.extend(u.iter().map(|ui| ui.min(1.0).asin()).filter(|t| *t > 0.0 && *t < r));
    if let Some(g) = grade.filter(|g| *g > 0.0) {
        let mut t = g / 4.0;
        while t < r {
            breaks.push(t);
            t *= 2.0;
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * r);
    breaks
}

/// Orthonormal basis of the tangent space `u^perp` by Gram–Schmidt on the
/// coordinate vectors, skipping the one most aligned with `u`.
fn tangent_frame(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let skip = (0..n)
        .max_by(|a, b| u[*a].abs().partial_cmp(&u[*b].abs()).expect("finite"))
        .expect("nonempty");
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in (0..n).filter(|k| *k != skip) {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        for _ in 0..2 {
            let p: f64 = e.iter().zip(u).map(|(a, b)| a * b).sum();
            for (a, b) in e.iter_mut().zip(u) {
                *a -= p * b;
            }
            for f in &frame {
                let p: f64 = e.iter().zip(f).map(|(a, b)| a * b).sum();
                for (a, b) in e.iter_mut().zip(f) {
                    *a -= p * b;
                }
            }
        }
        let norm = e.iter().map(|a| a * a).sum::<f64>().sqrt();
        frame.push(e.into_iter().map(|a| a / norm).collect());
    }
    frame
}

/// `int_0^{2 pi} g(cos(phi) e1 + sin(phi) e2) dphi` restricted to the arcs
/// where every coordinate of `c u + s omega` is nonnegative.
fn circle_integral<G: FnMut(&[f64]) -> f64>(
    u: &[f64],
    frame: &[Vec<f64>],
    c: f64,
    s: f64,
    points: usize,
    g: &mut G,
) -> f64 {
    let (e1, e2) = (&frame[0], &frame[1]);
    let mut arcs = vec![(0.0, TAU)];
    let mut full = true;
    for i in 0..u.len() {
        let (a, b, c0) = (s * e1[i], s * e2[i], c * u[i]);
        let amp = a.hypot(b);
        if c0 >= amp {
            continue;
        }
        full = false;
        if c0 <= -amp {
            return 0.0;
        }
        let psi = b.atan2(a);
        let h = (-c0 / amp).clamp(-1.0, 1.0).acos();
        let lo = (psi - h).rem_euclid(TAU);
        let hi = lo + 2.0 * h;
        let feasible =
            if hi <= TAU { vec![(lo, hi)] } else { vec![(lo, TAU), (0.0, hi - TAU)] };
        arcs = intersect(&arcs, &feasible);
        if arcs.is_empty() {
            return 0.0;
        }
    }
    let mut omega = vec![0.0; u.len()];
    let mut eval = |phi: f64, omega: &mut Vec<f64>| {
        let (sp, cp) = phi.sin_cos();
        for k in 0..omega.len() {
            omega[k] = cp * e1[k] + sp * e2[k];
        }
        g(omega)
    };
    if full {
        // periodic trapezoid rule
        let h = TAU / points as f64;
        return (0..points).map(|k| eval(h * k as f64, &mut omega)).sum::<f64>() * h;
    }
    let mut total = 0.0;
    for (lo, hi) in arcs {
        let len = hi - lo;
        let count = ((points as f64 * len / TAU).ceil() as usize).max(6);
        let gl = GaussRule::legendre(count).expect("legendre rule");
        let half = 0.5 * len;
        total += gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(t, w)| w * eval(lo + half * (t + 1.0), &mut omega))
            .sum::<f64>()
            * half;
    }
    total
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out
}

/// Surface area of the unit sphere `S^k` in `R^{k+1}`.
fn sphere_area(k: usize) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Deterministic, roughly uniform directions on `S^{d-1}` in tangent coordinates.
fn direction_set(d: usize, resolution: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        3 => {
            // Fibonacci lattice on S^2
            let count = resolution * resolution / 2;
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![rho * phi.cos(), rho * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let count = resolution.pow(d as u32 - 1) / 2;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + d as u64);
            (0..count)
                .map(|_| {
                    let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = g.iter().map(|a| a * a).sum::<f64>().sqrt();
                    g.into_iter().map(|a| a / n).collect()
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::distance_bary;

    #[test]
    fn whole_simplex_has_unit_normalized_mass() {
        // d = 2: area 1/2, so 2 * area = 1
        let q = BallQuadrature::default();
        for x in [vec![0.2, 0.3], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.5]] {
            let c = SimplexPoint::new(x).unwrap();
            let m = 2.0 * integrate_ball(&c, PI / 2.0, None, &q, |_, _| 1.0);
            assert!((m - 1.0).abs() < 1e-5, "{m}");
        }
    }

    #[test]
    fn three_dimensional_volume() {
        let q = BallQuadrature { radial_panels: 4, radial_points: 8, angular_points: 48 };
        let c = SimplexPoint::new(vec![0.2, 0.3, 0.1]).unwrap();
        let m = 6.0 * integrate_ball(&c, PI / 2.0, None, &q, |_, _| 1.0);
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn interval_case() {
        let q = BallQuadrature::default();
        let c = SimplexPoint::new(vec![0.5]).unwrap();
        let m = integrate_ball(&c, PI / 2.0, None, &q, |_, _| 1.0);
        assert!((m - 1.0).abs() < 1e-10);
        // B(1/2, r) = [sin^2(pi/4 - r), sin^2(pi/4 + r)]
        let r = 0.3;
        let m = integrate_ball(&c, r, None, &q, |_, _| 1.0);
        let exact = (PI / 4.0 + r).sin().powi(2) - (PI / 4.0 - r).sin().powi(2);
        assert!((m - exact).abs() < 1e-12);
    }

    #[test]
    fn small_interior_ball_matches_tangent_ellipse() {
        // geodesic disk of area ~ pi r^2 times the Jacobian 2^d prod_i u_i at the center
        let q = BallQuadrature::default();
        let c = SimplexPoint::new(vec![0.3, 0.4]).unwrap();
        let r = 1e-3;
        let m = integrate_ball(&c, r, None, &q, |_, _| 1.0);
        let approx = PI * r * r * 4.0 * (0.3f64 * 0.4 * 0.3).sqrt();
        assert!((m / approx - 1.0).abs() < 1e-2);
    }

    #[test]
    fn distance_argument_is_geodesic_radius() {
        let q = BallQuadrature::default();
        let c = SimplexPoint::new(vec![0.1, 0.6]).unwrap();
        let cb = c.barycentric();
        let worst = std::cell::Cell::new(0.0f64);
        integrate_ball(&c, 0.4, None, &q, |y, theta| {
            worst.set(worst.get().max((distance_bary(&cb, y) - theta).abs()));
            1.0
        });
        assert!(worst.get() < 1e-12);
    }

    #[test]
    fn sample_points_stay_in_ball() {
        let c = SimplexPoint::new(vec![0.05, 0.9]).unwrap();
        let cb = c.barycentric();
        let pts = ball_sample_points(&c, 0.2, 4, 16);
        assert!(pts.len() > 1);
        for p in &pts {
            assert!(distance_bary(&cb, p) <= 0.2 + 1e-12);
            assert!(p.iter().all(|v| *v >= 0.0));
        }
    }
}
