//! Reproducing and cutoff-localized kernels on the simplex.
//!
//! Both kernels are averages of a one-dimensional Jacobi kernel evaluated
//! at `2 xi^2 - 1`, where `xi = sum_i sqrt(x_i y_i) t_i` and `t` runs over
//! `[-1, 1]^{d+1}` with the product measure `prod a_{k_i} (1 - t_i^2)^{k_i - 1/2}`.
//! Since the integrand depends on `t` only through `xi`, the product
//! measure is pushed forward to a discrete measure on `xi`: axis rules are
//! convolved one at a time and each intermediate measure is compressed back
//! to a Gauss rule by the Stieltjes procedure.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{self, GaussRule};
use crate::measure::{distance, integrate_ball, BallQuadrature, SimplexPoint};
use crate::par;
use crate::poly::JacobiParams;

/// Smooth cutoff `a(t)`: `1` on `[0, flat_end]`, `0` beyond `support_end`,
/// built from ratios of `exp(-1/s)` bumps (infinitely differentiable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFunction {
    pub flat_end: f64,
    pub support_end: f64,
}

impl Default for CutoffFunction {
    fn default() -> Self {
        Self { flat_end: 1.0, support_end: 2.0 }
    }
}

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl CutoffFunction {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.flat_end {
            return 1.0;
        }
        if t >= self.support_end {
            return 0.0;
        }
        let u = (t - self.flat_end) / (self.support_end - self.flat_end);
        let a = bump(1.0 - u);
        a / (a + bump(u))
    }

    /// Differentiability order; `None` means infinitely differentiable.
    pub fn smoothness(&self) -> Option<usize> {
        None
    }
}

/// `Z_j(t) = P_j(1) P_j(t) / h_j` for the probability-normalized weight
/// `(1-t)^alpha (1+t)^beta`, so that `sum_{j<=m} Z_j(s)` reproduces `Pi_m`.
pub fn jacobi_z(j: usize, alpha: f64, beta: f64, t: f64) -> Result<f64> {
    check_jacobi(alpha, beta, t)?;
    Ok(JacobiKernel::level(j, alpha, beta)?.value(t))
}

fn check_jacobi(alpha: f64, beta: f64, t: f64) -> Result<()> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidParameter(format!("Jacobi parameters ({alpha}, {beta}) must exceed -1")));
    }
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&t) {
        return Err(Error::InvalidParameter(format!("t = {t} outside [-1, 1]")));
    }
    Ok(())
}

/// `L_n(t) = sum_j a(j/n) Z_j(t)` and `L_n'(t)`; the sum stops below `2n`
/// where the cutoff vanishes.
pub fn localized_1d(n: usize, alpha: f64, beta: f64, t: f64, cutoff: &CutoffFunction) -> Result<(f64, f64)> {
    check_jacobi(alpha, beta, t)?;
    let (v, d1, _) = JacobiKernel::localized(n, alpha, beta, cutoff)?.eval3(t);
    Ok((v, d1))
}

/// A finite Jacobi expansion `sum_j c_j P_j^{(alpha, beta)}(t)`.
#[derive(Debug, Clone)]
pub struct JacobiKernel {
    pub alpha: f64,
    pub beta: f64,
    pub coeffs: Vec<f64>,
}

impl JacobiKernel {
    fn z_coeff(j: usize, alpha: f64, beta: f64) -> f64 {
        jacobi::value_at_one(j, alpha) / jacobi::normalized_norm_sq(j, alpha, beta)
    }

    /// `Z_n` alone.
    pub fn level(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_jacobi(alpha, beta, 0.0)?;
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = Self::z_coeff(n, alpha, beta);
        Ok(Self { alpha, beta, coeffs })
    }

    /// `sum_{j<=n} Z_j`, the reproducing kernel of `Pi_n`.
    pub fn reproducing(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_jacobi(alpha, beta, 0.0)?;
        let coeffs = (0..=n).map(|j| Self::z_coeff(j, alpha, beta)).collect();
        Ok(Self { alpha, beta, coeffs })
    }

    /// `sum_j a(j/n) Z_j`.
    pub fn localized(n: usize, alpha: f64, beta: f64, cutoff: &CutoffFunction) -> Result<Self> {
        check_jacobi(alpha, beta, 0.0)?;
        if n == 0 {
            return Err(Error::InvalidParameter("localized kernel needs n >= 1".into()));
        }
        let top = (cutoff.support_end * n as f64).ceil() as usize;
        let coeffs = (0..top)
            .map(|j| cutoff.eval(j as f64 / n as f64) * Self::z_coeff(j, alpha, beta))
            .collect();
        Ok(Self { alpha, beta, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval3(t).0
    }

    /// Value, first and second derivative.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        let n = self.coeffs.len();
        let mut acc = (self.coeffs[0], 0.0, 0.0);
        if n == 1 {
            return acc;
        }
        let (mut p0, mut d0, mut s0) = (1.0, 0.0, 0.0);
        let mut p1 = 0.5 * ((a + b + 2.0) * t + a - b);
        let mut d1 = 0.5 * (a + b + 2.0);
        let mut s1 = 0.0;
        acc.0 += self.coeffs[1] * p1;
        acc.1 += self.coeffs[1] * d1;
        for k in 1..n - 1 {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            let ra = (s + 1.0) * (s + 2.0) * s;
            let rb = (s + 1.0) * (a * a - b * b);
            let rc = 2.0 * (kf + a) * (kf + b) * (s + 2.0);
            let lead = 2.0 * (kf + 1.0) * (kf + a + b + 1.0) * s;
            let lin = ra * t + rb;
            let p2 = (lin * p1 - rc * p0) / lead;
            let d2 = (lin * d1 + ra * p1 - rc * d0) / lead;
            let s2 = (lin * s1 + 2.0 * ra * d1 - rc * s0) / lead;
            let c = self.coeffs[k + 1];
            acc.0 += c * p2;
            acc.1 += c * d2;
            acc.2 += c * s2;
            (p0, p1) = (p1, p2);
            (d0, d1) = (d1, d2);
            (s0, s1) = (s1, s2);
        }
        acc
    }
}

/// Parameters of a localized kernel evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConfig {
    pub n: usize,
    pub kappa: JacobiParams,
    /// Gauss–Jacobi nodes per `t` axis (and size of the compressed `xi` rules).
    pub t_quad_points: usize,
    pub cutoff: CutoffFunction,
}

impl KernelConfig {
    /// Default node count `max(2n + 2, 24)`: `L_n(2 xi^2 - 1)` has degree
    /// `4n - 2` in `xi`.
    pub fn new(n: usize, kappa: JacobiParams) -> Result<Self> {
        let config = Self { n, kappa, t_quad_points: (2 * n + 2).max(24), cutoff: CutoffFunction::default() };
        config.validate()?;
        Ok(config)
    }

    pub fn with_t_quad_points(mut self, count: usize) -> Result<Self> {
        self.t_quad_points = count;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("kernel degree n must be >= 1".into()));
        }
        self.kappa.require_nonnegative()?;
        if self.t_quad_points < 2 * self.n {
            return Err(Error::InvalidParameter(format!(
                "t_quad_points = {} cannot integrate degree {} exactly",
                self.t_quad_points,
                4 * self.n - 2
            )));
        }
        Ok(())
    }
}

/// Discrete measure `(nodes, weights)` on the real line.
type Rule = (Vec<f64>, Vec<f64>);

/// Evaluates kernels `E_t[K(2 xi(x, y; t)^2 - 1)]` for one 1D kernel `K`.
#[derive(Debug, Clone)]
pub struct KernelEngine {
    pub kappa: JacobiParams,
    pub kernel: JacobiKernel,
    points: usize,
    rules: Vec<GaussRule>,
    raised: Vec<GaussRule>,
}

impl KernelEngine {
    fn with_kernel(kappa: &JacobiParams, kernel: JacobiKernel, points: usize) -> Result<Self> {
        kappa.require_nonnegative()?;
        let rule = |k: f64| GaussRule::jacobi(points, k - 0.5, k - 0.5).map(GaussRule::normalized);
        let rules = kappa.kappa().iter().map(|k| rule(*k)).collect::<Result<_>>()?;
        let raised = kappa.kappa().iter().map(|k| rule(k + 1.0)).collect::<Result<_>>()?;
        Ok(Self { kappa: kappa.clone(), kernel, points, rules, raised })
    }

    /// Engine for the localized kernel `L_n`.
    pub fn localized(config: &KernelConfig) -> Result<Self> {
        config.validate()?;
        let alpha = config.kappa.total() + config.kappa.dim() as f64 - 0.5;
        let kernel = JacobiKernel::localized(config.n, alpha, -0.5, &config.cutoff)?;
        Self::with_kernel(&config.kappa, kernel, config.t_quad_points)
    }

    /// Engine for the reproducing kernel `P_n` of `V_n`.
    pub fn reproducing(n: usize, kappa: &JacobiParams) -> Result<Self> {
        let alpha = kappa.total() + kappa.dim() as f64 - 0.5;
        Self::with_kernel(kappa, JacobiKernel::level(n, alpha, -0.5)?, (n + 2).max(8))
    }

    fn check(&self, x: &SimplexPoint, y: &SimplexPoint) -> Result<()> {
        for p in [x, y] {
            if p.dim() != self.kappa.dim() {
                return Err(Error::DimensionMismatch { expected: self.kappa.dim(), got: p.dim() });
            }
        }
        Ok(())
    }

    /// Push-forward of the `t` measure (axis `raise` uses exponent `k + 1/2`).
    fn xi_rule(&self, x: &SimplexPoint, y: &SimplexPoint, raise: Option<usize>) -> Rule {
        let (bx, by) = (x.barycentric(), y.barycentric());
        let c: Vec<f64> = bx.iter().zip(&by).map(|(a, b)| (a * b).sqrt()).collect();
        let rules: Vec<&GaussRule> =
            (0..c.len()).map(|i| if Some(i) == raise { &self.raised[i] } else { &self.rules[i] }).collect();
        xi_measure(&c, &rules, self.points)
    }

    /// `E_t[f(xi(x, y; t))]`.
    pub fn xi_integral<F: Fn(f64) -> f64>(&self, x: &SimplexPoint, y: &SimplexPoint, f: F) -> Result<f64> {
        self.check(x, y)?;
        let (nodes, weights) = self.xi_rule(x, y, None);
        Ok(nodes.iter().zip(&weights).map(|(s, w)| w * f(*s)).sum())
    }

    /// Kernel value at `(x, y)`.
    pub fn value(&self, x: &SimplexPoint, y: &SimplexPoint) -> Result<f64> {
        self.xi_integral(x, y, |s| self.kernel.value(2.0 * s * s - 1.0))
    }

    /// `d_{i,j}` in `x` with 1-based `1 <= i < j <= d + 1`, `d_{i,d+1} = d_{x_i}`.
    ///
    /// With `dxi/dx_i - dxi/dx_j = (y_i t_i / c_i - y_j t_j / c_j) / 2` and
    /// `E_k[t g(c t)] = c / (2k + 2) E_{k+1}[g'(c t)]` on each axis, the
    /// derivative is `y_i / (4 (k_i+1)) E^{(i)}[G'] - y_j / (4 (k_j+1)) E^{(j)}[G']`
    /// with `G(xi) = K(2 xi^2 - 1)`, free of `1/sqrt(x_i)` factors.
    pub fn derivative(&self, x: &SimplexPoint, y: &SimplexPoint, i: usize, j: usize) -> Result<f64> {
        self.check(x, y)?;
        let d = self.kappa.dim();
        if !(1 <= i && i < j && j <= d + 1) {
            return Err(Error::InvalidPair(i, j));
        }
        let (bx, by) = (x.barycentric(), y.barycentric());
        for &a in &[i - 1, j - 1] {
            if bx[a] <= 0.0 {
                return Err(Error::BoundaryPoint(format!("x_{} = 0 in derivative ({i},{j})", a + 1)));
            }
        }
        let k = self.kappa.kappa();
        let g2 = |s: f64| {
            let (_, d1, d2) = self.kernel.eval3(2.0 * s * s - 1.0);
            4.0 * d1 + 16.0 * s * s * d2
        };
        let mut out = 0.0;
        for (a, sign) in [(i - 1, 1.0), (j - 1, -1.0)] {
            if by[a] == 0.0 {
                continue;
            }
            let (nodes, weights) = self.xi_rule(x, y, Some(a));
            let e: f64 = nodes.iter().zip(&weights).map(|(s, w)| w * g2(*s)).sum();
            out += sign * by[a] / (4.0 * (k[a] + 1.0)) * e;
        }
        Ok(out)
    }
}

/// Gauss rule for the measure with recurrence coefficients `a_k`, `b_k`
/// (`b_k` off-diagonal, `b_0` unused), via implicit QL tracking only the
/// first eigenvector components.
fn gauss_from_recurrence(a: &[f64], b: &[f64], mass: f64) -> Rule {
    let n = a.len();
    let mut diag = a.to_vec();
    let mut off: Vec<f64> = (1..n).map(|k| b[k]).chain(std::iter::once(0.0)).collect();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                break;
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let bb = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - bb;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    let weights = z.iter().map(|v| mass * v * v).collect();
    (diag, weights)
}

/// Gauss rule with at most `count` nodes for a discrete measure (Stieltjes).
fn compress(nodes: &[f64], weights: &[f64], count: usize) -> Rule {
    let mass: f64 = weights.iter().sum();
    let mut a = Vec::with_capacity(count);
    let mut b = vec![0.0];
    let mut p_prev = vec![0.0; nodes.len()];
    let mut p = vec![1.0 / mass.sqrt(); nodes.len()];
    let mut q = vec![0.0; nodes.len()];
    for k in 0..count {
        let ak: f64 = nodes.iter().zip(&weights[..]).zip(&p).map(|((x, w), v)| w * x * v * v).sum();
        a.push(ak);
        if k + 1 == count {
            break;
        }
        let bk = b[k];
        let mut norm = 0.0;
        for t in 0..nodes.len() {
            q[t] = (nodes[t] - ak) * p[t] - bk * p_prev[t];
            norm += weights[t] * q[t] * q[t];
        }
        let bnext = norm.sqrt();
        // the discrete measure has only k + 1 support points
        if bnext <= 1e-13 * (ak.abs() + bk + 1e-300) || bnext == 0.0 {
            break;
        }
        b.push(bnext);
        for t in 0..nodes.len() {
            p_prev[t] = p[t];
            p[t] = q[t] / bnext;
        }
    }
    gauss_from_recurrence(&a, &b, mass)
}

/// Distribution of `sum_i c_i t_i` for independent `t_i` with the given rules.
fn xi_measure(c: &[f64], rules: &[&GaussRule], count: usize) -> Rule {
    let mut nodes = vec![0.0];
    let mut weights = vec![1.0];
    for (ci, rule) in c.iter().zip(rules) {
        if *ci == 0.0 {
            continue;
        }
        let mut nn = Vec::with_capacity(nodes.len() * rule.len());
        let mut nw = Vec::with_capacity(nodes.len() * rule.len());
        for (x, w) in nodes.iter().zip(&weights) {
            for (t, v) in rule.nodes.iter().zip(&rule.weights) {
                nn.push(x + ci * t);
                nw.push(w * v);
            }
        }
        if nn.len() > count {
            (nodes, weights) = compress(&nn, &nw, count);
        } else {
            (nodes, weights) = (nn, nw);
        }
    }
    (nodes, weights)
}

/// Reproducing kernel `P_n(x, y)` of `V_n` (addition formula).
pub fn reproducing_kernel(x: &SimplexPoint, y: &SimplexPoint, n: usize, kappa: &JacobiParams) -> Result<f64> {
    KernelEngine::reproducing(n, kappa)?.value(x, y)
}

/// Localized kernel `L_n(x, y) = sum_j a(j/n) P_j(x, y)`.
pub fn localized_kernel(x: &SimplexPoint, y: &SimplexPoint, config: &KernelConfig) -> Result<f64> {
    KernelEngine::localized(config)?.value(x, y)
}

/// `d_{i,j} L_n(x, y)` in `x` (1-based, `j = d + 1` is the slack).
pub fn kernel_derivative(x: &SimplexPoint, y: &SimplexPoint, i: usize, j: usize, config: &KernelConfig) -> Result<f64> {
    KernelEngine::localized(config)?.derivative(x, y, i, j)
}

/// `W_kappa(n; x) = prod_i (x_i + n^{-2})^{kappa_i + 1/2}` over barycentric coordinates.
pub fn wkn(x: &SimplexPoint, n: usize, kappa: &JacobiParams) -> f64 {
    let h = 1.0 / (n as f64 * n as f64);
    x.barycentric()
        .iter()
        .zip(kappa.kappa())
        .map(|(xi, k)| (xi + h).powf(k + 0.5))
        .product()
}

/// `b_kappa int |L_n(x, y)| W_kappa(y) dy`.
pub fn kernel_mass(x: &SimplexPoint, engine: &KernelEngine, n: usize, quad: &BallQuadrature) -> Result<f64> {
    let b = engine.kappa.b();
    let kappa = engine.kappa.clone();
    let d = kappa.dim();
    Ok(integrate_ball(x, FRAC_PI_2, Some(1.0 / n as f64), quad, |bary, _| {
        let y = SimplexPoint::from_barycentric(bary).expect("ball node in simplex");
        debug_assert_eq!(y.dim(), d);
        b * kappa.weight_at(bary) * engine.value(x, &y).map(f64::abs).unwrap_or(f64::NAN)
    }))
}

/// One sampled `(x, y)` pair for the decay profiles, with companions `z`
/// at distance `delta / n` from `x`.
#[derive(Debug, Clone)]
pub struct SamplePair {
    pub id: usize,
    pub x: SimplexPoint,
    pub y: SimplexPoint,
    pub z: Vec<(f64, SimplexPoint)>,
}

/// Radii `r / n` of the sampled pairs; the profile is self-similar in `n`.
pub const PAIR_SCALES: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

/// Offsets `delta` of the companion points.
pub const LIPSCHITZ_DELTAS: [f64; 2] = [0.1, 0.5];

// moves from x along the great circle towards w by angle theta, if it stays in the simplex
fn walk(x: &SimplexPoint, w: &SimplexPoint, theta: f64) -> Option<SimplexPoint> {
    let u = x.sphere();
    let v = w.sphere();
    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    let mut omega: Vec<f64> = v.iter().zip(&u).map(|(b, a)| b - dot * a).collect();
    let norm = omega.iter().map(|o| o * o).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return None;
    }
    omega.iter_mut().for_each(|o| *o /= norm);
    let p: Vec<f64> = u.iter().zip(&omega).map(|(a, o)| theta.cos() * a + theta.sin() * o).collect();
    if p.iter().any(|c| *c < -1e-15) {
        return None;
    }
    Some(SimplexPoint::from_sphere(&p.iter().map(|c| c.max(0.0)).collect::<Vec<_>>()))
}

fn toward(x: &SimplexPoint, target: &SimplexPoint, theta: f64) -> Option<SimplexPoint> {
    if theta == 0.0 {
        return Some(x.clone());
    }
    walk(x, target, theta)
}

/// Fixed walking targets: centroid, last vertex, midpoint of the edge from
/// vertex 0 to vertex 1 (barycentric indices).
pub fn profile_targets(d: usize) -> Vec<SimplexPoint> {
    let mut mid = vec![0.0; d + 1];
    mid[0] = 0.5;
    mid[1] = 0.5;
    vec![
        SimplexPoint::centroid(d),
        SimplexPoint::vertex(d, d),
        SimplexPoint::from_barycentric(&mid).expect("valid barycentric point"),
    ]
}

/// Centers used by the profiles: centroid, at distance `~2/n` from a face,
/// near a vertex (other coordinates `4/n^2`) and a vertex. The boundary
/// centers scale with `n` so the sample looks the same at every resolution.
pub fn profile_centers(d: usize, n: usize) -> Vec<SimplexPoint> {
    let h = 4.0 / (n as f64 * n as f64);
    let near_face = {
        let mut b = vec![(1.0 - h) / d as f64; d + 1];
        b[0] = h;
        b
    };
    let near_vertex = {
        let mut b = vec![h; d + 1];
        b[0] = 1.0 - d as f64 * h;
        b
    };
    vec![
        SimplexPoint::centroid(d),
        SimplexPoint::from_barycentric(&near_face).expect("valid barycentric point"),
        SimplexPoint::from_barycentric(&near_vertex).expect("valid barycentric point"),
        SimplexPoint::vertex(d, 0),
    ]
}

/// Pairs at distances `PAIR_SCALES / n` around [`profile_centers`], walking
/// along great circles towards each of [`profile_targets`] (pairs that
/// would leave the simplex are skipped). Companions `z` walk towards the
/// centroid, or towards the last vertex from the centroid itself.
pub fn sample_pairs(d: usize, n: usize) -> Vec<SamplePair> {
    let mut out = Vec::new();
    let nf = n as f64;
    let targets = profile_targets(d);
    for x in profile_centers(d, n) {
        let z_target = if x == targets[0] { &targets[1] } else { &targets[0] };
        let z: Vec<(f64, SimplexPoint)> = LIPSCHITZ_DELTAS
            .iter()
            .filter_map(|delta| toward(&x, z_target, delta / nf).map(|z| (*delta, z)))
            .collect();
        for r in PAIR_SCALES {
            let theta = (r / nf).min(FRAC_PI_2);
            for target in &targets {
                if let Some(y) = toward(&x, target, theta) {
                    out.push(SamplePair { id: out.len(), x: x.clone(), y, z: z.clone() });
                }
                if r == 0.0 {
                    break;
                }
            }
        }
    }
    out
}

/// One estimate at one sample: `ratio = lhs / envelope` with unit constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub estimate: String,
    pub n: usize,
    pub pair_id: usize,
    pub distance: f64,
    pub lhs: f64,
    pub envelope: f64,
    pub ratio: f64,
}

/// Supremum of the ratios of one estimate at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub estimate: String,
    pub n: usize,
    pub constant: f64,
}

/// Estimate names reported by [`decay_profiles`].
pub const ESTIMATES: [&str; 9] = [
    "kernel-decay",
    "kernel-lipschitz",
    "kernel-derivative(1,2)",
    "kernel-derivative(1,d+1)",
    "jacobi-decay-m0",
    "jacobi-decay-m1",
    "t-integral",
    "weight-integral",
    "kernel-mass",
];

/// Decay exponent used in the one-dimensional Jacobi-kernel envelope.
pub const JACOBI_DECAY_ORDER: i32 = 4;

fn row(estimate: &str, n: usize, pair_id: usize, distance: f64, lhs: f64, envelope: f64) -> ProfileRow {
    ProfileRow { estimate: estimate.to_string(), n, pair_id, distance, lhs, envelope, ratio: lhs / envelope }
}

/// Default `gamma = 2|kappa| + 2d + 4`.
pub fn default_gamma(kappa: &JacobiParams) -> f64 {
    2.0 * kappa.total() + 2.0 * kappa.dim() as f64 + 4.0
}

/// Ratios of each localization estimate to its envelope at one `n`.
///
/// Kernel-pair estimates use the supplied pairs; the one-dimensional
/// estimates use a grid `t = cos(theta)`; the weight integral and the
/// kernel mass integrate over the whole simplex around each distinct center
/// (the mass only when `with_mass`, it costs one kernel value per node).
pub fn decay_profiles(config: &KernelConfig, pairs: &[SamplePair], gamma: f64, with_mass: bool) -> Result<Vec<ProfileRow>> {
    let engine = KernelEngine::localized(config)?;
    let kappa = &config.kappa;
    let d = kappa.dim();
    let n = config.n;
    let nf = n as f64;
    let kt = kappa.total();
    if gamma < 2.0 * kt + 2.0 {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} below 2|kappa| + 2")));
    }

    let per_pair = par::try_map(pairs, |p| -> Result<Vec<ProfileRow>> {
        let mut rows = Vec::new();
        let dist = distance(&p.x, &p.y);
        let wx = wkn(&p.x, n, kappa).sqrt();
        let wy = wkn(&p.y, n, kappa).sqrt();
        let near = 1.0 + nf * dist;
        let l = engine.value(&p.x, &p.y)?;
        let env = nf.powi(d as i32) / (wx * wy * near.powf(gamma));
        rows.push(row("kernel-decay", n, p.id, dist, l.abs(), env));

        for (_, z) in &p.z {
            let lz = engine.value(z, &p.y)?;
            let dz = distance(&p.x, z);
            let env = nf.powi(d as i32 + 1) * dz / (wx * wy * near.powf(gamma - 2.0 * kt - 2.0));
            rows.push(row("kernel-lipschitz", n, p.id, dist, (l - lz).abs(), env));
        }

        let bx = p.x.barycentric();
        for (name, i, j) in [("kernel-derivative(1,2)", 1, 2), ("kernel-derivative(1,d+1)", 1, d + 1)] {
            let (xi, xj) = (bx[i - 1], bx[j - 1]);
            if xi <= 0.0 || xj <= 0.0 {
                continue;
            }
            let dl = engine.derivative(&p.x, &p.y, i, j)?;
            let env = nf.powi(d as i32 + 1) * ((xi + xj).sqrt() + 1.0 / nf)
                / ((xi * xj).sqrt() * wx * wy * near.powf(gamma - 2.0 * kt - 2.0));
            rows.push(row(name, n, p.id, dist, dl.abs(), env));
        }

        let lhs = engine.xi_integral(&p.x, &p.y, |s| (1.0 + nf * (1.0 - s).max(0.0).sqrt()).powf(-gamma))?;
        let env = nf.powf(-2.0 * kt - d as f64 - 1.0) / (wx * wy * near.powf(gamma - 2.0 * kt));
        rows.push(row("t-integral", n, p.id, dist, lhs, env));
        Ok(rows)
    })?;
    let mut rows: Vec<ProfileRow> = per_pair.into_iter().flatten().collect();

    // one-dimensional kernel on t = cos(theta)
    let alpha = engine.kernel.alpha;
    let grid = 2048;
    for k in 0..=grid {
        let t = (PI * k as f64 / grid as f64).cos();
        let (v, d1, _) = engine.kernel.eval3(t);
        let decay = (1.0 + nf * (1.0 - t).max(0.0).sqrt()).powi(JACOBI_DECAY_ORDER);
        let theta = PI * k as f64 / grid as f64;
        rows.push(row("jacobi-decay-m0", n, k, theta, v.abs() * decay, nf.powf(2.0 * alpha + 2.0)));
        rows.push(row("jacobi-decay-m1", n, k, theta, d1.abs() * decay, nf.powf(2.0 * alpha + 4.0)));
    }

    // whole-simplex integrals around each distinct center
    let mut centers: Vec<&SimplexPoint> = Vec::new();
    for p in pairs {
        if !centers.iter().any(|c| *c == &p.x) {
            centers.push(&p.x);
        }
    }
    let quad = BallQuadrature::default();
    let b = kappa.b();
    for (cid, x) in centers.iter().enumerate() {
        let lhs = integrate_ball(x, FRAC_PI_2, Some(1.0 / nf), &quad, |bary, theta| {
            let y = SimplexPoint::from_barycentric(bary).expect("ball node in simplex");
            nf.powi(d as i32) * b * kappa.weight_at(bary) / (wkn(&y, n, kappa) * (1.0 + nf * theta).powf(gamma))
        });
        rows.push(row("weight-integral", n, cid, 0.0, lhs, 1.0));
        if with_mass {
            let mass = kernel_mass(x, &engine, n, &quad)?;
            rows.push(row("kernel-mass", n, cid, 0.0, mass, 1.0));
        }
    }
    Ok(rows)
}

/// Sup of the ratios per estimate.
pub fn summarize(rows: &[ProfileRow]) -> Vec<ProfileSummary> {
    let mut out: Vec<ProfileSummary> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|s| s.estimate == r.estimate && s.n == r.n) {
            Some(s) => s.constant = s.constant.max(r.ratio),
            None => out.push(ProfileSummary { estimate: r.estimate.clone(), n: r.n, constant: r.ratio }),
        }
    }
    out
}

/// `max / min` of the fitted constant of `estimate` across the summaries.
pub fn stability_ratio(summaries: &[ProfileSummary], estimate: &str) -> Option<f64> {
    let values: Vec<f64> = summaries.iter().filter(|s| s.estimate == estimate).map(|s| s.constant).collect();
    if values.is_empty() {
        return None;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Some(max / min)
}
