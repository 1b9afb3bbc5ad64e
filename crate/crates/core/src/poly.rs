//! Dense multivariate polynomials over graded-lex monomials, together with the
//! differential operators used on the simplex.
//!
//! Coefficients are stored in graded order: all monomials of total degree 0,
//! then 1, and so on; within a degree, exponent tuples are sorted
//! lexicographically with larger leading exponents first. Because of the
//! grading, the coefficient table of a polynomial with degree bound `m` is a
//! prefix of the table for any bound `n >= m`.
//!
//! Axes are zero-based throughout. In [`Polynomial::diff_pair`] the index
//! `d` stands for the slack coordinate `x_{d+1} = 1 - |x|`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::pairwise_sum;

/// Binomial coefficient as `usize`; exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of monomials of total degree `<= n` in `d` variables.
pub fn space_dim(d: usize, n: usize) -> usize {
    binomial(n + d, d)
}

/// Number of monomials of total degree exactly `n` in `d` variables.
pub fn level_dim(d: usize, n: usize) -> usize {
    if d == 0 {
        return usize::from(n == 0);
    }
    binomial(n + d - 1, n)
}

/// Exponent tuple of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    total: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let total = exponents.iter().sum();
        Self { exponents, total }
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![0; d])
    }

    pub fn unit(d: usize, axis: usize) -> Self {
        let mut e = vec![0; d];
        e[axis] = 1;
        Self::new(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Position in the graded-lex order.
    pub fn rank(&self) -> usize {
        rank_of(&self.exponents)
    }
}

/// Graded-lex position of an exponent tuple.
pub fn rank_of(exps: &[u32]) -> usize {
    let d = exps.len();
    let t: usize = exps.iter().map(|&e| e as usize).sum();
    let mut r = if t == 0 { 0 } else { binomial(t - 1 + d, d) };
    let mut rem = t;
    for i in 0..d.saturating_sub(1) {
        let vars_left = d - i - 1;
        let ei = exps[i] as usize;
        // monomials with a larger exponent in slot i come first
        for e in (ei + 1)..=rem {
            r += level_dim(vars_left, rem - e);
        }
        rem -= ei;
    }
    r
}

/// Enumerated monomials of total degree `<= n` in `d` variables with, for each
/// non-constant monomial, a parent `(index, axis)` such that
/// `x^alpha = x^parent * x_axis`.
#[derive(Debug)]
pub struct MonomialSet {
    pub dim: usize,
    pub degree: usize,
    pub exponents: Vec<Vec<u32>>,
    pub totals: Vec<u32>,
    pub parent: Vec<(usize, usize)>,
}

impl MonomialSet {
    fn build(d: usize, n: usize) -> Self {
        let mut exponents = Vec::with_capacity(space_dim(d, n));
        for t in 0..=n {
            push_level(d, t as u32, &mut Vec::with_capacity(d), &mut exponents);
        }
        let totals = exponents.iter().map(|e| e.iter().sum()).collect();
        let parent = exponents
            .iter()
            .map(|e| match e.iter().position(|&v| v > 0) {
                None => (0, 0),
                Some(axis) => {
                    let mut p = e.clone();
                    p[axis] -= 1;
                    (rank_of(&p), axis)
                }
            })
            .collect();
        Self { dim: d, degree: n, exponents, totals, parent }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Values of every monomial at `x`, in graded order.
    pub fn values_at(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.fill_values(x, &mut out);
        out
    }

    /// Writes monomial values at `x` into `out` (length `self.len()`).
    pub fn fill_values(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        for k in 1..self.len() {
            let (p, axis) = self.parent[k];
            out[k] = out[p] * x[axis];
        }
    }
}

fn push_level(d: usize, t: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == d {
        let mut e = prefix.clone();
        e.push(t);
        out.push(e);
        return;
    }
    if d == 0 {
        out.push(Vec::new());
        return;
    }
    for e in (0..=t).rev() {
        prefix.push(e);
        push_level(d, t - e, prefix, out);
        prefix.pop();
    }
}

type SetCache = RwLock<HashMap<(usize, usize), Arc<MonomialSet>>>;

/// Shared, immutable monomial enumeration for `(d, n)`.
pub fn monomials(d: usize, n: usize) -> Arc<MonomialSet> {
    static CACHE: OnceLock<SetCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(set) = cache.read().expect("monomial cache poisoned").get(&(d, n)) {
        return Arc::clone(set);
    }
    let set = Arc::new(MonomialSet::build(d, n));
    cache
        .write()
        .expect("monomial cache poisoned")
        .entry((d, n))
        .or_insert(set)
        .clone()
}

/// Jacobi exponent vector `kappa = (kappa_1, ..., kappa_{d+1})` for the
/// weight `x_1^k1 ... x_d^kd (1-|x|)^k_{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    kappa: Vec<f64>,
}

impl JacobiParams {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "kappa needs d+1 >= 2 entries, got {}",
                kappa.len()
            )));
        }
        if let Some(k) = kappa.iter().find(|k| !(k.is_finite() && **k > -1.0)) {
            return Err(Error::InvalidParameter(format!("kappa entry {k} must exceed -1")));
        }
        Ok(Self { kappa })
    }

    /// All exponents equal to `value`.
    pub fn uniform(d: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; d + 1])
    }

    /// Lebesgue measure (all exponents zero).
    pub fn lebesgue(d: usize) -> Self {
        Self { kappa: vec![0.0; d + 1] }
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// Spatial dimension `d`.
    pub fn dim(&self) -> usize {
        self.kappa.len() - 1
    }

    /// `|kappa|`.
    pub fn total(&self) -> f64 {
        self.kappa.iter().sum()
    }

    /// Normalization `b_kappa = Gamma(|kappa|+d+1) / prod Gamma(kappa_i+1)`.
    pub fn b(&self) -> f64 {
        let d = self.dim() as f64;
        let ln = libm::lgamma(self.total() + d + 1.0)
            - self.kappa.iter().map(|k| libm::lgamma(k + 1.0)).sum::<f64>();
        ln.exp()
    }

    /// Kernel normalization `a_kappa = prod Gamma(k+1) / (sqrt(pi) Gamma(k+1/2))`.
    pub fn a(&self) -> f64 {
        self.kappa.iter().map(|&k| half_beta_norm(k)).product()
    }

    /// Eigenvalue magnitude `lambda_n = n (n + |kappa| + d)`.
    pub fn lambda(&self, n: usize) -> f64 {
        let n = n as f64;
        n * (n + self.total() + self.dim() as f64)
    }

    /// Rejects parameters with a negative entry (kernel formulas need `kappa_i >= 0`).
    pub fn require_nonnegative(&self) -> Result<()> {
        match self.kappa.iter().find(|k| **k < 0.0) {
            Some(k) => Err(Error::InvalidParameter(format!(
                "kernel operations need kappa_i >= 0, got {k}"
            ))),
            None => Ok(()),
        }
    }

    /// Swaps the roles of barycentric coordinates `i` and `j` (0-based, `d` = slack).
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut kappa = self.kappa.clone();
        kappa.swap(i, j);
        Self { kappa }
    }

    /// Pointwise value of the unnormalized weight at barycentric coordinates.
    pub fn weight_at(&self, bary: &[f64]) -> f64 {
        self.kappa
            .iter()
            .zip(bary)
            .map(|(&k, &x)| if k == 0.0 { 1.0 } else { x.powf(k) })
            .product()
    }
}

/// `Gamma(k+1) / (sqrt(pi) Gamma(k+1/2))`, the reciprocal of
/// `int_{-1}^1 (1-t^2)^{k-1/2} dt`.
pub fn half_beta_norm(k: f64) -> f64 {
    (libm::lgamma(k + 1.0) - libm::lgamma(k + 0.5)).exp() / std::f64::consts::PI.sqrt()
}

/// Dense polynomial in `d` variables with total degree at most `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, coeffs: vec![0.0; space_dim(dim, degree)] }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self { dim, degree: 0, coeffs: vec![c] }
    }

    /// The coordinate function `x_axis`.
    pub fn variable(dim: usize, axis: usize) -> Self {
        let mut p = Self::zero(dim, 1);
        p.coeffs[1 + axis] = 1.0;
        p
    }

    /// The slack coordinate `1 - |x|`.
    pub fn slack(dim: usize) -> Self {
        let mut p = Self::zero(dim, 1);
        p.coeffs[0] = 1.0;
        for c in &mut p.coeffs[1..] {
            *c = -1.0;
        }
        p
    }

    /// `|x| = x_1 + ... + x_d`.
    pub fn norm1(dim: usize) -> Self {
        let mut p = Self::zero(dim, 1);
        for c in &mut p.coeffs[1..] {
            *c = 1.0;
        }
        p
    }

    /// Barycentric coordinate `index` (0-based, `dim` = slack).
    pub fn barycentric(dim: usize, index: usize) -> Self {
        if index == dim {
            Self::slack(dim)
        } else {
            Self::variable(dim, index)
        }
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = space_dim(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: coeffs.len() });
        }
        Ok(Self { dim, degree, coeffs })
    }

    /// Builds a polynomial from `(exponents, coefficient)` terms.
    pub fn from_terms(dim: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        let degree = terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        let mut p = Self::zero(dim, degree);
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.len() });
            }
            p.coeffs[rank_of(e)] += c;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree bound of the representation.
    pub fn degree_bound(&self) -> usize {
        self.degree
    }

    /// Highest total degree with a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let set = monomials(self.dim, self.degree);
        self.coeffs
            .iter()
            .zip(&set.totals)
            .filter(|(c, _)| **c != 0.0)
            .map(|(_, t)| *t as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        let r = rank_of(exps);
        self.coeffs.get(r).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Re-expresses with a new degree bound. Shrinking drops higher-degree
    /// coefficients, so callers must only shrink when those are zero.
    pub fn with_degree_bound(&self, degree: usize) -> Self {
        let len = space_dim(self.dim, degree);
        let mut coeffs = vec![0.0; len];
        let k = len.min(self.coeffs.len());
        coeffs[..k].copy_from_slice(&self.coeffs[..k]);
        Self { dim: self.dim, degree, coeffs }
    }

    /// Evaluates at `x` with pairwise summation of the terms.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.eval(x))
    }

    /// Unchecked evaluation; `x.len()` must equal `dim`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let set = monomials(self.dim, self.degree);
        let mut terms = set.values_at(x);
        for (t, c) in terms.iter_mut().zip(&self.coeffs) {
            *t *= c;
        }
        pairwise_sum(&terms)
    }

    /// Evaluates against precomputed monomial values (graded order).
    pub fn eval_with(&self, monomial_values: &[f64]) -> f64 {
        self.coeffs.iter().zip(monomial_values).map(|(c, m)| c * m).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in polynomial sum");
        let degree = self.degree.max(other.degree);
        let mut out = self.with_degree_bound(degree);
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += s * c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in polynomial product");
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.dim, degree);
        let a = monomials(self.dim, self.degree);
        let b = monomials(self.dim, other.degree);
        let mut e = vec![0u32; self.dim];
        for (ea, ca) in a.exponents.iter().zip(&self.coeffs) {
            if *ca == 0.0 {
                continue;
            }
            for (eb, cb) in b.exponents.iter().zip(&other.coeffs) {
                if *cb == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    e[k] = ea[k] + eb[k];
                }
                out.coeffs[rank_of(&e)] += ca * cb;
            }
        }
        out
    }

    /// Multiplies by the coordinate `x_axis` (shifts coefficients).
    pub fn mul_variable(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree + 1);
        let set = monomials(self.dim, self.degree);
        let mut e = vec![0u32; self.dim];
        for (ex, c) in set.exponents.iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            e.copy_from_slice(ex);
            e[axis] += 1;
            out.coeffs[rank_of(&e)] += c;
        }
        out
    }

    /// Partial derivative along `axis` (0-based).
    pub fn partial(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(1));
        let set = monomials(self.dim, self.degree);
        let mut e = vec![0u32; self.dim];
        for (ex, c) in set.exponents.iter().zip(&self.coeffs) {
            if ex[axis] == 0 || *c == 0.0 {
                continue;
            }
            e.copy_from_slice(ex);
            e[axis] -= 1;
            out.coeffs[rank_of(&e)] += c * ex[axis] as f64;
        }
        Ok(out)
    }

    /// `d_i - d_j`; `j == dim` denotes the slack coordinate and yields `d_i`.
    pub fn diff_pair(&self, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidPair(i, j));
        }
        if i >= self.dim {
            return Err(Error::AxisOutOfRange { axis: i, dim: self.dim });
        }
        if j > self.dim {
            return Err(Error::AxisOutOfRange { axis: j, dim: self.dim });
        }
        let di = self.partial(i)?;
        if j == self.dim {
            Ok(di)
        } else {
            Ok(di.sub(&self.partial(j)?))
        }
    }

    /// Euler operator `<x, grad>`: scales each homogeneous part by its degree.
    pub fn euler(&self) -> Self {
        let set = monomials(self.dim, self.degree);
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&set.totals)
                .map(|(c, t)| c * *t as f64)
                .collect(),
        }
    }

    /// `<x, grad> - d_axis`.
    pub fn euler_minus_partial(&self, axis: usize) -> Result<Self> {
        Ok(self.euler().sub(&self.partial(axis)?))
    }

    /// Applies the spectral operator
    /// `sum x_i(1-x_i) d_ii - 2 sum_{i<j} x_i x_j d_ij + sum (k_i+1-(|k|+d+1) x_i) d_i`.
    pub fn apply_spectral(&self, kappa: &JacobiParams) -> Result<Self> {
        let d = self.dim;
        if kappa.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: kappa.dim() });
        }
        let big = kappa.total() + d as f64 + 1.0;
        let grads: Vec<Self> = (0..d).map(|i| self.partial(i)).collect::<Result<_>>()?;
        let mut out = Self::zero(d, self.degree);
        for i in 0..d {
            let dii = grads[i].partial(i)?;
            // x_i (1 - x_i) d_ii
            let xi = dii.mul_variable(i);
            out = out.add(&xi).sub(&xi.mul_variable(i));
            // first-order part
            out = out
                .axpy(kappa.kappa()[i] + 1.0, &grads[i])
                .axpy(-big, &grads[i].mul_variable(i));
            for j in (i + 1)..d {
                let dij = grads[i].partial(j)?;
                out = out.axpy(-2.0, &dij.mul_variable(i).mul_variable(j));
            }
        }
        Ok(out.with_degree_bound(self.degree))
    }

    /// Substitutes each variable by an affine/polynomial expression:
    /// returns `p(q_1(x), ..., q_d(x))` where `subs[i]` are polynomials in `target_dim` variables.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Self> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: subs.len() });
        }
        let target = subs.first().map(|s| s.dim).unwrap_or(0);
        let set = monomials(self.dim, self.degree);
        let mut values: Vec<Polynomial> = Vec::with_capacity(set.len());
        let mut out = Self::zero(target, 0);
        for k in 0..set.len() {
            let v = if k == 0 {
                Self::constant(target, 1.0)
            } else {
                let (p, axis) = set.parent[k];
                values[p].mul(&subs[axis])
            };
            if self.coeffs[k] != 0.0 {
                out = out.axpy(self.coeffs[k], &v);
            }
            values.push(v);
        }
        Ok(out)
    }
}

/// Builds a univariate polynomial (as a `Polynomial` in one variable) from
/// ascending power coefficients.
pub fn univariate(coeffs: &[f64]) -> Polynomial {
    let degree = coeffs.len().saturating_sub(1);
    let mut c = coeffs.to_vec();
    if c.is_empty() {
        c.push(0.0);
    }
    Polynomial { dim: 1, degree, coeffs: c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn linear(d: usize, c0: f64, c: &[f64]) -> Polynomial {
        let mut p = Polynomial::zero(d, 1);
        p.coeffs_mut()[0] = c0;
        p.coeffs_mut()[1..].copy_from_slice(c);
        p
    }

    #[test]
    fn graded_order_and_ranks() {
        let set = monomials(2, 2);
        assert_eq!(
            set.exponents,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        let set3 = monomials(3, 4);
        for (k, e) in set3.exponents.iter().enumerate() {
            assert_eq!(rank_of(e), k);
        }
        assert_eq!(set3.len(), space_dim(3, 4));
        assert_eq!(level_dim(2, 3), 4);
    }

    #[test]
    fn evaluate_examples() {
        let one = Polynomial::constant(2, 1.0);
        assert_eq!(one.evaluate(&[0.3, 0.2]).unwrap(), 1.0);
        let f = linear(2, -1.0, &[3.0, 0.0]);
        assert!(f.evaluate(&[1.0 / 3.0, 0.0]).unwrap().abs() < 1e-15);
        let g = Polynomial::from_terms(2, &[(&[1, 1], 1.0)]).unwrap();
        assert_eq!(g.evaluate(&[0.5, 0.5]).unwrap(), 0.25);
        assert!(matches!(
            g.evaluate(&[0.5]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn partial_examples() {
        let x1sq = Polynomial::from_terms(2, &[(&[2, 0], 1.0)]).unwrap();
        let d = x1sq.partial(0).unwrap();
        assert_eq!(d.coeff(&[1, 0]), 2.0);
        assert_eq!(d.degree(), 1);
        let f = linear(2, -1.0, &[3.0, 0.0]);
        assert!(f.partial(1).unwrap().is_zero());
        let g = Polynomial::from_terms(2, &[(&[1, 1], 1.0)]).unwrap();
        let dg = g.partial(0).unwrap();
        assert_eq!(dg.coeff(&[0, 1]), 1.0);
        assert_eq!(dg.coeff(&[1, 0]), 0.0);
        assert!(matches!(g.partial(2), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn diff_pair_examples() {
        let s = linear(2, 0.0, &[1.0, 1.0]);
        assert!(s.diff_pair(0, 1).unwrap().is_zero());
        let f = linear(2, -1.0, &[3.0, 0.0]);
        let d = f.diff_pair(0, 1).unwrap();
        assert_eq!(d.coeffs()[0], 3.0);
        assert_eq!(d.degree(), 0);
        let x1 = Polynomial::variable(2, 0);
        assert_eq!(x1.diff_pair(0, 2).unwrap().coeffs()[0], 1.0);
        assert!(matches!(f.diff_pair(1, 1), Err(Error::InvalidPair(1, 1))));
    }

    #[test]
    fn euler_examples() {
        assert!(Polynomial::constant(2, 4.0).euler().is_zero());
        let g = Polynomial::from_terms(2, &[(&[1, 1], 1.0)]).unwrap();
        assert_eq!(g.euler().coeff(&[1, 1]), 2.0);
        let f = linear(2, -1.0, &[3.0, 0.0]);
        let e = f.euler();
        assert_eq!(e.coeffs(), &[0.0, 3.0, 0.0]);
    }

    #[test]
    fn spectral_examples() {
        let k = JacobiParams::lebesgue(2);
        assert!(Polynomial::constant(2, 1.0).apply_spectral(&k).unwrap().is_zero());
        let f = linear(2, -1.0, &[3.0, 0.0]);
        let df = f.apply_spectral(&k).unwrap();
        for (a, b) in df.coeffs().iter().zip(f.scale(-3.0).coeffs()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
        let r = linear(2, 2.0, &[-3.0, -3.0]);
        let dr = r.apply_spectral(&k).unwrap();
        for (a, b) in dr.coeffs().iter().zip(r.scale(-3.0).coeffs()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn spectral_matches_monomial_closed_form() {
        // D x^a = -lambda_|a| x^a + sum_i a_i (a_i + k_i) x^{a - e_i}
        let k = JacobiParams::new(vec![0.5, 1.5, 2.0, 0.25]).unwrap();
        let set = monomials(3, 4);
        for e in &set.exponents {
            let p = Polynomial::from_terms(3, &[(e.as_slice(), 1.0)]).unwrap();
            let dp = p.apply_spectral(&k).unwrap();
            let total: u32 = e.iter().sum();
            let mut expected = p.scale(-k.lambda(total as usize));
            for i in 0..3 {
                if e[i] > 0 {
                    let mut lower = e.clone();
                    lower[i] -= 1;
                    let c = e[i] as f64 * (e[i] as f64 + k.kappa()[i]);
                    let t = Polynomial::from_terms(3, &[(lower.as_slice(), c)]).unwrap();
                    expected = expected.add(&t);
                }
            }
            let expected = expected.with_degree_bound(dp.degree_bound());
            for (a, b) in dp.coeffs().iter().zip(expected.coeffs()) {
                assert_relative_eq!(*a, *b, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_params_derived_values() {
        let k = JacobiParams::lebesgue(2);
        assert_relative_eq!(k.b(), 2.0, epsilon = 1e-13);
        assert_relative_eq!(k.a(), (1.0 / std::f64::consts::PI).powi(3), epsilon = 1e-15);
        assert_eq!(k.lambda(1), 3.0);
        assert!(JacobiParams::new(vec![0.0, -1.0, 0.0]).is_err());
        assert!(JacobiParams::new(vec![-0.5, 0.0, 0.0]).unwrap().require_nonnegative().is_err());
    }

    #[test]
    fn compose_substitution() {
        // p(t) = t^2 composed with t = 2 x_1 - 1
        let p = univariate(&[0.0, 0.0, 1.0]);
        let t = linear(2, -1.0, &[2.0, 0.0]);
        let q = p.compose(&[t]).unwrap();
        let x = [0.3, 0.1];
        assert_relative_eq!(q.eval(&x), (2.0 * 0.3 - 1.0_f64).powi(2), epsilon = 1e-15);
    }
}
