//! One-dimensional Jacobi polynomials `P_n^{(a,b)}` and Gauss–Jacobi rules.
//!
//! Normalization is the standard one, `P_n^{(a,b)}(1) = binom(n+a, n)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

fn check_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > -1.0 && beta.is_finite() && beta > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Jacobi parameters must exceed -1, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// Values `P_0(t), ..., P_n(t)`.
pub fn values(n: usize, alpha: f64, beta: f64, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(0.5 * ((alpha + beta + 2.0) * t + alpha - beta));
    for k in 1..n {
        let (a, b, c) = recurrence(k, alpha, beta);
        let next = ((a * t + b) * out[k] - c * out[k - 1]) / recurrence_lead(k, alpha, beta);
        out.push(next);
    }
    out
}

/// Values and first derivatives `(P_k(t), P_k'(t))` for `k = 0..=n`.
pub fn values_and_derivatives(n: usize, alpha: f64, beta: f64, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = Vec::with_capacity(n + 1);
    let mut dp = Vec::with_capacity(n + 1);
    p.push(1.0);
    dp.push(0.0);
    if n > 0 {
        p.push(0.5 * ((alpha + beta + 2.0) * t + alpha - beta));
        dp.push(0.5 * (alpha + beta + 2.0));
    }
    for k in 1..n {
        let (a, b, c) = recurrence(k, alpha, beta);
        let lead = recurrence_lead(k, alpha, beta);
        p.push(((a * t + b) * p[k] - c * p[k - 1]) / lead);
        dp.push(((a * t + b) * dp[k] + a * p[k] - c * dp[k - 1]) / lead);
    }
    (p, dp)
}

// 2(k+1)(k+a+b+1)(2k+a+b) P_{k+1} = (2k+a+b+1)[(2k+a+b+2)(2k+a+b) t + a^2-b^2] P_k
//                                    - 2(k+a)(k+b)(2k+a+b+2) P_{k-1},  k >= 1
fn recurrence(k: usize, alpha: f64, beta: f64) -> (f64, f64, f64) {
    let k = k as f64;
    let s = 2.0 * k + alpha + beta;
    let a = (s + 1.0) * (s + 2.0) * s;
    let b = (s + 1.0) * (alpha * alpha - beta * beta);
    let c = 2.0 * (k + alpha) * (k + beta) * (s + 2.0);
    (a, b, c)
}

fn recurrence_lead(k: usize, alpha: f64, beta: f64) -> f64 {
    let k = k as f64;
    2.0 * (k + 1.0) * (k + alpha + beta + 1.0) * (2.0 * k + alpha + beta)
}

/// Single value `P_n^{(a,b)}(t)`.
pub fn value(n: usize, alpha: f64, beta: f64, t: f64) -> f64 {
    *values(n, alpha, beta, t).last().expect("non-empty")
}

/// `P_n^{(a,b)}(1) = Gamma(n+a+1) / (Gamma(a+1) n!)`.
pub fn value_at_one(n: usize, alpha: f64) -> f64 {
    (1..=n).map(|k| (k as f64 + alpha) / k as f64).product()
}

/// Squared norm of `P_n^{(a,b)}` under the probability-normalized weight
/// `(1-t)^a (1+t)^b / mass`.
pub fn normalized_norm_sq(n: usize, alpha: f64, beta: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let lg = libm::lgamma;
    let ln = lg(nf + alpha + 1.0) + lg(nf + beta + 1.0) + lg(alpha + beta + 2.0)
        - lg(nf + alpha + beta + 1.0)
        - lg(nf + 1.0)
        - lg(alpha + 1.0)
        - lg(beta + 1.0);
    ln.exp() / (2.0 * nf + alpha + beta + 1.0)
}

/// Total mass `int_{-1}^{1} (1-t)^a (1+t)^b dt`.
pub fn weight_mass(alpha: f64, beta: f64) -> f64 {
    let lg = libm::lgamma;
    ((alpha + beta + 1.0) * std::f64::consts::LN_2 + lg(alpha + 1.0) + lg(beta + 1.0)
        - lg(alpha + beta + 2.0))
    .exp()
}

/// Ascending power coefficients of `P_n^{(a,b)}(t)`.
pub fn power_coeffs(n: usize, alpha: f64, beta: f64) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.5 * (alpha - beta), 0.5 * (alpha + beta + 2.0)];
    for k in 1..n {
        let (a, b, c) = recurrence(k, alpha, beta);
        let lead = recurrence_lead(k, alpha, beta);
        let mut next = vec![0.0; k + 2];
        for (i, v) in cur.iter().enumerate() {
            next[i] += b * v;
            next[i + 1] += a * v;
        }
        for (i, v) in prev.iter().enumerate() {
            next[i] -= c * v;
        }
        for v in &mut next {
            *v /= lead;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Gauss quadrature rule: nodes and positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Jacobi rule with `count` nodes on `[-1, 1]` for the weight
    /// `(1-t)^alpha (1+t)^beta`; exact for polynomials of degree `2 count - 1`.
    pub fn jacobi(count: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_params(alpha, beta)?;
        if count == 0 {
            return Err(Error::InvalidParameter("Gauss rule needs at least one node".into()));
        }
        if count == 1 {
            let node = (beta - alpha) / (alpha + beta + 2.0);
            return Ok(Self { nodes: vec![node], weights: vec![weight_mass(alpha, beta)] });
        }
        // Golub–Welsch for initial nodes.
        let mut jm = DMatrix::<f64>::zeros(count, count);
        for k in 0..count {
            let kf = k as f64;
            let s = 2.0 * kf + alpha + beta;
            let diag = if k == 0 {
                (beta - alpha) / (alpha + beta + 2.0)
            } else {
                (beta * beta - alpha * alpha) / (s * (s + 2.0))
            };
            jm[(k, k)] = diag;
            if k + 1 < count {
                let k1 = kf + 1.0;
                let s1 = 2.0 * k1 + alpha + beta;
                let off = if k == 0 {
                    // (k1 + a + b) / (s1 - 1) cancels to 1 at k1 = 1
                    (4.0 * (1.0 + alpha) * (1.0 + beta) / (s1 * s1 * (s1 + 1.0))).sqrt()
                } else {
                    let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + alpha + beta);
                    let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
                    (num / den).sqrt()
                };
                jm[(k, k + 1)] = off;
                jm[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jm);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));

        // Newton polish against P_count and weights from the derivative formula.
        let lg = libm::lgamma;
        let nf = count as f64;
        let ln_const = (alpha + beta + 1.0) * std::f64::consts::LN_2
            + lg(nf + alpha + 1.0)
            + lg(nf + beta + 1.0)
            - lg(nf + alpha + beta + 1.0)
            - lg(nf + 1.0);
        let cst = ln_const.exp();
        let mut weights = Vec::with_capacity(count);
        for t in &mut nodes {
            for _ in 0..3 {
                let (p, dp) = values_and_derivatives(count, alpha, beta, *t);
                let step = p[count] / dp[count];
                *t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = values_and_derivatives(count, alpha, beta, *t);
            weights.push(cst / ((1.0 - *t * *t) * dp[count] * dp[count]));
        }
        Ok(Self { nodes, weights })
    }

    /// Gauss–Legendre rule on `[-1, 1]`.
    pub fn legendre(count: usize) -> Result<Self> {
        Self::jacobi(count, 0.0, 0.0)
    }

    /// Rule on `[0, 1]` for the weight `u^a (1-u)^b`.
    pub fn unit_interval(count: usize, a: f64, b: f64) -> Result<Self> {
        let r = Self::jacobi(count, b, a)?;
        let scale = 0.5f64.powf(a + b + 1.0);
        Ok(Self {
            nodes: r.nodes.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: r.weights.iter().map(|w| w * scale).collect(),
        })
    }

    /// Rescales weights to sum to one.
    pub fn normalized(mut self) -> Self {
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(*t)).sum()
    }
}

/// Number of Gauss nodes needed to integrate degree `degree` exactly.
pub fn nodes_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_degree_closed_forms() {
        // P_1^{(a,b)}(t) = ((a+b+2) t + a - b) / 2
        let (a, b) = (1.0, 0.0);
        for &t in &[-1.0, -0.3, 0.2, 1.0] {
            assert_relative_eq!(value(1, a, b, t), 0.5 * (3.0 * t + 1.0), epsilon = 1e-15);
        }
        // Legendre P_2
        assert_relative_eq!(value(2, 0.0, 0.0, 0.4), 0.5 * (3.0 * 0.16 - 1.0), epsilon = 1e-15);
        assert_relative_eq!(value(7, 2.5, 0.5, 1.0), value_at_one(7, 2.5), epsilon = 1e-12);
    }

    #[test]
    fn power_coeffs_agree_with_recurrence() {
        let c = power_coeffs(6, 1.5, -0.5);
        for &t in &[-0.9f64, -0.1, 0.35, 0.8] {
            let v: f64 = c.iter().enumerate().map(|(k, ck)| ck * t.powi(k as i32)).sum();
            assert_relative_eq!(v, value(6, 1.5, -0.5, t), epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_rule_exactness_against_monomial_moments() {
        // int_{-1}^1 (1-t)^a (1+t)^b t^k dt via a 200-point rule as reference
        // is circular; use Beta-function moments on [0,1] instead.
        let (a, b) = (0.7, -0.5);
        let rule = GaussRule::unit_interval(6, a, b).unwrap();
        for k in 0..12 {
            // int_0^1 u^{a+k} (1-u)^b du = B(a+k+1, b+1)
            let exact = (libm::lgamma(a + k as f64 + 1.0) + libm::lgamma(b + 1.0)
                - libm::lgamma(a + b + k as f64 + 2.0))
            .exp();
            let approx = rule.integrate(|u| u.powi(k));
            assert_relative_eq!(approx, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn normalized_norms_by_quadrature() {
        let (a, b) = (2.5, -0.5);
        let rule = GaussRule::jacobi(30, a, b).unwrap().normalized();
        for n in 0..12 {
            let q = rule.integrate(|t| value(n, a, b, t).powi(2));
            assert_relative_eq!(q, normalized_norm_sq(n, a, b), max_relative = 1e-12);
        }
    }

    #[test]
    fn chebyshev_nodes() {
        let r = GaussRule::jacobi(5, -0.5, -0.5).unwrap();
        for (k, t) in r.nodes.iter().enumerate() {
            let expected = -((2 * k + 1) as f64 * std::f64::consts::PI / 10.0).cos();
            assert_relative_eq!(*t, expected, epsilon = 1e-14);
        }
        for w in &r.weights {
            assert_relative_eq!(*w, std::f64::consts::PI / 5.0, epsilon = 1e-13);
        }
        assert!(GaussRule::jacobi(3, -1.0, 0.0).is_err());
    }
}
