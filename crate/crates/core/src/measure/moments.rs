//! Normalized Dirichlet moments and exact inner products on polynomials.
//!
//! Moments and moment expansions are carried in double-double arithmetic:
//! the expansion of `<f, g>` in monomial moments cancels by many orders of
//! magnitude once the degree passes a handful, and rounding each moment to a
//! double would then dominate the result.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::poly::{monomials, rank_of, JacobiParams, Polynomial};

/// Largest total exponent accepted by the moment routines.
pub const MAX_MOMENT_DEGREE: u32 = 300;

/// Normalized moment `<x^alpha, 1>_kappa` where `alpha` carries `d+1`
/// exponents, the last one on the slack coordinate.
///
/// Equals `prod_i (kappa_i+1)_{alpha_i} / (|kappa|+d+1)_{|alpha|}` with rising
/// factorials; numerator and denominator factors are interleaved so the
/// running product stays in range.
pub fn dirichlet_moment(alpha: &[u32], kappa: &JacobiParams) -> Result<f64> {
    let k = kappa.kappa();
    if alpha.len() != k.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), got: alpha.len() });
    }
    let total: u32 = alpha.iter().sum();
    if total > MAX_MOMENT_DEGREE {
        return Err(Error::MomentOverflow(total));
    }
    let base = base_dd(kappa);
    let mut acc = Dd::ONE;
    let mut step = 0u32;
    for (a, ki) in alpha.iter().zip(k) {
        for j in 0..*a {
            acc = acc * (Dd::sum(*ki, 1.0 + j as f64) / (base + Dd::new(step as f64)));
            step += 1;
        }
    }
    Ok(acc.to_f64())
}

// |kappa| + d + 1 without rounding the sum of the exponents
fn base_dd(kappa: &JacobiParams) -> Dd {
    kappa
        .kappa()
        .iter()
        .fold(Dd::new(kappa.dim() as f64 + 1.0), |acc, k| acc + Dd::new(*k))
}

/// Moments `<x^alpha, 1>_kappa` of every monomial in `d` variables up to a
/// degree, stored in graded order.
#[derive(Debug, Clone)]
pub struct MomentTable {
    kappa: JacobiParams,
    degree: usize,
    values: Vec<Dd>,
}

impl MomentTable {
    pub fn new(kappa: &JacobiParams, degree: usize) -> Result<Self> {
        if degree > MAX_MOMENT_DEGREE as usize {
            return Err(Error::MomentOverflow(degree as u32));
        }
        let d = kappa.dim();
        let set = monomials(d, degree);
        let k = kappa.kappa();
        let base = base_dd(kappa);
        let mut values = vec![Dd::ZERO; set.len()];
        values[0] = Dd::ONE;
        // m(beta + e_i) = m(beta) (kappa_i + 1 + beta_i) / (base + |beta|)
        for idx in 1..set.len() {
            let (p, axis) = set.parent[idx];
            let beta_i = set.exponents[p][axis] as f64;
            let beta_total = set.totals[p] as f64;
            values[idx] =
                values[p] * (Dd::sum(k[axis], 1.0 + beta_i) / (base + Dd::new(beta_total)));
        }
        Ok(Self { kappa: kappa.clone(), degree, values })
    }

    pub fn kappa(&self) -> &JacobiParams {
        &self.kappa
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Moment by graded rank.
    pub fn get(&self, rank: usize) -> f64 {
        self.values[rank].to_f64()
    }

    pub(crate) fn get_dd(&self, rank: usize) -> Dd {
        self.values[rank]
    }

    /// Moment of `x^exps` (slack exponent zero).
    pub fn value(&self, exps: &[u32]) -> f64 {
        self.get(rank_of(exps))
    }

    /// `<f, 1>_kappa`.
    pub fn integrate(&self, f: &Polynomial) -> Result<f64> {
        self.check(f)?;
        let acc = f
            .coeffs()
            .iter()
            .zip(&self.values)
            .filter(|(c, _)| **c != 0.0)
            .fold(Dd::ZERO, |acc, (c, m)| acc + m.mul_f64(*c));
        Ok(acc.to_f64())
    }

    /// `<f, g>_kappa`, expanded pairwise over the coefficients so that no
    /// product polynomial is rounded.
    pub fn inner_product(&self, f: &Polynomial, g: &Polynomial) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        if f.degree() + g.degree() > self.degree {
            return Err(Error::DegreeOutOfRange { degree: f.degree() + g.degree(), max: self.degree });
        }
        let d = f.dim();
        let fs = monomials(d, f.degree_bound());
        let gs = monomials(d, g.degree_bound());
        let mut e = vec![0u32; d];
        let mut acc = Dd::ZERO;
        for (ea, ca) in fs.exponents.iter().zip(f.coeffs()) {
            if *ca == 0.0 {
                continue;
            }
            for (eb, cb) in gs.exponents.iter().zip(g.coeffs()) {
                if *cb == 0.0 {
                    continue;
                }
                for k in 0..d {
                    e[k] = ea[k] + eb[k];
                }
                acc = acc + Dd::prod(*ca, *cb) * self.values[rank_of(&e)];
            }
        }
        Ok(acc.to_f64())
    }

    fn check(&self, f: &Polynomial) -> Result<()> {
        if f.dim() != self.kappa.dim() {
            return Err(Error::DimensionMismatch { expected: self.kappa.dim(), got: f.dim() });
        }
        let needed = f.degree();
        if needed > self.degree {
            return Err(Error::DegreeOutOfRange { degree: needed, max: self.degree });
        }
        Ok(())
    }
}

/// Exact `<f, g>_kappa` through the moment expansion of `f g`.
pub fn inner_product(f: &Polynomial, g: &Polynomial, kappa: &JacobiParams) -> Result<f64> {
    let table = MomentTable::new(kappa, f.degree() + g.degree())?;
    table.inner_product(f, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lgamma_moment(alpha: &[u32], kappa: &JacobiParams) -> f64 {
        let lg = libm::lgamma;
        let k = kappa.kappa();
        let d = kappa.dim() as f64;
        let total: f64 = alpha.iter().map(|a| *a as f64).sum();
        let ln = alpha.iter().zip(k).map(|(a, ki)| lg(ki + *a as f64 + 1.0) - lg(ki + 1.0)).sum::<f64>()
            + lg(kappa.total() + d + 1.0)
            - lg(kappa.total() + total + d + 1.0);
        ln.exp()
    }

    #[test]
    fn moment_examples() {
        let k = JacobiParams::lebesgue(2);
        assert_eq!(dirichlet_moment(&[0, 0, 0], &k).unwrap(), 1.0);
        assert!((dirichlet_moment(&[1, 0, 0], &k).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((dirichlet_moment(&[1, 1, 0], &k).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn moment_matches_gamma_form() {
        let k = JacobiParams::new(vec![0.5, 1.0, 2.3, -0.4]).unwrap();
        for alpha in [[3u32, 0, 2, 1], [0, 7, 1, 0], [10, 10, 10, 10]] {
            let a = dirichlet_moment(&alpha, &k).unwrap();
            let b = lgamma_moment(&alpha, &k);
            assert!((a - b).abs() <= 1e-12 * b, "{alpha:?}: {a} vs {b}");
        }
    }

    #[test]
    fn moment_rejects_large_degree() {
        let k = JacobiParams::lebesgue(2);
        assert!(matches!(dirichlet_moment(&[200, 101, 0], &k), Err(Error::MomentOverflow(301))));
        assert!(dirichlet_moment(&[1, 1], &k).is_err());
    }

    #[test]
    fn table_agrees_with_direct_moments() {
        let k = JacobiParams::new(vec![1.5, 0.0, 2.7]).unwrap();
        let t = MomentTable::new(&k, 6).unwrap();
        let set = monomials(2, 6);
        for (r, e) in set.exponents.iter().enumerate() {
            let direct = dirichlet_moment(&[e[0], e[1], 0], &k).unwrap();
            assert!((t.get(r) - direct).abs() <= 1e-14 * direct);
        }
    }

    #[test]
    fn inner_product_examples() {
        let k = JacobiParams::lebesgue(2);
        let one = Polynomial::constant(2, 1.0);
        let p = Polynomial::from_terms(2, &[(&[1, 0], 3.0), (&[0, 0], -1.0)]).unwrap();
        assert_eq!(inner_product(&one, &one, &k).unwrap(), 1.0);
        assert!(inner_product(&p, &one, &k).unwrap().abs() < 1e-15);
        assert!((inner_product(&p, &p, &k).unwrap() - 0.5).abs() < 1e-15);
    }
}
