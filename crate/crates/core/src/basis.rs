//! Orthonormal bases of the spaces `V_m` of orthogonal polynomials of exact
//! degree `m` for `<f, g>_kappa`, projections onto them, and the two explicit
//! Jacobi-type members `P_{e1}` and `R_{e1}`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::jacobi;
use crate::measure::MomentTable;
use crate::poly::{monomials, rank_of, space_dim, univariate, JacobiParams, Polynomial};

/// Largest degree accepted by [`build_basis`].
pub const MAX_BASIS_DEGREE: usize = 20;

/// Orthogonality residual beyond which construction fails.
pub const ORTHOGONALITY_LIMIT: f64 = 1e-8;

const CACHE_VERSION: u32 = 1;

/// Orthonormal basis of `V_0 + ... + V_n`, grouped by degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthoBasis {
    pub kappa: JacobiParams,
    pub max_degree: usize,
    pub levels: Vec<Vec<Polynomial>>,
    /// Spectral condition number of the monomial Gram matrix.
    pub gram_condition: f64,
    /// `max |<u, v> - delta_uv|` over all stored pairs, by exact moments.
    pub residual: f64,
}

impl OrthoBasis {
    pub fn dim(&self) -> usize {
        self.kappa.dim()
    }

    pub fn level(&self, m: usize) -> Result<&[Polynomial]> {
        self.levels
            .get(m)
            .map(Vec::as_slice)
            .ok_or(Error::DegreeOutOfRange { degree: m, max: self.max_degree })
    }

    /// All elements of degree `<= n` in graded order.
    pub fn elements(&self, n: usize) -> Vec<&Polynomial> {
        self.levels.iter().take(n + 1).flatten().collect()
    }

    /// Coefficients `<f, u>_kappa` for every `u` in level `m`.
    pub fn coefficients(&self, f: &Polynomial, m: usize) -> Result<Vec<f64>> {
        let level = self.level(m)?;
        let table = MomentTable::new(&self.kappa, f.degree() + m)?;
        level.iter().map(|u| table.inner_product(f, u)).collect()
    }

    /// Orthogonal projection of `f` onto `V_m`.
    pub fn project(&self, f: &Polynomial, m: usize) -> Result<Polynomial> {
        let coeffs = self.coefficients(f, m)?;
        let mut out = Polynomial::zero(self.dim(), m);
        for (c, u) in coeffs.iter().zip(self.level(m)?) {
            out = out.axpy(*c, u);
        }
        Ok(out)
    }

    /// Combination `sum_k c_k u_k` over the graded element list.
    pub fn expand(&self, coeffs: &[f64]) -> Polynomial {
        let elems = self.elements(self.max_degree);
        let degree = self.levels.iter().scan(0, |acc, l| {
            *acc += l.len();
            Some(*acc)
        });
        let top = degree.take_while(|size| *size < coeffs.len()).count();
        let mut out = Polynomial::zero(self.dim(), top.min(self.max_degree));
        for (c, u) in coeffs.iter().zip(elems) {
            out = out.axpy(*c, u);
        }
        out
    }
}

/// Builds an orthonormal basis of `Pi_n` by modified Gram–Schmidt over
/// graded monomials, with inner products from exact moments and one full
/// reorthogonalization pass.
pub fn build_basis(kappa: &JacobiParams, n: usize) -> Result<OrthoBasis> {
    build_basis_with_limit(kappa, n, ORTHOGONALITY_LIMIT)
}

/// [`build_basis`] with a caller-chosen orthogonality limit. Monomial
/// coefficients are stored in double precision, so at high degree the
/// residual grows past [`ORTHOGONALITY_LIMIT`] (about `2e-8` at `d = 2`,
/// `n = 12`); callers that only need approximately orthonormal coordinates,
/// such as random test polynomials, can accept that.
pub fn build_basis_with_limit(kappa: &JacobiParams, n: usize, limit: f64) -> Result<OrthoBasis> {
    if n > MAX_BASIS_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: n, max: MAX_BASIS_DEGREE });
    }
    let d = kappa.dim();
    let set = monomials(d, n);
    let size = set.len();
    let table = MomentTable::new(kappa, 2 * n)?;
    let mut gram = vec![Dd::ZERO; size * size];
    let mut e = vec![0u32; d];
    for a in 0..size {
        for b in 0..=a {
            for k in 0..d {
                e[k] = set.exponents[a][k] + set.exponents[b][k];
            }
            let v = table.get_dd(rank_of(&e));
            gram[a * size + b] = v;
            gram[b * size + a] = v;
        }
    }
    let apply = |v: &[f64]| -> Vec<Dd> {
        (0..size)
            .map(|r| {
                gram[r * size..(r + 1) * size]
                    .iter()
                    .zip(v)
                    .filter(|(_, x)| **x != 0.0)
                    .fold(Dd::ZERO, |acc, (m, x)| acc + m.mul_f64(*x))
            })
            .collect()
    };
    let dot = |g: &[Dd], v: &[f64]| -> Dd {
        g.iter().zip(v).filter(|(_, x)| **x != 0.0).fold(Dd::ZERO, |acc, (m, x)| acc + m.mul_f64(*x))
    };

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(size);
    let mut gq: Vec<Vec<Dd>> = Vec::with_capacity(size);
    for a in 0..size {
        let mut v = vec![0.0; size];
        v[a] = 1.0;
        for _ in 0..2 {
            for (qk, gk) in q.iter().zip(&gq) {
                let h = dot(gk, &v).to_f64();
                for (x, y) in v.iter_mut().zip(qk) {
                    *x -= h * y;
                }
            }
        }
        let gv = apply(&v);
        let norm2 = dot(&gv, &v).to_f64();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::OrthogonalityLoss {
                degree: set.totals[a] as usize,
                residual: f64::INFINITY,
                condition: condition(&gram, size),
            });
        }
        let s = norm2.sqrt();
        q.push(v.iter().map(|x| x / s).collect());
        gq.push(gv.iter().map(|x| *x / Dd::new(s)).collect());
    }

    let mut residual: f64 = 0.0;
    for i in 0..size {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((dot(&gq[j], &q[i]).to_f64() - target).abs());
        }
    }
    let gram_condition = condition(&gram, size);
    if residual > limit {
        return Err(Error::OrthogonalityLoss { degree: n, residual, condition: gram_condition });
    }

    let mut levels = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let lo = if m == 0 { 0 } else { space_dim(d, m - 1) };
        let hi = space_dim(d, m);
        let level = (lo..hi)
            .map(|k| {
                let coeffs = q[k][..hi].to_vec();
                Polynomial::from_coeffs(d, m, coeffs)
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(level);
    }
    Ok(OrthoBasis { kappa: kappa.clone(), max_degree: n, levels, gram_condition, residual })
}

fn condition(gram: &[Dd], size: usize) -> f64 {
    let m = DMatrix::from_fn(size, size, |i, j| gram[i * size + j].to_f64());
    let eig = SymmetricEigen::new(m).eigenvalues;
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `P_n^{(|kappa| - kappa_1 + d - 1, kappa_1)}(2 x_1 - 1)`.
pub fn special_p_e1(n: usize, kappa: &JacobiParams, d: usize) -> Result<Polynomial> {
    check_dim(kappa, d)?;
    let k = kappa.kappa();
    let alpha = kappa.total() - k[0] + d as f64 - 1.0;
    let arg = Polynomial::variable(d, 0).scale(2.0).sub(&Polynomial::constant(d, 1.0));
    univariate(&jacobi::power_coeffs(n, alpha, k[0])).compose(&[arg])
}

/// `P_n^{(|kappa| - kappa_{d+1} + d - 1, kappa_{d+1})}(1 - 2|x|)`.
pub fn special_r_e1(n: usize, kappa: &JacobiParams, d: usize) -> Result<Polynomial> {
    check_dim(kappa, d)?;
    let k = kappa.kappa();
    let alpha = kappa.total() - k[d] + d as f64 - 1.0;
    let arg = Polynomial::constant(d, 1.0).sub(&Polynomial::norm1(d).scale(2.0));
    univariate(&jacobi::power_coeffs(n, alpha, k[d])).compose(&[arg])
}

fn check_dim(kappa: &JacobiParams, d: usize) -> Result<()> {
    if kappa.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: kappa.dim() });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    version: u32,
    basis: OrthoBasis,
}

/// On-disk JSON cache of bases keyed by `(d, n, kappa)`.
#[derive(Debug, Clone)]
pub struct BasisCache {
    dir: PathBuf,
}

impl BasisCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn path(&self, kappa: &JacobiParams, n: usize) -> PathBuf {
        let key: Vec<String> = kappa.kappa().iter().map(|k| format!("{:016x}", k.to_bits())).collect();
        self.dir.join(format!("basis-v{CACHE_VERSION}-d{}-n{n}-{}.json", kappa.dim(), key.join("-")))
    }

    pub fn load(&self, kappa: &JacobiParams, n: usize) -> Result<Option<OrthoBasis>> {
        let path = self.path(kappa, n);
        if !path.exists() {
            return Ok(None);
        }
        let entry: CacheEntry = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if entry.version != CACHE_VERSION || entry.basis.kappa != *kappa || entry.basis.max_degree != n {
            return Ok(None);
        }
        Ok(Some(entry.basis))
    }

    pub fn store(&self, basis: &OrthoBasis) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(&basis.kappa, basis.max_degree);
        let entry = CacheEntry { version: CACHE_VERSION, basis: basis.clone() };
        fs::write(&path, serde_json::to_string(&entry)?)?;
        Ok(path)
    }

    /// Loads the basis or builds and stores it.
    pub fn get_or_build(&self, kappa: &JacobiParams, n: usize) -> Result<OrthoBasis> {
        if let Some(b) = self.load(kappa, n)? {
            return Ok(b);
        }
        let basis = build_basis(kappa, n)?;
        self.store(&basis)?;
        Ok(basis)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
