//! Weighted L^p norms and empirical Bernstein ratios with the factors
//! `phi_i = sqrt(x_i x_{d+1}) / sqrt(x_i + x_{d+1})` and
//! `phi_{i,j} = sqrt(x_i x_j) / sqrt(x_i + x_j)`, plus the sampling lemmas
//! (maximal function, Marcinkiewicz–Zygmund sums, shrunken domains).

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::basis::{build_basis_with_limit, special_p_e1, special_r_e1, OrthoBasis};
use crate::error::{Error, Result};
use crate::measure::{
    ball_measure, ball_sample_points, build_cubature, default_probe_density, fit_slope, probe_grid,
    separated_set, sphere_distance, DoublingWeightSpec, SimplexPoint,
};
use crate::par;
use crate::poly::{monomials, JacobiParams, Polynomial};

/// Derivative factor of a Bernstein ratio (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Factor {
    /// `phi_i d_i`, `1 <= i <= d`.
    Diag(usize),
    /// `phi_{i,j} (d_i - d_j)`, `1 <= i < j <= d`.
    Pair(usize, usize),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Diag(i) => write!(f, "phi({i})"),
            Self::Pair(i, j) => write!(f, "phi({i},{j})"),
        }
    }
}

impl Factor {
    /// Every factor in dimension `d`.
    pub fn all(d: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (1..=d).map(Self::Diag).collect();
        for i in 1..=d {
            for j in i + 1..=d {
                out.push(Self::Pair(i, j));
            }
        }
        out
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            Self::Diag(i) if (1..=d).contains(&i) => Ok(()),
            Self::Pair(i, j) if 1 <= i && i < j && j <= d => Ok(()),
            Self::Diag(i) => Err(Error::AxisOutOfRange { axis: i, dim: d }),
            Self::Pair(i, j) => Err(Error::InvalidPair(i, j)),
        }
    }

    // 0-based barycentric indices of the two coordinates in the factor
    fn coords(&self, d: usize) -> (usize, usize) {
        match *self {
            Self::Diag(i) => (i - 1, d),
            Self::Pair(i, j) => (i - 1, j - 1),
        }
    }

    /// `r`-fold derivative of `f` along the factor's direction.
    pub fn derivative(&self, f: &Polynomial, r: usize) -> Result<Polynomial> {
        let d = f.dim();
        self.validate(d)?;
        let (i, j) = self.coords(d);
        let mut g = f.clone();
        for _ in 0..r {
            g = g.diff_pair(i, j)?;
        }
        Ok(g)
    }

    /// Factor value at barycentric coordinates (0 where both coordinates vanish).
    pub fn value_at(&self, bary: &[f64]) -> f64 {
        let (i, j) = self.coords(bary.len() - 1);
        phi_pair(bary[i], bary[j])
    }
}

fn phi_pair(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s <= 0.0 {
        0.0
    } else {
        (a.max(0.0) * b.max(0.0)).sqrt() / s.sqrt()
    }
}

/// `phi_i(x)` or `phi_{i,j}(x)`.
pub fn phi(x: &SimplexPoint, which: Factor) -> Result<f64> {
    which.validate(x.dim())?;
    Ok(which.value_at(&x.barycentric()))
}

/// A weighted L^p norm: `p` in `[1, inf]`, `resolution` is the cubature
/// exactness degree for finite `p` and the grid resolution for `p = inf`.
#[derive(Debug, Clone)]
pub struct LpNormSpec {
    pub p: f64,
    pub weight: DoublingWeightSpec,
    pub resolution: usize,
}

impl LpNormSpec {
    pub fn new(p: f64, weight: DoublingWeightSpec, resolution: usize) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
        }
        if resolution == 0 {
            return Err(Error::InvalidParameter("resolution must be positive".into()));
        }
        Ok(Self { p, weight, resolution })
    }

    /// Default resolution for polynomials of degree `n`.
    pub fn for_degree(p: f64, weight: DoublingWeightSpec, n: usize) -> Result<Self> {
        let d = weight.dim();
        let resolution = if p.is_finite() { cubature_degree(n) } else { sup_resolution(d, n) };
        Self::new(p, weight, resolution)
    }
}

/// Cubature exactness degree used for degree-`n` integrands.
pub fn cubature_degree(n: usize) -> usize {
    2 * n + 12
}

/// Barycentric grid resolution used for sup norms of degree-`n` polynomials.
pub fn sup_resolution(d: usize, n: usize) -> usize {
    if d <= 2 {
        (8 * n).max(32)
    } else {
        (4 * n).max(16)
    }
}

/// Nodes with weights for `int g w` (the Gauss rule of the Jacobi part of
/// `w`, times the remaining density factor), or a sup grid (no weights).
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

impl SampleSet {
    /// Integration rule for `w` exact to `degree` on polynomials times the Jacobi part.
    pub fn integration(weight: &DoublingWeightSpec, degree: usize) -> Result<Self> {
        let d = weight.dim();
        let kappa = weight.jacobi_params().cloned().unwrap_or_else(|| JacobiParams::lebesgue(d));
        let rule = build_cubature(&kappa, degree, 0.0)?;
        let b = kappa.b();
        let density = weight.density_fn();
        let points: Vec<Vec<f64>> = rule.nodes.iter().map(SimplexPoint::barycentric).collect();
        let weights = points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * density(x) / (b * kappa.weight_at(x)))
            .collect();
        Ok(Self { points, weights: Some(weights) })
    }

    /// Metric-uniform sup grid (`k / |k|_2` on the sphere side).
    pub fn sup_grid(d: usize, resolution: usize) -> Self {
        let grid = probe_grid(d, resolution);
        Self { points: grid.points().iter().map(SimplexPoint::barycentric).collect(), weights: None }
    }

    /// Affine image of the points in the shrunken simplex `{x_i >= h}`; integration
    /// weights pick up the Jacobian `(1 - (d+1) h)^d` and the density ratio.
    fn shrunk(&self, h: f64, weight: &DoublingWeightSpec, base: &DoublingWeightSpec) -> Self {
        let d = self.points.first().map_or(0, |p| p.len() - 1);
        let s = 1.0 - (d as f64 + 1.0) * h;
        let points: Vec<Vec<f64>> = self.points.iter().map(|x| x.iter().map(|v| h + s * v).collect()).collect();
        let weights = self.weights.as_ref().map(|ws| {
            let (dw, db) = (weight.density_fn(), base.density_fn());
            ws.iter()
                .zip(&self.points)
                .zip(&points)
                .map(|((w, y), x)| w * s.powi(d as i32) * dw(x) / db(y))
                .collect()
        });
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Values of each polynomial at every point, sharing one monomial table.
    pub fn values(&self, polys: &[&Polynomial]) -> Vec<Vec<f64>> {
        let Some(first) = polys.first() else { return Vec::new() };
        let d = first.dim();
        let degree = polys.iter().map(|p| p.degree_bound()).max().unwrap_or(0);
        let set = monomials(d, degree);
        let cols = par::map(&self.points, |x| {
            let mut buf = vec![0.0; set.len()];
            set.fill_values(&x[..d], &mut buf);
            polys.iter().map(|p| p.eval_with(&buf)).collect::<Vec<f64>>()
        });
        (0..polys.len()).map(|k| cols.iter().map(|c| c[k]).collect()).collect()
    }

    /// `||g||_p` from values at the points.
    pub fn norm(&self, values: &[f64], p: f64) -> f64 {
        match &self.weights {
            Some(w) if p.is_finite() => {
                let terms: Vec<f64> = values.iter().zip(w).map(|(v, w)| w * v.abs().powf(p)).collect();
                par::pairwise_sum(&terms).powf(1.0 / p)
            }
            _ => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// `||f||_{w,p}`, with a refinement check: the norm at the stated
/// resolution and at 1.5 times it must agree within 1%.
pub fn lp_norm(f: &Polynomial, spec: &LpNormSpec) -> Result<f64> {
    let fine = (spec.resolution * 3).div_ceil(2);
    let eval = |res: usize| -> Result<f64> {
        let set = if spec.p.is_finite() {
            SampleSet::integration(&spec.weight, res)?
        } else {
            SampleSet::sup_grid(f.dim(), res)
        };
        Ok(set.norm(&set.values(&[f])[0], spec.p))
    };
    let coarse = eval(spec.resolution)?;
    let refined = eval(fine)?;
    let drift = (coarse - refined).abs() / refined.abs().max(f64::MIN_POSITIVE);
    if drift > 0.01 {
        return Err(Error::NonConvergent(drift));
    }
    Ok(refined)
}

/// Orthogonality tolerance of the bases that generate test polynomials.
pub const TEST_BASIS_LIMIT: f64 = 1e-4;

/// Test polynomials for one degree: `random` members of `Pi_n` with i.i.d.
/// standard normal orthonormal-basis coefficients, `top` members of `V_n`
/// (the maximizers of the full classical form set), and the two special
/// polynomials `P_{e1}`, `R_{e1}`.
pub fn test_polynomials(basis: &OrthoBasis, n: usize, random: usize, top: usize, seed: u64) -> Result<Vec<(String, Polynomial)>> {
    let d = basis.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(random + top + 2);
    let elems = basis.elements(n);
    for k in 0..random {
        let mut f = Polynomial::zero(d, n);
        for u in &elems {
            let c: f64 = StandardNormal.sample(&mut rng);
            f = f.axpy(c, u);
        }
        out.push((format!("random{k}"), f));
    }
    let level = basis.level(n)?;
    for k in 0..top {
        let mut f = Polynomial::zero(d, n);
        for u in level {
            let c: f64 = StandardNormal.sample(&mut rng);
            f = f.axpy(c, u);
        }
        out.push((format!("top{k}"), f));
    }
    out.push(("P_e1".into(), special_p_e1(n, &basis.kappa, d)?));
    out.push(("R_e1".into(), special_r_e1(n, &basis.kappa, d)?));
    Ok(out)
}

/// Parameters of a Bernstein-ratio sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub d: usize,
    pub n_values: Vec<usize>,
    pub r_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub weights: Vec<DoublingWeightSpec>,
    pub factors: Vec<Factor>,
    pub random_count: usize,
    pub top_count: usize,
    pub seed: u64,
}

impl SweepConfig {
    /// All factors, 50 random and 5 top-level polynomials per degree.
    pub fn new(d: usize, n_values: Vec<usize>, r_values: Vec<usize>, p_values: Vec<f64>, weights: Vec<DoublingWeightSpec>, seed: u64) -> Self {
        Self { d, n_values, r_values, p_values, weights, factors: Factor::all(d), random_count: 50, top_count: 5, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!("d = {} must be >= 2", self.d)));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::InvalidParameter("n values must be nonempty and positive".into()));
        }
        if self.r_values.is_empty() || self.r_values.contains(&0) {
            return Err(Error::InvalidParameter("r values must be nonempty and positive".into()));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(**p >= 1.0)) {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
        }
        if self.p_values.is_empty() || self.weights.is_empty() || self.factors.is_empty() {
            return Err(Error::InvalidParameter("p values, weights and factors must be nonempty".into()));
        }
        for w in &self.weights {
            if w.dim() != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: w.dim() });
            }
        }
        for f in &self.factors {
            f.validate(self.d)?;
        }
        Ok(())
    }
}

/// `||phi^r d^r f||_{w,p} / (n^r ||f||_{w,p})` for one test polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub factor: String,
    pub weight: String,
    pub f_id: String,
    pub ratio: f64,
}

/// Sup of the ratios over the test polynomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSummary {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub factor: String,
    pub weight: String,
    pub sup: f64,
}

/// Least-squares slope of `log sup` against `log n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub r: usize,
    pub p: f64,
    pub factor: String,
    pub weight: String,
    pub slope: f64,
    pub max_sup: f64,
}

/// `||sqrt(x_i x_{d+1}) / sqrt(1 - x_l) d_i f|| <= ||phi_i d_i f||` (p = 2) over the test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationRow {
    pub n: usize,
    pub weight: String,
    pub checked: usize,
    pub violations: usize,
    pub max_quotient: f64,
}

/// Second-order ratios against the product of first-order constants for
/// `w` and for `w* = phi^p w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub n: usize,
    pub p: f64,
    pub factor: String,
    pub weight: String,
    pub sup_second: f64,
    pub c_first: f64,
    pub c_first_aux: f64,
    /// `max_f |ratio_2 - q(w) q(w*)| / ratio_2`; zero up to rounding.
    pub factorization_residual: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    pub summary: Vec<RatioSummary>,
    pub slopes: Vec<SlopeRow>,
    pub domination: Vec<DominationRow>,
    pub iteration: Vec<IterationRow>,
}

impl RatioReport {
    pub fn max_slope(&self) -> f64 {
        self.slopes.iter().map(|s| s.slope).fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Block {
    rows: Vec<RatioRow>,
    domination: Option<DominationRow>,
    iteration: Vec<IterationRow>,
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Runs the sweep. Basis builds are shared per Jacobi part; custom weights
/// draw their test polynomials from the Lebesgue basis.
pub fn bernstein_ratio_sweep(config: &SweepConfig) -> Result<RatioReport> {
    config.validate()?;
    let d = config.d;
    let n_max = *config.n_values.iter().max().expect("validated nonempty");
    let mut bases: BTreeMap<String, OrthoBasis> = BTreeMap::new();
    for w in &config.weights {
        let kappa = w.jacobi_params().cloned().unwrap_or_else(|| JacobiParams::lebesgue(d));
        let key = format!("{:?}", kappa.kappa());
        if !bases.contains_key(&key) {
            bases.insert(key, build_basis_with_limit(&kappa, n_max, TEST_BASIS_LIMIT)?);
        }
    }

    let mut report = RatioReport::default();
    for (wi, w) in config.weights.iter().enumerate() {
        let kappa = w.jacobi_params().cloned().unwrap_or_else(|| JacobiParams::lebesgue(d));
        let basis = &bases[&format!("{:?}", kappa.kappa())];
        for &n in &config.n_values {
            let seed = config.seed ^ ((d as u64) << 48) ^ ((wi as u64) << 32) ^ n as u64;
            let fs = test_polynomials(basis, n, config.random_count, config.top_count, seed)?;
            let block = sweep_block(config, w, n, &fs)?;
            report.rows.extend(block.rows);
            report.domination.extend(block.domination);
            report.iteration.extend(block.iteration);
        }
    }

    let mut sups: BTreeMap<(usize, String, String, usize, String), (f64, usize, f64)> = BTreeMap::new();
    for row in &report.rows {
        let key = (row.r, format!("{:e}", row.p), row.weight.clone(), row.n, row.factor.clone());
        let e = sups.entry(key).or_insert((row.p, row.n, 0.0));
        e.2 = e.2.max(row.ratio);
    }
    for ((r, _, weight, n, factor), (p, _, sup)) in &sups {
        report.summary.push(RatioSummary { n: *n, r: *r, p: *p, factor: factor.clone(), weight: weight.clone(), sup: *sup });
    }
    let mut series: BTreeMap<(usize, String, String, String), (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for s in &report.summary {
        let e = series
            .entry((s.r, format!("{:e}", s.p), s.weight.clone(), s.factor.clone()))
            .or_insert((s.p, Vec::new(), Vec::new()));
        e.1.push((s.n as f64).ln());
        e.2.push(s.sup.ln());
    }
    for ((r, _, weight, factor), (p, x, y)) in series {
        let slope = if x.len() >= 2 { fit_slope(&x, &y) } else { 0.0 };
        let max_sup = y.iter().map(|v| v.exp()).fold(0.0, f64::max);
        report.slopes.push(SlopeRow { r, p, factor, weight, slope, max_sup });
    }
    Ok(report)
}

fn sweep_block(config: &SweepConfig, w: &DoublingWeightSpec, n: usize, fs: &[(String, Polynomial)]) -> Result<Block> {
    let d = config.d;
    let wid = w.id();
    let r_max = *config.r_values.iter().max().expect("validated nonempty");

    // derivative polynomials per (f, factor, r)
    let mut polys: Vec<Polynomial> = Vec::new();
    let mut index: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for (fi, (_, f)) in fs.iter().enumerate() {
        index.insert((fi, usize::MAX, 0), polys.len());
        polys.push(f.clone());
        for (ki, factor) in config.factors.iter().enumerate() {
            let mut g = f.clone();
            for r in 1..=r_max {
                g = factor.derivative(&g, 1)?;
                index.insert((fi, ki, r), polys.len());
                polys.push(g.clone());
            }
        }
        if d >= 3 {
            for i in 1..=d {
                if !index.contains_key(&(fi, usize::MAX - i, 1)) {
                    index.insert((fi, usize::MAX - i, 1), polys.len());
                    polys.push(f.partial(i - 1)?);
                }
            }
        }
    }
    let refs: Vec<&Polynomial> = polys.iter().collect();
    let nf = n as f64;

    let mut rows = Vec::new();
    let mut iteration = Vec::new();
    let mut domination = None;
    let finite: Vec<f64> = config.p_values.iter().copied().filter(|p| p.is_finite()).collect();
    let sets: Vec<(bool, SampleSet)> = {
        let mut v = Vec::new();
        if !finite.is_empty() {
            v.push((true, SampleSet::integration(w, cubature_degree(n))?));
        }
        if config.p_values.iter().any(|p| p.is_infinite()) {
            v.push((false, SampleSet::sup_grid(d, sup_resolution(d, n))));
        }
        v
    };
    for (integrates, set) in &sets {
        let values = set.values(&refs);
        let phis: Vec<Vec<f64>> = config
            .factors
            .iter()
            .map(|k| set.points.iter().map(|x| k.value_at(x)).collect())
            .collect();
        let ps: Vec<f64> = if *integrates { finite.clone() } else { vec![f64::INFINITY] };
        for &p in &ps {
            let mut norms_f = Vec::with_capacity(fs.len());
            for (fi, (fid, _)) in fs.iter().enumerate() {
                let nf_norm = set.norm(&values[index[&(fi, usize::MAX, 0)]], p);
                norms_f.push(nf_norm);
                for (ki, factor) in config.factors.iter().enumerate() {
                    for &r in &config.r_values {
                        let g = &values[index[&(fi, ki, r)]];
                        let h: Vec<f64> = g.iter().zip(&phis[ki]).map(|(v, f)| v * f.powi(r as i32)).collect();
                        let ratio = safe_ratio(set.norm(&h, p), nf.powi(r as i32) * nf_norm);
                        rows.push(RatioRow { n, r, p, factor: factor.to_string(), weight: wid.clone(), f_id: fid.clone(), ratio });
                    }
                }
            }

            // iteration through the auxiliary weight phi^p w
            if *integrates && config.r_values.contains(&1) && config.r_values.contains(&2) {
                let weights = set.weights.as_ref().expect("integration rule");
                for (ki, factor) in config.factors.iter().enumerate() {
                    let aux = SampleSet {
                        points: Vec::new(),
                        weights: Some(weights.iter().zip(&phis[ki]).map(|(w, f)| w * f.powf(p)).collect()),
                    };
                    let (mut c1, mut c1s, mut sup2, mut resid) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
                    for (fi, _) in fs.iter().enumerate() {
                        let g1 = &values[index[&(fi, ki, 1)]];
                        let g2 = &values[index[&(fi, ki, 2)]];
                        let phi_g1: Vec<f64> = g1.iter().zip(&phis[ki]).map(|(v, f)| v * f).collect();
                        let phi_g2: Vec<f64> = g2.iter().zip(&phis[ki]).map(|(v, f)| v * f).collect();
                        let phi2_g2: Vec<f64> = phi_g2.iter().zip(&phis[ki]).map(|(v, f)| v * f).collect();
                        let q0 = safe_ratio(set.norm(&phi_g1, p), nf * norms_f[fi]);
                        let q1 = safe_ratio(aux.norm(&phi_g2, p), nf * aux.norm(g1, p));
                        let r2 = safe_ratio(set.norm(&phi2_g2, p), nf * nf * norms_f[fi]);
                        c1 = c1.max(q0);
                        c1s = c1s.max(q1);
                        sup2 = sup2.max(r2);
                        if r2 > 0.0 {
                            resid = resid.max((r2 - q0 * q1).abs() / r2);
                        }
                    }
                    iteration.push(IterationRow {
                        n,
                        p,
                        factor: factor.to_string(),
                        weight: wid.clone(),
                        sup_second: sup2,
                        c_first: c1,
                        c_first_aux: c1s,
                        factorization_residual: resid,
                    });
                }
            }

            // divisor 1 - x_l against the phi_i divisor x_i + x_{d+1}
            if *integrates && d >= 3 && p == 2.0 {
                let (mut checked, mut violations, mut worst) = (0usize, 0usize, 0.0f64);
                for fi in 0..fs.len() {
                    for i in 1..=d {
                        let g = &values[index[&(fi, usize::MAX - i, 1)]];
                        let rhs: Vec<f64> = g
                            .iter()
                            .zip(&set.points)
                            .map(|(v, x)| v * phi_pair(x[i - 1], x[d]))
                            .collect();
                        let rhs = set.norm(&rhs, 2.0);
                        for l in (1..=d).filter(|l| *l != i) {
                            let lhs: Vec<f64> = g
                                .iter()
                                .zip(&set.points)
                                .map(|(v, x)| v * (x[i - 1] * x[d]).sqrt() / (1.0 - x[l - 1]).sqrt())
                                .collect();
                            let lhs = set.norm(&lhs, 2.0);
                            checked += 1;
                            if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
                                violations += 1;
                            }
                            if rhs > 0.0 {
                                worst = worst.max(lhs / rhs);
                            }
                        }
                    }
                }
                domination = Some(DominationRow { n, weight: wid.clone(), checked, violations, max_quotient: worst });
            }
        }
    }
    Ok(Block { rows, domination, iteration })
}

/// `f*_{beta,n}(x) = max_y |f(y)| / (1 + n d(x, y))^beta` over `grid` and `x` itself.
pub fn maximal_function(f: &Polynomial, beta: f64, n: usize, x: &SimplexPoint, grid: &SampleSet) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    let values = grid.values(&[f]).remove(0);
    let u = x.sphere();
    let sphere: Vec<Vec<f64>> = grid.points.iter().map(|b| b.iter().map(|v| v.max(0.0).sqrt()).collect()).collect();
    Ok(maximal_from(&values, &sphere, &u, f.eval(x.coords()).abs(), beta, n as f64))
}

fn maximal_from(values: &[f64], sphere: &[Vec<f64>], u: &[f64], at_x: f64, beta: f64, n: f64) -> f64 {
    values
        .iter()
        .zip(sphere)
        .fold(at_x, |m, (v, y)| m.max(v.abs() / (1.0 + n * sphere_distance(u, y)).powf(beta)))
}

/// `||f||_{w,p}`, `||f*||_{w,p}` and their quotient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalRow {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub weight: String,
    pub f_id: String,
    pub norm: f64,
    pub maximal_norm: f64,
    pub ratio: f64,
}

/// Norm equivalence for the maximal function at `beta` over the test set.
pub fn maximal_check(n: usize, beta: f64, p: f64, weight: &DoublingWeightSpec, fs: &[(String, Polynomial)]) -> Result<Vec<MaximalRow>> {
    let d = weight.dim();
    let rule = SampleSet::integration(weight, cubature_degree(n))?;
    let grid = SampleSet::sup_grid(d, (4 * n).max(32));
    let sphere: Vec<Vec<f64>> = grid.points.iter().map(|b| b.iter().map(|v| v.max(0.0).sqrt()).collect()).collect();
    let nodes_sphere: Vec<Vec<f64>> = rule.points.iter().map(|b| b.iter().map(|v| v.sqrt()).collect()).collect();
    let mut out = Vec::new();
    for (id, f) in fs {
        let on_grid = grid.values(&[f]).remove(0);
        let at_nodes = rule.values(&[f]).remove(0);
        let star: Vec<f64> = par::map_range(rule.len(), |k| {
            maximal_from(&on_grid, &sphere, &nodes_sphere[k], at_nodes[k].abs(), beta, n as f64)
        });
        let norm = rule.norm(&at_nodes, p);
        let maximal_norm = rule.norm(&star, p);
        out.push(MaximalRow { n, p, beta, weight: weight.id(), f_id: id.clone(), norm, maximal_norm, ratio: maximal_norm / norm });
    }
    Ok(out)
}

/// Empirical Marcinkiewicz–Zygmund constant for one polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MzRow {
    pub n: usize,
    pub delta: f64,
    pub p: f64,
    pub weight: String,
    pub f_id: String,
    pub points: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

/// Radial and angular resolution of the per-ball minimum search.
pub const MZ_BALL_SAMPLES: (usize, usize) = (4, 12);

/// `||f||_p^p <= c sum_y w(B(y, delta/n)) min_{B(y, delta/n)} |f|^p` over a
/// maximal `(delta/n)`-separated set; reports `c = lhs / rhs` per polynomial.
pub fn mz_check(n: usize, delta: f64, p: f64, weight: &DoublingWeightSpec, fs: &[(String, Polynomial)]) -> Result<Vec<MzRow>> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be finite and >= 1")));
    }
    let d = weight.dim();
    let eps = delta / n as f64;
    let set = separated_set(d, eps, default_probe_density(d, eps))?;
    let measures = par::try_map(&set.points, |y| ball_measure(weight, y, eps))?;
    let samples = SampleSet {
        points: set
            .points
            .iter()
            .flat_map(|y| ball_sample_points(y, eps, MZ_BALL_SAMPLES.0, MZ_BALL_SAMPLES.1))
            .collect(),
        weights: None,
    };
    let counts: Vec<usize> = set
        .points
        .iter()
        .map(|y| ball_sample_points(y, eps, MZ_BALL_SAMPLES.0, MZ_BALL_SAMPLES.1).len())
        .collect();
    let rule = SampleSet::integration(weight, cubature_degree(n))?;
    let mut out = Vec::new();
    for (id, f) in fs {
        let lhs = rule.norm(&rule.values(&[f])[0], p).powf(p);
        let vals = samples.values(&[f]).remove(0);
        let mut rhs = 0.0;
        let mut offset = 0;
        for (m, c) in measures.iter().zip(&counts) {
            let min = vals[offset..offset + c].iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
            rhs += m * min.powf(p);
            offset += c;
        }
        out.push(MzRow {
            n,
            delta,
            p,
            weight: weight.id(),
            f_id: id.clone(),
            points: set.len(),
            lhs,
            rhs,
            constant: lhs / rhs,
        });
    }
    Ok(out)
}

/// Norm over the whole simplex against the norm over
/// `{x : delta/n < x_i <= 1 - delta/n, i <= d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkRow {
    pub n: usize,
    pub delta: f64,
    pub p: f64,
    pub weight: String,
    pub f_id: String,
    pub full: f64,
    pub shrunk: f64,
    pub ratio: f64,
}

/// Shrunken-domain ratios `int |f|^p w / int_{shrunk} |f|^p w` (or the sup-norm
/// quotient for `p = inf`).
pub fn shrink_check(n: usize, delta: f64, p: f64, weight: &DoublingWeightSpec, fs: &[(String, Polynomial)]) -> Result<Vec<ShrinkRow>> {
    let d = weight.dim();
    let h = delta / n as f64;
    if !(h > 0.0 && h < 1.0 / (d as f64 + 1.0)) {
        return Err(Error::EmptyDomain { n, delta });
    }
    let (full_set, inner_set) = if p.is_finite() {
        let full = SampleSet::integration(weight, cubature_degree(n))?;
        // the weight is smooth on the shrunken simplex: Lebesgue rule mapped affinely
        let lebesgue = DoublingWeightSpec::jacobi(JacobiParams::lebesgue(d));
        let inner = SampleSet::integration(&lebesgue, cubature_degree(n))?.shrunk(h, weight, &lebesgue);
        (full, inner)
    } else {
        let grid = SampleSet::sup_grid(d, sup_resolution(d, n));
        let inner = grid.shrunk(h, weight, weight);
        (grid, inner)
    };
    let mut out = Vec::new();
    for (id, f) in fs {
        let full = full_set.norm(&full_set.values(&[f])[0], p);
        let shrunk = inner_set.norm(&inner_set.values(&[f])[0], p);
        let (full, shrunk) = if p.is_finite() { (full.powf(p), shrunk.powf(p)) } else { (full, shrunk) };
        out.push(ShrinkRow { n, delta, p, weight: weight.id(), f_id: id.clone(), full, shrunk, ratio: full / shrunk });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::dirichlet_moment;

    #[test]
    fn phi_examples_and_geometry() {
        let x = SimplexPoint::new(vec![0.25, 0.25]).unwrap();
        assert!((phi(&x, Factor::Diag(1)).unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        for t in [0.01, 0.2, 0.45] {
            let x = SimplexPoint::new(vec![t, t]).unwrap();
            assert!((phi(&x, Factor::Pair(1, 2)).unwrap() - (t / 2.0).sqrt()).abs() < 1e-15);
        }
        assert_eq!(phi(&SimplexPoint::vertex(2, 2), Factor::Pair(1, 2)).unwrap(), 0.0);
        assert!(phi(&x, Factor::Pair(2, 1)).is_err());
        assert!(phi(&x, Factor::Diag(3)).is_err());
        // with t = x_i / (x_i + x_j): phi_{ij} = sqrt(x_i + x_j) sqrt(t (1 - t)) exactly, and
        // sqrt(t (1 - t)) <= min(d(t, 0), d(t, 1)) <= pi/2 sqrt(t (1 - t)) in the [0,1] metric
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = SimplexPoint::random(3, &mut rng);
            let b = x.barycentric();
            let (a, c) = (b[0], b[1]);
            let t = a / (a + c);
            let v = phi(&x, Factor::Pair(1, 2)).unwrap();
            assert!((v - (a + c).sqrt() * (t * (1.0 - t)).sqrt()).abs() < 1e-12);
            let dist = |s: f64, u: f64| ((s * u).sqrt() + ((1.0 - s) * (1.0 - u)).sqrt()).min(1.0).acos();
            let m = dist(t, 0.0).min(dist(t, 1.0));
            let q = m / (t * (1.0 - t)).sqrt();
            assert!((1.0 - 1e-9..=std::f64::consts::FRAC_PI_2 + 1e-9).contains(&q), "{q}");
            let s = b[3];
            let ti = b[0] / (b[0] + s);
            let vi = phi(&x, Factor::Diag(1)).unwrap();
            assert!((vi - (b[0] + s).sqrt() * (ti * (1.0 - ti)).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_examples() {
        let w = DoublingWeightSpec::jacobi(JacobiParams::lebesgue(2));
        let one = Polynomial::constant(2, 1.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let spec = LpNormSpec::for_degree(p, w.clone(), 2).unwrap();
            assert!((lp_norm(&one, &spec).unwrap() - 1.0).abs() < 1e-12);
        }
        let f = Polynomial::from_terms(2, &[(&[1, 0], 3.0), (&[0, 0], -1.0)]).unwrap();
        let l2 = lp_norm(&f, &LpNormSpec::for_degree(2.0, w.clone(), 1).unwrap()).unwrap();
        assert!((l2 - 0.5f64.sqrt()).abs() < 1e-12);
        let linf = lp_norm(&f, &LpNormSpec::for_degree(f64::INFINITY, w.clone(), 1).unwrap()).unwrap();
        assert!((linf - 2.0).abs() < 1e-12);
        let l1 = lp_norm(&f.scale(-3.0), &LpNormSpec::for_degree(1.0, w.clone(), 1).unwrap()).unwrap();
        let l1b = lp_norm(&f, &LpNormSpec::for_degree(1.0, w.clone(), 1).unwrap()).unwrap();
        assert!((l1 - 3.0 * l1b).abs() < 1e-12 * l1);
        assert!(LpNormSpec::new(0.5, w, 4).is_err());
    }

    #[test]
    fn weighted_rule_matches_moments() {
        let w = DoublingWeightSpec::jacobi_sine(JacobiParams::new(vec![1.0, 0.5, 0.0]).unwrap());
        let rule = SampleSet::integration(&w, 30).unwrap();
        let total: f64 = rule.weights.as_ref().unwrap().iter().sum();
        // 1 + E[sin(3 x_1)] / 2 from the Taylor series and exact Dirichlet moments
        let kappa = JacobiParams::new(vec![1.0, 0.5, 0.0]).unwrap();
        let mut reference = 1.0;
        let mut term = 3.0;
        for k in 0..20u32 {
            let m = dirichlet_moment(&[2 * k + 1, 0, 0], &kappa).unwrap();
            reference += 0.5 * term * m;
            term *= -9.0 / (((2 * k + 2) * (2 * k + 3)) as f64);
        }
        assert!((total - reference).abs() < 1e-12, "{total} vs {reference}");
    }

    #[test]
    fn sweep_small_and_domination() {
        let weights = vec![
            DoublingWeightSpec::jacobi(JacobiParams::lebesgue(3)),
            DoublingWeightSpec::jacobi_sine(JacobiParams::new(vec![1.0, 0.5, 0.5, 0.5]).unwrap()),
        ];
        let mut config = SweepConfig::new(3, vec![2, 3], vec![1, 2], vec![1.0, 2.0, f64::INFINITY], weights, 9);
        config.random_count = 4;
        config.top_count = 1;
        let report = bernstein_ratio_sweep(&config).unwrap();
        assert!(report.rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0));
        assert!(report.rows.iter().filter(|r| r.f_id.starts_with("random")).all(|r| r.ratio > 0.0));
        assert!(!report.domination.is_empty());
        assert!(report.domination.iter().all(|r| r.violations == 0 && r.checked > 0));
        for it in &report.iteration {
            assert!(it.factorization_residual < 1e-10, "{it:?}");
            assert!(it.sup_second <= 1.1 * it.c_first * it.c_first_aux);
        }
        let again = bernstein_ratio_sweep(&config).unwrap();
        assert_eq!(report.rows, again.rows);
    }

    #[test]
    fn constant_ratio_is_zero() {
        let w = DoublingWeightSpec::jacobi(JacobiParams::lebesgue(2));
        let set = SampleSet::integration(&w, 10).unwrap();
        let c = Polynomial::constant(2, 2.0);
        let g = Factor::Diag(1).derivative(&c, 1).unwrap();
        let v = set.values(&[&g, &c]);
        assert_eq!(safe_ratio(set.norm(&v[0], 2.0), 3.0 * set.norm(&v[1], 2.0)), 0.0);
    }

    #[test]
    fn maximal_function_properties() {
        let grid = SampleSet::sup_grid(2, 24);
        let c = Polynomial::constant(2, -1.5);
        let x = SimplexPoint::new(vec![0.2, 0.3]).unwrap();
        assert!((maximal_function(&c, 2.0, 8, &x, &grid).unwrap() - 1.5).abs() < 1e-15);
        let f = Polynomial::from_terms(2, &[(&[2, 0], 4.0), (&[0, 1], -1.0), (&[0, 0], 0.3)]).unwrap();
        let fx = f.eval(x.coords()).abs();
        let mut prev = f64::INFINITY;
        for beta in [0.5, 1.0, 2.0, 8.0, 50.0] {
            let v = maximal_function(&f, beta, 8, &x, &grid).unwrap();
            assert!(v >= fx && v <= prev);
            prev = v;
        }
        assert!((prev - fx).abs() < 1e-3 * (1.0 + fx));
        assert!(maximal_function(&f, 0.0, 8, &x, &grid).is_err());
    }

    #[test]
    fn shrink_and_mz_constants() {
        let w = DoublingWeightSpec::jacobi(JacobiParams::lebesgue(2));
        let one = vec![("one".to_string(), Polynomial::constant(2, 1.0))];
        let rows = shrink_check(20, 0.01, 2.0, &w, &one).unwrap();
        assert!((rows[0].ratio - 1.0).abs() < 1e-2);
        // exact shrunken volume (1 - 3h)^2 for the Lebesgue weight
        let rows = shrink_check(10, 1.0, 1.0, &w, &one).unwrap();
        assert!((rows[0].shrunk - 0.49).abs() < 1e-12);
        assert!(matches!(shrink_check(2, 1.0, 2.0, &w, &one), Err(Error::EmptyDomain { .. })));
        let mz = mz_check(4, 0.5, 2.0, &w, &one).unwrap();
        assert!((mz[0].lhs - 1.0).abs() < 1e-12);
        assert!(mz[0].rhs >= 1.0 && mz[0].constant <= 1.0);
    }
}
