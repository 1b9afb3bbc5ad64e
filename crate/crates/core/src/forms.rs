//! Symmetric bilinear forms built from the spectral operator `D_kappa`,
//! sharp L² Bernstein constants as extremal Rayleigh quotients, and
//! pointwise checks of the three divergence-form decompositions.
//!
//! Forms are assembled from monomial moments in double-double arithmetic.
//! A factor `1/|x|` only lowers the radial Beta exponent of a Dirichlet
//! moment, so `int x^g W/|x| = m(g) (s + k) / (s - 1)` with
//! `s = |g| + kappa_1 + ... + kappa_d + d` and `k = kappa_{d+1}`; the factor
//! `1/(1 - x_l)` is the same after exchanging `x_l` with the slack.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::basis::{build_basis, special_p_e1, special_r_e1, OrthoBasis};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::measure::{MomentTable, SimplexPoint};
use crate::par;
use crate::poly::{monomials, rank_of, space_dim, JacobiParams, Polynomial};

/// Largest degree accepted by [`sharp_constant`].
pub const MAX_SHARP_DEGREE: usize = 10;

/// Smallest barycentric coordinate allowed for pointwise identity samples.
pub const INTERIOR_MARGIN: f64 = 0.05;

/// A positive semi-definite form `B(f, g)` on polynomials. Indices are
/// 1-based; `d + 1` never appears (the slack enters through `1 - |x|`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FormKind {
    /// `sum_i DiagTerm(i) + sum_{i<j} PairTerm(i, j)`.
    Classical,
    /// `RadialTerm + sum_{i<j} RadialPairTerm(i, j)`.
    Radial,
    /// `AxisMainTerm(l) + sum_{i != l} AxisDiagTerm(l, i) + sum AxisPairTerm(l, i, j)`.
    Axis(usize),
    /// `x_i (1-|x|) d_i f d_i g`.
    DiagTerm(usize),
    /// `x_i x_j d_{i,j} f d_{i,j} g` with `d_{i,j} = d_i - d_j`.
    PairTerm(usize, usize),
    /// `(1-|x|) Ef Eg / |x|`, `E = <x, grad>`.
    RadialTerm,
    /// `x_i x_j d_{i,j} f d_{i,j} g / |x|`.
    RadialPairTerm(usize, usize),
    /// `x_l (E - d_l) f (E - d_l) g / (1 - x_l)`.
    AxisMainTerm(usize),
    /// `x_i (1-|x|) d_i f d_i g / (1 - x_l)`.
    AxisDiagTerm(usize, usize),
    /// `x_i x_j d_{i,j} f d_{i,j} g / (1 - x_l)`.
    AxisPairTerm(usize, usize, usize),
}

impl FormKind {
    /// Expands composite kinds into single terms, validating indices.
    pub fn terms(&self, d: usize) -> Result<Vec<FormKind>> {
        use FormKind::*;
        self.validate(d)?;
        let pairs = |skip: Option<usize>| {
            let mut out = Vec::new();
            for i in 1..=d {
                for j in (i + 1)..=d {
                    if Some(i) != skip && Some(j) != skip {
                        out.push((i, j));
                    }
                }
            }
            out
        };
        Ok(match *self {
            Classical => (1..=d)
                .map(DiagTerm)
                .chain(pairs(None).into_iter().map(|(i, j)| PairTerm(i, j)))
                .collect(),
            Radial => std::iter::once(RadialTerm)
                .chain(pairs(None).into_iter().map(|(i, j)| RadialPairTerm(i, j)))
                .collect(),
            Axis(l) => std::iter::once(AxisMainTerm(l))
                .chain((1..=d).filter(|i| *i != l).map(|i| AxisDiagTerm(l, i)))
                .chain(pairs(Some(l)).into_iter().map(|(i, j)| AxisPairTerm(l, i, j)))
                .collect(),
            single => vec![single],
        })
    }

    fn validate(&self, d: usize) -> Result<()> {
        use FormKind::*;
        if d < 2 {
            return Err(Error::Unsupported(format!("{self} needs d >= 2, got {d}")));
        }
        let ok = |i: usize| (1..=d).contains(&i);
        let valid = match *self {
            Classical | Radial | RadialTerm => true,
            Axis(l) | AxisMainTerm(l) | DiagTerm(l) => ok(l),
            PairTerm(i, j) | RadialPairTerm(i, j) => ok(i) && ok(j) && i != j,
            AxisDiagTerm(l, i) => ok(l) && ok(i) && l != i,
            AxisPairTerm(l, i, j) => ok(l) && ok(i) && ok(j) && i != j && l != i && l != j,
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{self} is not defined for d = {d}")))
        }
    }

    /// Whether the form carries a `1/|x|` or `1/(1-x_l)` factor.
    pub fn is_singular(&self) -> bool {
        !matches!(self, FormKind::Classical | FormKind::DiagTerm(_) | FormKind::PairTerm(..))
    }

    fn atom(&self, d: usize) -> Atom {
        use FormKind::*;
        let unit = |i: usize| {
            let mut e = vec![0u32; d];
            e[i] += 1;
            e
        };
        let both = |i: usize, j: usize| {
            let mut e = unit(i);
            e[j] += 1;
            e
        };
        // x_i (1 - |x|) = x_i - sum_k x_i x_k
        let diag = |i: usize| {
            let mut w = vec![(1.0, unit(i))];
            w.extend((0..d).map(|k| (-1.0, both(i, k))));
            w
        };
        match *self {
            DiagTerm(i) => Atom { op: Op::Partial(i - 1), weight: diag(i - 1), measure: Measure::Plain },
            PairTerm(i, j) => Atom { op: Op::Pair(i - 1, j - 1), weight: vec![(1.0, both(i - 1, j - 1))], measure: Measure::Plain },
            RadialTerm => {
                let mut w = vec![(1.0, vec![0u32; d])];
                w.extend((0..d).map(|k| (-1.0, unit(k))));
                Atom { op: Op::Euler, weight: w, measure: Measure::InvNorm }
            }
            RadialPairTerm(i, j) => Atom {
                op: Op::Pair(i - 1, j - 1),
                weight: vec![(1.0, both(i - 1, j - 1))],
                measure: Measure::InvNorm,
            },
            AxisMainTerm(l) => Atom {
                op: Op::EulerMinus(l - 1),
                weight: vec![(1.0, unit(l - 1))],
                measure: Measure::InvAxis(l - 1),
            },
            AxisDiagTerm(l, i) => Atom { op: Op::Partial(i - 1), weight: diag(i - 1), measure: Measure::InvAxis(l - 1) },
            AxisPairTerm(l, i, j) => Atom {
                op: Op::Pair(i - 1, j - 1),
                weight: vec![(1.0, both(i - 1, j - 1))],
                measure: Measure::InvAxis(l - 1),
            },
            Classical | Radial | Axis(_) => unreachable!("composite kinds are expanded before use"),
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FormKind::*;
        match self {
            Classical => write!(f, "classical"),
            Radial => write!(f, "radial"),
            Axis(l) => write!(f, "axis({l})"),
            DiagTerm(i) => write!(f, "diag({i})"),
            PairTerm(i, j) => write!(f, "pair({i},{j})"),
            RadialTerm => write!(f, "radial-main"),
            RadialPairTerm(i, j) => write!(f, "radial-pair({i},{j})"),
            AxisMainTerm(l) => write!(f, "axis-main({l})"),
            AxisDiagTerm(l, i) => write!(f, "axis-diag({l},{i})"),
            AxisPairTerm(l, i, j) => write!(f, "axis-pair({l},{i},{j})"),
        }
    }
}

impl FromStr for FormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use FormKind::*;
        let bad = || Error::InvalidParameter(format!("unknown form '{s}'"));
        let (name, args) = match s.find('(') {
            Some(p) if s.ends_with(')') => (&s[..p], &s[p + 1..s.len() - 1]),
            Some(_) => return Err(bad()),
            None => (s, ""),
        };
        let idx: Vec<usize> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(|a| a.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
        };
        Ok(match (name, idx.as_slice()) {
            ("classical", []) => Classical,
            ("radial", []) => Radial,
            ("axis", [l]) => Axis(*l),
            ("diag", [i]) => DiagTerm(*i),
            ("pair", [i, j]) => PairTerm(*i, *j),
            ("radial-main", []) => RadialTerm,
            ("radial-pair", [i, j]) => RadialPairTerm(*i, *j),
            ("axis-main", [l]) => AxisMainTerm(*l),
            ("axis-diag", [l, i]) => AxisDiagTerm(*l, *i),
            ("axis-pair", [l, i, j]) => AxisPairTerm(*l, *i, *j),
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Partial(usize),
    Pair(usize, usize),
    Euler,
    EulerMinus(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Measure {
    Plain,
    InvNorm,
    InvAxis(usize),
}

struct Atom {
    op: Op,
    weight: Vec<(f64, Vec<u32>)>,
    measure: Measure,
}

// image of x^a under a first-order operator, as (integer coefficient, exponent)
fn op_terms(op: Op, a: &[u32]) -> Vec<(f64, Vec<u32>)> {
    let partial = |i: usize, sign: f64, out: &mut Vec<(f64, Vec<u32>)>| {
        if a[i] > 0 {
            let mut e = a.to_vec();
            e[i] -= 1;
            out.push((sign * a[i] as f64, e));
        }
    };
    let total: u32 = a.iter().sum();
    let mut out = Vec::with_capacity(2);
    match op {
        Op::Partial(i) => partial(i, 1.0, &mut out),
        Op::Pair(i, j) => {
            partial(i, 1.0, &mut out);
            partial(j, -1.0, &mut out);
        }
        Op::Euler => {
            if total > 0 {
                out.push((total as f64, a.to_vec()));
            }
        }
        Op::EulerMinus(l) => {
            if total > 0 {
                out.push((total as f64, a.to_vec()));
            }
            partial(l, -1.0, &mut out);
        }
    }
    out
}

/// Moments of every monomial up to `table.degree()` under one measure.
fn measure_moments(table: &MomentTable, measure: Measure) -> Result<Vec<Dd>> {
    let kappa = table.kappa();
    let k = kappa.kappa();
    let d = kappa.dim();
    let set = monomials(d, table.degree());
    let plain = (0..set.len()).map(|r| table.get_dd(r));
    match measure {
        Measure::Plain => Ok(plain.collect()),
        Measure::InvNorm => {
            let base = k[..d].iter().fold(Dd::new(d as f64), |acc, v| acc + Dd::new(*v));
            plain
                .zip(&set.totals)
                .map(|(m, t)| {
                    let s = base + Dd::new(*t as f64);
                    beta_shift(m, s, Dd::new(k[d]))
                })
                .collect()
        }
        Measure::InvAxis(l) => {
            let base = k
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != l)
                .fold(Dd::new(d as f64), |acc, (_, v)| acc + Dd::new(*v));
            plain
                .zip(set.exponents.iter().zip(&set.totals))
                .map(|(m, (e, t))| {
                    let s = base + Dd::new((*t - e[l]) as f64);
                    beta_shift(m, s, Dd::sum(k[l], e[l] as f64))
                })
                .collect()
        }
    }
}

// int r^{s-2}(1-r)^k / int r^{s-1}(1-r)^k = (s + k) / (s - 1)
fn beta_shift(m: Dd, s: Dd, k: Dd) -> Result<Dd> {
    let denom = s - Dd::ONE;
    if denom.to_f64() <= 0.0 {
        return Err(Error::Unsupported("singular factor is not integrable for these exponents".into()));
    }
    Ok(m * ((s + k) / denom))
}

/// Gram matrix of a sum of forms over the graded monomials of degree `<= n`.
struct MonomialGram {
    size: usize,
    values: Vec<Dd>,
}

impl MonomialGram {
    fn new(kinds: &[FormKind], kappa: &JacobiParams, n: usize) -> Result<Self> {
        let d = kappa.dim();
        let mut atoms = Vec::new();
        for kind in kinds {
            if kind.is_singular() {
                kappa.require_nonnegative()?;
            }
            atoms.extend(kind.terms(d)?.iter().map(|t| t.atom(d)));
        }
        let set = monomials(d, n);
        let size = set.len();
        let table = MomentTable::new(kappa, 2 * n + 2)?;
        let mut measures: Vec<(Measure, Vec<Dd>)> = Vec::new();
        for atom in &atoms {
            if !measures.iter().any(|(m, _)| *m == atom.measure) {
                measures.push((atom.measure, measure_moments(&table, atom.measure)?));
            }
        }
        let moment_of = |m: Measure| &measures.iter().find(|(x, _)| *x == m).expect("measure table").1;
        let images: Vec<Vec<Vec<(f64, Vec<u32>)>>> = atoms
            .iter()
            .map(|atom| set.exponents.iter().map(|a| op_terms(atom.op, a)).collect())
            .collect();

        let rows = par::map_range(size, |a| {
            let mut e = vec![0u32; d];
            let mut row = vec![Dd::ZERO; a + 1];
            for (atom, image) in atoms.iter().zip(&images) {
                let mom = moment_of(atom.measure);
                for (b, slot) in row.iter_mut().enumerate() {
                    let mut acc = Dd::ZERO;
                    for (p, ea) in &image[a] {
                        for (q, eb) in &image[b] {
                            for (r, ew) in &atom.weight {
                                for k in 0..d {
                                    e[k] = ea[k] + eb[k] + ew[k];
                                }
                                acc = acc + mom[rank_of(&e)].mul_f64(p * q * r);
                            }
                        }
                    }
                    *slot = *slot + acc;
                }
            }
            row
        });
        let mut values = vec![Dd::ZERO; size * size];
        for (a, row) in rows.into_iter().enumerate() {
            for (b, v) in row.into_iter().enumerate() {
                values[a * size + b] = v;
                values[b * size + a] = v;
            }
        }
        Ok(Self { size, values })
    }

    fn bilinear(&self, f: &[f64], g: &[f64]) -> f64 {
        let mut acc = Dd::ZERO;
        for (a, fa) in f.iter().enumerate().filter(|(_, c)| **c != 0.0) {
            for (b, gb) in g.iter().enumerate().filter(|(_, c)| **c != 0.0) {
                acc = acc + Dd::prod(*fa, *gb) * self.values[a * self.size + b];
            }
        }
        acc.to_f64()
    }
}

fn check_pair(f: &Polynomial, g: &Polynomial, kappa: &JacobiParams) -> Result<usize> {
    for p in [f, g] {
        if p.dim() != kappa.dim() {
            return Err(Error::DimensionMismatch { expected: kappa.dim(), got: p.dim() });
        }
    }
    Ok(f.degree().max(g.degree()))
}

fn padded(p: &Polynomial, n: usize) -> Vec<f64> {
    let mut c = p.coeffs().to_vec();
    c.resize(space_dim(p.dim(), n), 0.0);
    c.truncate(space_dim(p.dim(), n));
    c
}

/// `B(f, g)` for the given form, normalized by `b_kappa`.
pub fn form_value(kind: FormKind, f: &Polynomial, g: &Polynomial, kappa: &JacobiParams) -> Result<f64> {
    forms_value(&[kind], f, g, kappa)
}

/// Sum of several forms at `(f, g)`.
pub fn forms_value(kinds: &[FormKind], f: &Polynomial, g: &Polynomial, kappa: &JacobiParams) -> Result<f64> {
    let n = check_pair(f, g, kappa)?;
    let gram = MonomialGram::new(kinds, kappa, n)?;
    Ok(gram.bilinear(&padded(f, n), &padded(g, n)))
}

/// `B(f, f) / <f, f>_kappa` summed over `kinds`.
pub fn rayleigh_quotient(kinds: &[FormKind], f: &Polynomial, kappa: &JacobiParams) -> Result<f64> {
    let norm = crate::measure::inner_product(f, f, kappa)?;
    if norm <= 0.0 {
        return Err(Error::InvalidParameter("zero polynomial has no Rayleigh quotient".into()));
    }
    Ok(forms_value(kinds, f, f, kappa)? / norm)
}

/// `-<D_kappa f, g>_kappa`, from `D x^a = -lambda_|a| x^a + sum_i a_i (a_i + kappa_i) x^{a - e_i}`.
pub fn spectral_pairing(f: &Polynomial, g: &Polynomial, kappa: &JacobiParams) -> Result<f64> {
    let n = check_pair(f, g, kappa)?;
    let d = kappa.dim();
    let k = kappa.kappa();
    let table = MomentTable::new(kappa, 2 * n)?;
    let set = monomials(d, n);
    let shift = k.iter().fold(Dd::new(d as f64), |acc, v| acc + Dd::new(*v));
    let (fc, gc) = (padded(f, n), padded(g, n));
    let mut e = vec![0u32; d];
    let mut acc = Dd::ZERO;
    for (ea, ca) in set.exponents.iter().zip(&fc).filter(|(_, c)| **c != 0.0) {
        let t = set.totals[rank_of(ea)] as f64;
        let lambda = (shift + Dd::new(t)).mul_f64(t);
        for (eb, cb) in set.exponents.iter().zip(&gc).filter(|(_, c)| **c != 0.0) {
            let c = Dd::prod(*ca, *cb);
            for j in 0..d {
                e[j] = ea[j] + eb[j];
            }
            let mut term = lambda * table.get_dd(rank_of(&e));
            for i in 0..d {
                if ea[i] == 0 {
                    continue;
                }
                e[i] -= 1;
                let coef = Dd::sum(ea[i] as f64, k[i]).mul_f64(ea[i] as f64);
                term = term - coef * table.get_dd(rank_of(&e));
                e[i] += 1;
            }
            acc = acc + c * term;
        }
    }
    Ok(acc.to_f64())
}

/// The three divergence-form decompositions of `D_kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decomposition {
    /// `sum_i d_i(x_i(1-|x|) W d_i) + sum_{i<j} d_{i,j}(x_i x_j W d_{i,j})`, over `W`.
    Symmetric,
    /// Radial split through `<x, grad>` and `|x|`.
    Radial,
    /// Split through `<x, grad> - d_l` and `1 - x_l` (1-based `l`).
    Axis(usize),
}

impl Decomposition {
    /// The form whose integral identity this decomposition yields.
    pub fn form(&self) -> FormKind {
        match *self {
            Decomposition::Symmetric => FormKind::Classical,
            Decomposition::Radial => FormKind::Radial,
            Decomposition::Axis(l) => FormKind::Axis(l),
        }
    }

    /// Every decomposition for dimension `d`.
    pub fn all(d: usize) -> Vec<Decomposition> {
        let mut out = vec![Decomposition::Symmetric, Decomposition::Radial];
        out.extend((1..=d).map(Decomposition::Axis));
        out
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decomposition::Symmetric => write!(f, "symmetric"),
            Decomposition::Radial => write!(f, "radial"),
            Decomposition::Axis(l) => write!(f, "axis({l})"),
        }
    }
}

/// `|-<D f, g> - B(f, g)| / (1 + |<D f, g>|)` for the decomposition's form.
pub fn verify_integral_identity(
    which: Decomposition,
    f: &Polynomial,
    g: &Polynomial,
    kappa: &JacobiParams,
) -> Result<f64> {
    let lhs = spectral_pairing(f, g, kappa)?;
    let rhs = form_value(which.form(), f, g, kappa)?;
    Ok((lhs - rhs).abs() / (1.0 + lhs.abs()))
}

// d_i log W and d_{i,j} log W at an interior point
struct LogWeight<'a> {
    k: &'a [f64],
    x: &'a [f64],
    slack: f64,
}

impl LogWeight<'_> {
    fn d(&self, i: usize) -> f64 {
        self.k[i] / self.x[i] - self.k[self.x.len()] / self.slack
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        self.k[i] / self.x[i] - self.k[j] / self.x[j]
    }
}

// flux polynomial A d f and its divergence d(A d f)
struct Piece {
    flux: Polynomial,
    div: Polynomial,
}

fn diag_piece(f: &Polynomial, i: usize) -> Result<Piece> {
    let d = f.dim();
    let flux = f.partial(i)?.mul_variable(i).mul(&Polynomial::slack(d));
    let div = flux.partial(i)?;
    Ok(Piece { flux, div })
}

fn pair_piece(f: &Polynomial, i: usize, j: usize) -> Result<Piece> {
    let flux = f.diff_pair(i, j)?.mul_variable(i).mul_variable(j);
    let div = flux.diff_pair(i, j)?;
    Ok(Piece { flux, div })
}

/// Maximum over `samples` of `|D f - rhs| / max(1, max |D f|)` where `rhs`
/// is the decomposition evaluated pointwise with the derivatives of
/// `W_kappa` expanded analytically.
pub fn verify_operator_identity(
    which: Decomposition,
    f: &Polynomial,
    kappa: &JacobiParams,
    samples: &[SimplexPoint],
) -> Result<f64> {
    let d = kappa.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
    }
    which.form().validate(d)?;
    for x in samples {
        if x.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.dim() });
        }
        if x.min_barycentric() < INTERIOR_MARGIN - 1e-12 {
            return Err(Error::BoundaryPoint(format!("{:?}", x.barycentric())));
        }
    }
    let lhs_poly = f.apply_spectral(kappa)?;
    let k = kappa.kappa();
    let skip = match which {
        Decomposition::Axis(l) => Some(l - 1),
        _ => None,
    };
    let diags: Vec<(usize, Piece)> = match which {
        Decomposition::Radial => Vec::new(),
        _ => (0..d).filter(|i| Some(*i) != skip).map(|i| Ok((i, diag_piece(f, i)?))).collect::<Result<_>>()?,
    };
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            if Some(i) != skip && Some(j) != skip {
                pairs.push((i, j, pair_piece(f, i, j)?));
            }
        }
    }
    // H and its image under the radial (or axis) first-order operator
    let main = match which {
        Decomposition::Symmetric => None,
        Decomposition::Radial => {
            let h = f.euler().mul(&Polynomial::slack(d));
            let eh = h.euler();
            Some((h, eh))
        }
        Decomposition::Axis(l) => {
            let h = f.euler_minus_partial(l - 1)?.mul_variable(l - 1);
            let fh = h.euler_minus_partial(l - 1)?;
            Some((h, fh))
        }
    };

    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for x in samples {
        let xs = x.coords();
        let lw = LogWeight { k, x: xs, slack: x.slack() };
        let lhs = lhs_poly.eval(xs);
        let mut sum = 0.0;
        for (i, p) in &diags {
            sum += p.div.eval(xs) + p.flux.eval(xs) * lw.d(*i);
        }
        for (i, j, p) in &pairs {
            sum += p.div.eval(xs) + p.flux.eval(xs) * lw.pair(*i, *j);
        }
        let rhs = match (which, &main) {
            (Decomposition::Symmetric, _) => sum,
            (Decomposition::Radial, Some((h, eh))) => {
                let norm = 1.0 - x.slack();
                let e_log_w = k[..d].iter().sum::<f64>() - k[d] * norm / x.slack();
                let hv = h.eval(xs);
                ((d as f64 - 1.0) * hv + hv * e_log_w + eh.eval(xs) + sum) / norm
            }
            (Decomposition::Axis(l), Some((h, fh))) => {
                let l = l - 1;
                let f_log_w = (0..d).map(|i| xs[i] * lw.d(i)).sum::<f64>() - lw.d(l);
                let hv = h.eval(xs);
                ((d as f64 - 1.0) * hv + hv * f_log_w + fh.eval(xs) + sum) / (1.0 - xs[l])
            }
            _ => unreachable!("non-symmetric decompositions carry a main term"),
        };
        scale = scale.max(lhs.abs());
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst / scale)
}

/// Extremal Rayleigh quotient of a form sum over `Pi_n`.
#[derive(Debug, Clone, Serialize)]
pub struct SharpConstant {
    pub n: usize,
    pub lambda_max: f64,
    /// `n (n + |kappa| + d)`.
    pub lambda_n: f64,
    /// Eigenvalues within `1e-8` (relative) of the maximum.
    pub multiplicity: usize,
    /// Largest norm of the `Pi_{n-1}` component over an orthonormal basis of
    /// the top eigenspace.
    pub lower_projection: f64,
    /// Coefficients of the maximizer in the orthonormal basis (graded order).
    pub argmax_coeffs: Vec<f64>,
    #[serde(skip)]
    pub argmax: Polynomial,
}

impl SharpConstant {
    /// `|lambda_max - lambda_n| / max(lambda_n, 1)`.
    pub fn relative_error(&self) -> f64 {
        (self.lambda_max - self.lambda_n).abs() / self.lambda_n.max(1.0)
    }
}

/// Largest eigenvalue of the summed forms in an orthonormal basis of `Pi_n`.
pub fn sharp_constant(kinds: &[FormKind], n: usize, kappa: &JacobiParams) -> Result<SharpConstant> {
    if n > MAX_SHARP_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: n, max: MAX_SHARP_DEGREE });
    }
    let basis = build_basis(kappa, n)?;
    sharp_constant_in(kinds, &basis, n)
}

/// As [`sharp_constant`] with a prebuilt basis of degree `>= n`.
pub fn sharp_constant_in(kinds: &[FormKind], basis: &OrthoBasis, n: usize) -> Result<SharpConstant> {
    if n > basis.max_degree {
        return Err(Error::DegreeOutOfRange { degree: n, max: basis.max_degree });
    }
    let kappa = &basis.kappa;
    let d = kappa.dim();
    let gram = MonomialGram::new(kinds, kappa, n)?;
    let size = gram.size;
    let elems = basis.elements(n);
    let q: Vec<Vec<f64>> = elems.iter().map(|u| padded(u, n)).collect();

    // A = Q^T G Q, accumulated in double-double
    let gq: Vec<Vec<Dd>> = par::map_range(size, |a| {
        let row = &gram.values[a * size..(a + 1) * size];
        q.iter()
            .map(|col| {
                row.iter()
                    .zip(col)
                    .filter(|(_, c)| **c != 0.0)
                    .fold(Dd::ZERO, |acc, (g, c)| acc + g.mul_f64(*c))
            })
            .collect()
    });
    let rows: Vec<Vec<f64>> = par::map_range(size, |k| {
        (0..size)
            .map(|l| {
                q[k].iter()
                    .zip(&gq)
                    .filter(|(c, _)| **c != 0.0)
                    .fold(Dd::ZERO, |acc, (c, h)| acc + h[l].mul_f64(*c))
                    .to_f64()
            })
            .collect()
    });
    let a = DMatrix::from_fn(size, size, |i, j| 0.5 * (rows[i][j] + rows[j][i]));
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigen(format!("no convergence for n = {n}, size {size}")))?;
    let (top, lambda_max) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let tol = 1e-8 * lambda_max.abs().max(1.0);
    let top_space: Vec<usize> = (0..size).filter(|i| eig.eigenvalues[*i] >= lambda_max - tol).collect();
    let lower = if n == 0 { 0 } else { space_dim(d, n - 1) };
    let lower_projection = top_space
        .iter()
        .map(|&i| eig.eigenvectors.column(i).rows(0, lower).norm())
        .fold(0.0, f64::max);
    let mut argmax_coeffs: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    // fix the sign so the largest component is positive
    let pivot = argmax_coeffs.iter().copied().fold(0.0, |m: f64, c| if c.abs() > m.abs() { c } else { m });
    if pivot < 0.0 {
        argmax_coeffs.iter_mut().for_each(|c| *c = -*c);
    }
    let mut argmax = Polynomial::zero(d, n);
    for (c, u) in argmax_coeffs.iter().zip(elems) {
        argmax = argmax.axpy(*c, u);
    }
    Ok(SharpConstant {
        n,
        lambda_max,
        lambda_n: kappa.lambda(n),
        multiplicity: top_space.len(),
        lower_projection,
        argmax_coeffs,
        argmax,
    })
}

/// Rayleigh quotient of an explicit extremal polynomial under a form set.
#[derive(Debug, Clone, Serialize)]
pub struct EqualityCase {
    pub candidate: String,
    pub forms: String,
    pub n: usize,
    pub quotient: f64,
    pub lambda_n: f64,
    pub relative_error: f64,
}

/// Quotients of `P_{e1}` and `R_{e1}` under the forms for which they are
/// extremal: `R_{e1}` under the diagonal sum and under the radial main term,
/// `P_{e1}` under the first-coordinate classical terms and under the first
/// axis main term.
pub fn equality_case_report(n: usize, kappa: &JacobiParams, d: usize) -> Result<Vec<EqualityCase>> {
    if n > MAX_SHARP_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: n, max: MAX_SHARP_DEGREE });
    }
    kappa.require_nonnegative()?;
    let p = special_p_e1(n, kappa, d)?;
    let r = special_r_e1(n, kappa, d)?;
    let diag_sum: Vec<FormKind> = (1..=d).map(FormKind::DiagTerm).collect();
    let first: Vec<FormKind> = std::iter::once(FormKind::DiagTerm(1))
        .chain((2..=d).map(|j| FormKind::PairTerm(1, j)))
        .collect();
    let cases: [(&str, &Polynomial, Vec<FormKind>); 4] = [
        ("R_e1", &r, diag_sum),
        ("P_e1", &p, first),
        ("R_e1", &r, vec![FormKind::RadialTerm]),
        ("P_e1", &p, vec![FormKind::AxisMainTerm(1)]),
    ];
    let lambda_n = kappa.lambda(n);
    cases
        .iter()
        .map(|(name, f, kinds)| {
            let quotient = rayleigh_quotient(kinds, f, kappa)?;
            Ok(EqualityCase {
                candidate: name.to_string(),
                forms: kinds.iter().map(ToString::to_string).collect::<Vec<_>>().join("+"),
                n,
                quotient,
                lambda_n,
                relative_error: (quotient - lambda_n).abs() / lambda_n.max(1.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::build_axis_cubature;
    use crate::measure::build_cubature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Polynomial {
        let len = space_dim(d, n);
        Polynomial::from_coeffs(d, n, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn interior_samples(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<SimplexPoint> {
        let mut out = Vec::new();
        while out.len() < count {
            let x = SimplexPoint::random(d, rng);
            if x.min_barycentric() >= INTERIOR_MARGIN {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn hand_anchor() {
        let k = JacobiParams::lebesgue(2);
        let p = Polynomial::from_terms(2, &[(&[1, 0], 3.0), (&[0, 0], -1.0)]).unwrap();
        assert!((form_value(FormKind::Classical, &p, &p, &k).unwrap() - 1.5).abs() < 1e-15);
        let r = Polynomial::from_terms(2, &[(&[1, 0], -3.0), (&[0, 1], -3.0), (&[0, 0], 2.0)]).unwrap();
        assert!((form_value(FormKind::Classical, &r, &r, &k).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(form_value(FormKind::PairTerm(1, 2), &r, &r, &k).unwrap(), 0.0);
        assert!((rayleigh_quotient(&[FormKind::Classical], &p, &k).unwrap() - 3.0).abs() < 1e-14);
        assert!((verify_integral_identity(Decomposition::Radial, &r, &r, &k).unwrap()) < 1e-15);
        assert!((form_value(FormKind::Radial, &r, &r, &k).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn constants_have_zero_form() {
        let k = JacobiParams::new(vec![0.5, 1.0, 2.0]).unwrap();
        let one = Polynomial::constant(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_poly(2, 4, &mut rng);
        for kind in [FormKind::Classical, FormKind::Radial, FormKind::Axis(1), FormKind::Axis(2)] {
            assert_eq!(form_value(kind, &one, &g, &k).unwrap(), 0.0);
        }
    }

    #[test]
    fn singular_moments_match_shifted_cubature() {
        let k = JacobiParams::new(vec![0.5, 1.0, 0.0, 2.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_poly(3, 4, &mut rng);
        let g = random_poly(3, 3, &mut rng);
        let radial = build_cubature(&k, 10, -1.0).unwrap();
        let oracle = |cub: &crate::measure::Cubature, weight: &dyn Fn(&SimplexPoint) -> f64, op: &dyn Fn(&Polynomial) -> Polynomial| {
            let (fv, gv) = (cub.values(&op(&f)), cub.values(&op(&g)));
            cub.nodes.iter().zip(&cub.weights).zip(fv.iter().zip(&gv)).map(|((x, w), (a, b))| w * a * b * weight(x)).sum::<f64>()
        };
        let expect = oracle(&radial, &|x| x.slack(), &|p| p.euler());
        let got = form_value(FormKind::RadialTerm, &f, &g, &k).unwrap();
        assert!((got - expect).abs() < 1e-11 * (1.0 + expect.abs()), "{got} vs {expect}");

        let expect = oracle(&radial, &|x| x.coords()[0] * x.coords()[2], &|p| p.diff_pair(0, 2).unwrap());
        let got = form_value(FormKind::RadialPairTerm(1, 3), &f, &g, &k).unwrap();
        assert!((got - expect).abs() < 1e-11 * (1.0 + expect.abs()), "{got} vs {expect}");

        for l in 0..3 {
            let axis = build_axis_cubature(&k, 10, l, -1.0).unwrap();
            let expect = oracle(&axis, &|x| x.coords()[l], &|p| p.euler_minus_partial(l).unwrap());
            let got = form_value(FormKind::AxisMainTerm(l + 1), &f, &g, &k).unwrap();
            assert!((got - expect).abs() < 1e-11 * (1.0 + expect.abs()), "{l}: {got} vs {expect}");
            let i = (l + 1) % 3;
            let expect = oracle(&axis, &|x| x.coords()[i] * x.slack(), &|p| p.partial(i).unwrap());
            let got = form_value(FormKind::AxisDiagTerm(l + 1, i + 1), &f, &g, &k).unwrap();
            assert!((got - expect).abs() < 1e-11 * (1.0 + expect.abs()), "{l}: {got} vs {expect}");
        }
    }

    #[test]
    fn classical_terms_match_moment_products() {
        let k = JacobiParams::new(vec![1.0, 0.5, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_poly(2, 4, &mut rng);
        let g = random_poly(2, 4, &mut rng);
        let w = Polynomial::variable(2, 0).mul(&Polynomial::slack(2));
        let expect = crate::measure::inner_product(&f.partial(0).unwrap().mul(&w), &g.partial(0).unwrap(), &k).unwrap();
        let got = form_value(FormKind::DiagTerm(1), &f, &g, &k).unwrap();
        assert!((got - expect).abs() < 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn operator_identities_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k2 = JacobiParams::uniform(2, 1.0).unwrap();
        let samples = interior_samples(2, 40, &mut rng);
        let f = random_poly(2, 6, &mut rng);
        for which in Decomposition::all(2) {
            let res = verify_operator_identity(which, &f, &k2, &samples).unwrap();
            assert!(res <= 1e-9, "{which}: {res}");
        }
        let k3 = JacobiParams::new(vec![0.5, 1.0, 0.0, 2.0]).unwrap();
        let samples = interior_samples(3, 40, &mut rng);
        let f = random_poly(3, 5, &mut rng);
        for which in Decomposition::all(3) {
            let res = verify_operator_identity(which, &f, &k3, &samples).unwrap();
            assert!(res <= 1e-8, "{which}: {res}");
        }
        let c = Polynomial::constant(3, 2.0);
        assert_eq!(verify_operator_identity(Decomposition::Radial, &c, &k3, &samples).unwrap(), 0.0);
    }

    #[test]
    fn boundary_samples_rejected() {
        let k = JacobiParams::lebesgue(2);
        let f = Polynomial::variable(2, 0);
        let x = SimplexPoint::new(vec![0.01, 0.5]).unwrap();
        assert!(matches!(
            verify_operator_identity(Decomposition::Symmetric, &f, &k, &[x]),
            Err(Error::BoundaryPoint(_))
        ));
    }

    #[test]
    fn integral_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kappa in [vec![0.0, 0.0, 0.0], vec![1.0, 0.5, 2.7], vec![0.5, 2.7, 0.0, 1.0]] {
            let k = JacobiParams::new(kappa).unwrap();
            let d = k.dim();
            let f = random_poly(d, 5, &mut rng);
            let g = random_poly(d, 4, &mut rng);
            for which in Decomposition::all(d) {
                let res = verify_integral_identity(which, &f, &g, &k).unwrap();
                assert!(res <= 1e-12, "{which}: {res}");
            }
        }
    }

    #[test]
    fn sharp_constants_full_sets() {
        let k = JacobiParams::new(vec![1.0, 0.0, 2.0]).unwrap();
        let basis = build_basis(&k, 6).unwrap();
        for n in 0..=6 {
            for kind in [FormKind::Classical, FormKind::Radial, FormKind::Axis(1), FormKind::Axis(2)] {
                let s = sharp_constant_in(&[kind], &basis, n).unwrap();
                assert!(s.relative_error() <= 1e-8, "{kind} n={n}: {} vs {}", s.lambda_max, s.lambda_n);
                assert!(s.lower_projection <= 1e-6, "{kind} n={n}: {}", s.lower_projection);
                if n > 0 {
                    assert_eq!(s.multiplicity, n + 1, "{kind} n={n}");
                }
            }
        }
    }

    #[test]
    fn sharp_anchor_and_single_terms() {
        let k = JacobiParams::lebesgue(2);
        let s = sharp_constant(&[FormKind::Classical], 1, &k).unwrap();
        assert!((s.lambda_max - 3.0).abs() < 1e-12);
        assert!(sharp_constant(&[FormKind::Classical], 0, &k).unwrap().lambda_max.abs() < 1e-15);
        let k = JacobiParams::new(vec![0.5, 1.0, 0.0, 2.7]).unwrap();
        let basis = build_basis(&k, 4).unwrap();
        let singles = [
            FormKind::DiagTerm(2),
            FormKind::PairTerm(1, 3),
            FormKind::AxisDiagTerm(3, 1),
            FormKind::AxisPairTerm(2, 1, 3),
            FormKind::RadialPairTerm(1, 2),
            FormKind::RadialTerm,
        ];
        for kind in singles {
            let s = sharp_constant_in(&[kind], &basis, 4).unwrap();
            assert!(s.lambda_max <= s.lambda_n * (1.0 + 1e-8), "{kind}");
        }
    }

    #[test]
    fn weighted_terms_dominate_classical() {
        let k = JacobiParams::new(vec![0.5, 1.0, 0.0, 2.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let f = random_poly(3, 4, &mut rng);
            let diag = form_value(FormKind::DiagTerm(1), &f, &f, &k).unwrap();
            for l in [2, 3] {
                assert!(form_value(FormKind::AxisDiagTerm(l, 1), &f, &f, &k).unwrap() >= diag);
            }
            let pair = form_value(FormKind::PairTerm(1, 2), &f, &f, &k).unwrap();
            assert!(form_value(FormKind::AxisPairTerm(3, 1, 2), &f, &f, &k).unwrap() >= pair);
            assert!(form_value(FormKind::RadialPairTerm(1, 2), &f, &f, &k).unwrap() >= pair);
        }
    }

    #[test]
    fn equality_cases() {
        for (kappa, n) in [(vec![0.0, 0.0, 0.0], 1), (vec![1.0, 0.5, 2.7], 5), (vec![0.5, 1.0, 0.0, 2.7], 4)] {
            let k = JacobiParams::new(kappa).unwrap();
            for row in equality_case_report(n, &k, k.dim()).unwrap() {
                assert!(row.relative_error <= 1e-8, "{row:?}");
            }
        }
    }

    #[test]
    fn form_names_round_trip() {
        for kind in [
            FormKind::Classical,
            FormKind::Axis(2),
            FormKind::PairTerm(1, 3),
            FormKind::RadialTerm,
            FormKind::AxisPairTerm(3, 1, 2),
        ] {
            assert_eq!(kind.to_string().parse::<FormKind>().unwrap(), kind);
        }
        assert!("axis(1,2)".parse::<FormKind>().is_err());
        assert!(FormKind::AxisDiagTerm(1, 1).terms(3).is_err());
    }
}
