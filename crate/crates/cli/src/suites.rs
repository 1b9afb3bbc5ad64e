//! The verification suites. Each returns a [`SuiteReport`] of hard checks
//! and detail tables; nothing here touches the filesystem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplex_bernstein::basis::{build_basis, build_basis_with_limit, OrthoBasis};
use simplex_bernstein::forms::{
    equality_case_report, form_value, rayleigh_quotient, sharp_constant_in, verify_integral_identity,
    verify_operator_identity, Decomposition, FormKind, INTERIOR_MARGIN,
};
use simplex_bernstein::kernels::{
    decay_profiles, default_gamma, reproducing_kernel, sample_pairs, stability_ratio, summarize, CutoffFunction,
    KernelConfig, KernelEngine, ESTIMATES,
};
use simplex_bernstein::lp::{
    bernstein_ratio_sweep, maximal_check, mz_check, shrink_check, test_polynomials, SweepConfig, TEST_BASIS_LIMIT,
};
use simplex_bernstein::measure::{build_cubature, inner_product, DoublingWeightSpec};
use simplex_bernstein::poly::space_dim;
use simplex_bernstein::{par, JacobiParams, Polynomial, SimplexPoint};

use crate::config::{kappa_id, RunConfig, SuiteId};
use crate::error::CliResult;
use crate::report::{Check, SuiteReport, Table};

/// Samples per Jacobi parameter for pointwise checks.
pub const POINT_SAMPLES: usize = 64;
/// Largest degree of the reproduction checks.
pub const REPRODUCTION_MAX_DEGREE: usize = 5;
/// Largest degree of the localized-sum checks.
pub const LOCALIZED_MAX_DEGREE: usize = 6;
/// Degrees of the sampling-lemma checks.
pub const SAMPLING_DEGREES: [usize; 3] = [4, 8, 16];
/// Random polynomials per degree in the sampling-lemma checks.
pub const SAMPLING_RANDOM: usize = 20;
/// Separation `delta` (radius `delta / n`) of the sampling inequality.
pub const MZ_DELTA: f64 = 0.5;
/// Margin `delta` (strip `x_i <= delta / n`) of the shrunken domain.
pub const SHRINK_DELTA: f64 = 0.1;
/// Derivative orders of the ratio sweep.
pub const SWEEP_R: [usize; 2] = [1, 2];

pub fn run(config: &RunConfig) -> CliResult<SuiteReport> {
    let (checks, tables) = match config.suite {
        SuiteId::Spectral => spectral(config)?,
        SuiteId::Sharp => sharp(config)?,
        SuiteId::Kernels => kernels(config)?,
        SuiteId::Lp => lp(config)?,
        SuiteId::Render => unreachable!("render reads reports instead of computing them"),
    };
    Ok(SuiteReport { suite: config.suite.name().into(), config: config.to_json(), checks, tables })
}

type Output = (Vec<Check>, Vec<Table>);

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_poly(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let coeffs = (0..space_dim(d, n)).map(|_| rng.random_range(-1.0..1.0)).collect();
    Polynomial::from_coeffs(d, n, coeffs).expect("coefficient count matches")
}

fn interior_samples(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<SimplexPoint> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = SimplexPoint::random(d, rng);
        if x.min_barycentric() >= INTERIOR_MARGIN {
            out.push(x);
        }
    }
    out
}

fn whole_samples(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<SimplexPoint> {
    let mut out: Vec<SimplexPoint> = (0..=d).map(|i| SimplexPoint::vertex(d, i)).collect();
    out.push(SimplexPoint::centroid(d));
    out.extend((0..count).map(|_| SimplexPoint::random(d, rng)));
    out
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// `max_x |D u + lambda_n u| / max_x |u|` over the samples.
pub fn eigen_residual(u: &Polynomial, n: usize, kappa: &JacobiParams, samples: &[SimplexPoint]) -> CliResult<f64> {
    let du = u.apply_spectral(kappa)?;
    let lambda = kappa.lambda(n);
    let scale = max_of(samples.iter().map(|x| u.eval(x.coords()).abs()));
    let err = max_of(samples.iter().map(|x| (du.eval(x.coords()) + lambda * u.eval(x.coords())).abs()));
    Ok(err / scale)
}

fn spectral(config: &RunConfig) -> CliResult<Output> {
    let d = config.d;
    let mut eigen = Table::new("eigen", &["kappa", "n", "index", "residual"]);
    let mut operator = Table::new("operator", &["kappa", "decomposition", "n", "residual"]);
    let mut integral = Table::new("integral", &["kappa", "decomposition", "n", "residual"]);
    let decompositions: Vec<Decomposition> = Decomposition::all(d)
        .into_iter()
        .filter(|dec| match dec {
            Decomposition::Symmetric => config.wants("symmetric"),
            Decomposition::Radial => config.wants("radial"),
            Decomposition::Axis(_) => config.wants("axis"),
        })
        .collect();
    for (ki, kappa) in config.kappas.iter().enumerate() {
        let id = kappa_id(kappa);
        let mut rng = rng_for(config.seed, ki as u64);
        if config.wants("eigen") {
            let basis = build_basis(kappa, config.n_max)?;
            let samples = whole_samples(d, POINT_SAMPLES, &mut rng);
            for n in config.n_min..=config.n_max {
                let level = basis.level(n)?;
                let res = par::try_map(level, |u| eigen_residual(u, n, kappa, &samples))?;
                for (k, r) in res.into_iter().enumerate() {
                    eigen.push(vec![id.clone().into(), n.into(), k.into(), r.into()]);
                }
            }
        }
        let interior = interior_samples(d, POINT_SAMPLES, &mut rng);
        for n in config.n_min.max(1)..=config.n_max {
            let f = random_poly(d, n, &mut rng);
            let g = random_poly(d, n, &mut rng);
            let res = par::try_map(&decompositions, |dec| verify_operator_identity(*dec, &f, kappa, &interior))?;
            for (dec, r) in decompositions.iter().zip(res) {
                operator.push(vec![id.clone().into(), dec.to_string().into(), n.into(), r.into()]);
            }
            if config.wants("integral") {
                let all = Decomposition::all(d);
                let res = par::try_map(&all, |dec| verify_integral_identity(*dec, &f, &g, kappa))?;
                for (dec, r) in all.iter().zip(res) {
                    integral.push(vec![id.clone().into(), dec.to_string().into(), n.into(), r.into()]);
                }
            }
        }
    }
    let mut checks = Vec::new();
    let column_max = |t: &Table| max_of(t.rows.iter().map(|r| float(&r[r.len() - 1])));
    if config.wants("eigen") {
        checks.push(Check::at_most("eigen", column_max(&eigen), config.tol("eigen")));
    }
    if !decompositions.is_empty() {
        checks.push(Check::at_most("operator", column_max(&operator), config.tol("operator")));
    }
    if config.wants("integral") {
        checks.push(Check::at_most("integral", column_max(&integral), config.tol("integral")));
    }
    let tables = [eigen, operator, integral].into_iter().filter(|t| !t.rows.is_empty()).collect();
    Ok((checks, tables))
}

fn float(c: &crate::report::Cell) -> f64 {
    match c {
        crate::report::Cell::Float(v) => *v,
        crate::report::Cell::Int(v) => *v as f64,
        crate::report::Cell::Text(_) => f64::NAN,
    }
}

fn form_sets(d: usize) -> Vec<FormKind> {
    let mut out = vec![FormKind::Classical, FormKind::Radial];
    out.extend((1..=d).map(FormKind::Axis));
    out
}

fn sharp(config: &RunConfig) -> CliResult<Output> {
    let d = config.d;
    let mut constants = Table::new(
        "constants",
        &["kappa", "forms", "n", "lambda_max", "lambda_n", "relative_error", "multiplicity", "lower_projection"],
    );
    let mut equality = Table::new("equality", &["kappa", "candidate", "forms", "n", "quotient", "lambda_n", "relative_error"]);
    let sets = form_sets(d);
    for kappa in &config.kappas {
        let id = kappa_id(kappa);
        let basis: OrthoBasis = build_basis(kappa, config.n_max)?;
        for n in config.n_min..=config.n_max {
            let res = par::try_map(&sets, |kind| sharp_constant_in(&[*kind], &basis, n))?;
            for (kind, s) in sets.iter().zip(res) {
                constants.push(vec![
                    id.clone().into(),
                    kind.to_string().into(),
                    n.into(),
                    s.lambda_max.into(),
                    s.lambda_n.into(),
                    s.relative_error().into(),
                    s.multiplicity.into(),
                    s.lower_projection.into(),
                ]);
            }
            if n >= 1 {
                for e in equality_case_report(n, kappa, d)? {
                    equality.push(vec![
                        id.clone().into(),
                        e.candidate.into(),
                        e.forms.into(),
                        n.into(),
                        e.quotient.into(),
                        e.lambda_n.into(),
                        e.relative_error.into(),
                    ]);
                }
            }
        }
    }
    let col = |t: &Table, k: usize| max_of(t.rows.iter().map(|r| float(&r[k])));
    let mut checks = vec![
        Check::at_most("lambda", col(&constants, 5), config.tol("lambda")),
        Check::at_most("projection", col(&constants, 7), config.tol("projection")),
    ];
    if !equality.rows.is_empty() {
        checks.push(Check::at_most("equality", col(&equality, 6), config.tol("equality")));
    }
    let mut tables = vec![constants, equality];
    if d == 2 && config.kappas.iter().any(|k| k.kappa().iter().all(|v| *v == 0.0)) {
        let (err, table) = anchor()?;
        checks.push(Check::at_most("anchor", err, config.tol("anchor")));
        tables.push(table);
    }
    Ok((checks, tables))
}

/// `f = 3 x_1 - 1`, `d = 2`, `kappa = 0`: form value `3/2`, norm `1/2`, quotient `3`.
fn anchor() -> CliResult<(f64, Table)> {
    let k = JacobiParams::lebesgue(2);
    let f = Polynomial::from_terms(2, &[(&[1, 0], 3.0), (&[0, 0], -1.0)])?;
    let values = [
        ("form_value", form_value(FormKind::Classical, &f, &f, &k)?, 1.5),
        ("norm_squared", inner_product(&f, &f, &k)?, 0.5),
        ("quotient", rayleigh_quotient(&[FormKind::Classical], &f, &k)?, 3.0),
    ];
    let mut table = Table::new("anchor", &["quantity", "value", "expected", "error"]);
    let mut worst: f64 = 0.0;
    for (name, v, e) in values {
        worst = worst.max((v - e).abs());
        table.push(vec![name.into(), v.into(), e.into(), (v - e).abs().into()]);
    }
    Ok((worst, table))
}

fn kernel_points(d: usize, rng: &mut ChaCha8Rng) -> Vec<(String, SimplexPoint)> {
    let mut near_face = vec![0.3; d];
    near_face[0] = 0.01;
    let mut out = vec![
        ("centroid".to_string(), SimplexPoint::centroid(d)),
        ("near-face".to_string(), SimplexPoint::new(near_face).expect("inside the simplex")),
    ];
    out.extend((0..2).map(|k| (format!("random{k}"), SimplexPoint::random(d, rng))));
    out
}

fn kernels(config: &RunConfig) -> CliResult<Output> {
    let d = config.d;
    let mut reproduction = Table::new("reproduction", &["kappa", "x", "n", "m", "index", "error"]);
    let mut localized = Table::new("localized", &["kappa", "x", "y", "n", "value", "cutoff_sum", "relative_error"]);
    let mut profiles = Table::new("profiles", &["kappa", "estimate", "n", "pair", "d_triangle", "lhs", "envelope", "ratio"]);
    let mut constants = Table::new("profile_constants", &["kappa", "estimate", "n", "constant"]);
    let mut stability = Vec::new();
    for (ki, kappa) in config.kappas.iter().enumerate() {
        let id = kappa_id(kappa);
        let mut rng = rng_for(config.seed, ki as u64);
        let points = kernel_points(d, &mut rng);

        if config.wants("reproduction") {
            reproduction_checks(kappa, &id, &points, &mut reproduction, &mut localized)?;
        }
        if !config.wants("profiles") {
            continue;
        }
        let gamma = default_gamma(kappa);
        let mut rows = Vec::new();
        for n in config.doubling_degrees() {
            let kc = KernelConfig::new(n, kappa.clone())?;
            rows.extend(decay_profiles(&kc, &sample_pairs(d, n), gamma, true)?);
        }
        for r in &rows {
            profiles.push(vec![
                id.clone().into(),
                r.estimate.clone().into(),
                r.n.into(),
                r.pair_id.into(),
                r.distance.into(),
                r.lhs.into(),
                r.envelope.into(),
                r.ratio.into(),
            ]);
        }
        let summaries = summarize(&rows);
        for s in &summaries {
            constants.push(vec![id.clone().into(), s.estimate.clone().into(), s.n.into(), s.constant.into()]);
        }
        for est in ESTIMATES {
            let finite = summaries.iter().filter(|s| s.estimate == est).all(|s| s.constant.is_finite() && s.constant > 0.0);
            let ratio = stability_ratio(&summaries, est).unwrap_or(f64::NAN);
            let ratio = if finite { ratio } else { f64::INFINITY };
            stability.push(Check::at_most(format!("stability[{id}][{est}]"), ratio, config.tol("stability")));
        }
    }
    let col = |t: &Table, k: usize| max_of(t.rows.iter().map(|r| float(&r[k])));
    let mut checks = Vec::new();
    if config.wants("reproduction") {
        checks.push(Check::at_most("reproduction", col(&reproduction, 5), config.tol("reproduction")));
        checks.push(Check::at_most("localized", col(&localized, 6), config.tol("localized")));
    }
    checks.extend(stability);
    let tables = [reproduction, localized, profiles, constants].into_iter().filter(|t| !t.rows.is_empty()).collect();
    Ok((checks, tables))
}

/// Addition-formula reproduction on every level up to [`REPRODUCTION_MAX_DEGREE`]
/// and localized kernel against its cutoff sum up to [`LOCALIZED_MAX_DEGREE`].
fn reproduction_checks(
    kappa: &JacobiParams,
    id: &str,
    points: &[(String, SimplexPoint)],
    reproduction: &mut Table,
    localized: &mut Table,
) -> CliResult<()> {
    let cutoff = CutoffFunction::default();
    let top = REPRODUCTION_MAX_DEGREE;
    let basis = build_basis(kappa, top)?;
    let cub = build_cubature(kappa, 2 * top, 0.0)?;
    let values: Vec<Vec<Vec<f64>>> = (0..=top)
        .map(|m| basis.level(m).map(|l| l.iter().map(|u| cub.values(u)).collect()))
        .collect::<Result<_, _>>()?;
    for n in 0..=top {
        let engine = KernelEngine::reproducing(n, kappa)?;
        for (xid, x) in points {
            let kv = par::try_map(&cub.nodes, |z| engine.value(x, z))?;
            for m in 0..=top {
                for (k, (u, uv)) in basis.level(m)?.iter().zip(&values[m]).enumerate() {
                    let got: f64 = kv.iter().zip(uv).zip(&cub.weights).map(|((a, b), w)| a * b * w).sum();
                    let expect = if m == n { u.eval(x.coords()) } else { 0.0 };
                    reproduction.push(vec![
                        id.to_string().into(),
                        xid.to_string().into(),
                        n.into(),
                        m.into(),
                        k.into(),
                        (got - expect).abs().into(),
                    ]);
                }
            }
        }
    }

    for n in 1..=LOCALIZED_MAX_DEGREE {
        let kc = KernelConfig::new(n, kappa.clone())?;
        let engine = KernelEngine::localized(&kc)?;
        for (xid, x) in points {
            for (yid, y) in points {
                let l = engine.value(x, y)?;
                let mut sum = 0.0;
                for j in 0..2 * n {
                    sum += cutoff.eval(j as f64 / n as f64) * reproducing_kernel(x, y, j, kappa)?;
                }
                let rel = (l - sum).abs() / (1.0 + sum.abs());
                localized.push(vec![
                    id.to_string().into(),
                    xid.to_string().into(),
                    yid.to_string().into(),
                    n.into(),
                    l.into(),
                    sum.into(),
                    rel.into(),
                ]);
            }
        }
    }
    Ok(())
}

fn p_label(p: f64) -> String {
    if p.is_finite() {
        p.to_string()
    } else {
        "inf".into()
    }
}

fn lp(config: &RunConfig) -> CliResult<Output> {
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    if config.wants("sweep") {
        let (c, t) = lp_sweep(config)?;
        checks.extend(c);
        tables.extend(t);
    }
    if config.wants("sampling") {
        let (c, t) = lp_sampling(config)?;
        checks.extend(c);
        tables.extend(t);
    }
    Ok((checks, tables))
}

fn lp_sweep(config: &RunConfig) -> CliResult<Output> {
    let sweep = SweepConfig::new(
        config.d,
        (config.n_min..=config.n_max).collect(),
        SWEEP_R.to_vec(),
        config.p_values.clone(),
        config.weights.clone(),
        config.seed,
    );
    let report = bernstein_ratio_sweep(&sweep)?;
    let mut ratios = Table::new("ratios", &["n", "r", "p", "factor", "weight", "f", "ratio"]);
    for r in &report.rows {
        ratios.push(vec![
            r.n.into(),
            r.r.into(),
            p_label(r.p).into(),
            r.factor.clone().into(),
            r.weight.clone().into(),
            r.f_id.clone().into(),
            r.ratio.into(),
        ]);
    }
    let mut sups = Table::new("ratio_sups", &["n", "r", "p", "factor", "weight", "sup"]);
    for s in &report.summary {
        sups.push(vec![
            s.n.into(),
            s.r.into(),
            p_label(s.p).into(),
            s.factor.clone().into(),
            s.weight.clone().into(),
            s.sup.into(),
        ]);
    }
    let mut slopes = Table::new("slopes", &["r", "p", "factor", "weight", "slope", "max_sup"]);
    for s in &report.slopes {
        slopes.push(vec![
            s.r.into(),
            p_label(s.p).into(),
            s.factor.clone().into(),
            s.weight.clone().into(),
            s.slope.into(),
            s.max_sup.into(),
        ]);
    }
    let mut iteration = Table::new(
        "iteration",
        &["n", "p", "factor", "weight", "sup_second", "c_first", "c_first_aux", "quotient", "factorization_residual"],
    );
    let mut worst_iteration: f64 = 0.0;
    for it in &report.iteration {
        let bound = it.c_first * it.c_first_aux;
        let q = if bound > 0.0 { it.sup_second / bound } else { 0.0 };
        worst_iteration = worst_iteration.max(q);
        iteration.push(vec![
            it.n.into(),
            p_label(it.p).into(),
            it.factor.clone().into(),
            it.weight.clone().into(),
            it.sup_second.into(),
            it.c_first.into(),
            it.c_first_aux.into(),
            q.into(),
            it.factorization_residual.into(),
        ]);
    }
    let all_finite = report.summary.iter().all(|s| s.sup.is_finite());
    let slope = if all_finite { report.max_slope() } else { f64::INFINITY };
    let mut checks = vec![
        Check::at_most("slope", slope, config.tol("slope")),
        Check::at_most("iteration", worst_iteration, 1.0 + config.tol("iteration")),
    ];
    let mut tables = vec![ratios, sups, slopes, iteration];
    if !report.domination.is_empty() {
        let mut dom = Table::new("domination", &["n", "weight", "checked", "violations", "max_quotient"]);
        let mut violations = 0;
        for r in &report.domination {
            violations += r.violations;
            dom.push(vec![r.n.into(), r.weight.clone().into(), r.checked.into(), r.violations.into(), r.max_quotient.into()]);
        }
        checks.push(Check::at_most("domination", violations as f64, 0.0));
        tables.push(dom);
    }
    Ok((checks, tables))
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.iter().all(|v| v.is_finite() && *v > 0.0) {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Sampling-lemma checks for the first weight at `n` in [`SAMPLING_DEGREES`].
fn lp_sampling(config: &RunConfig) -> CliResult<Output> {
    let d = config.d;
    let weight: DoublingWeightSpec = config.weights[0].clone().certify()?;
    let alpha = weight.estimated_doubling_index.expect("certified weight has an index");
    let wid = weight.id();
    let kappa = weight.jacobi_params().cloned().unwrap_or_else(|| JacobiParams::lebesgue(d));
    let top = *SAMPLING_DEGREES.iter().max().expect("nonempty");
    let basis = build_basis_with_limit(&kappa, top, TEST_BASIS_LIMIT)?;
    let mut mz = Table::new("mz", &["n", "delta", "p", "weight", "f", "points", "lhs", "rhs", "constant"]);
    let mut shrink = Table::new("shrink", &["n", "delta", "p", "weight", "f", "full", "shrunk", "ratio"]);
    let mut maximal = Table::new("maximal", &["n", "beta", "p", "weight", "f", "norm", "maximal_norm", "ratio"]);
    let mut checks = Vec::new();
    let tol = config.tol("stability");
    for &p in &config.p_values {
        let pl = p_label(p);
        let beta = alpha / p + 1.0;
        let (mut c_mz, mut c_shrink, mut c_max) = (Vec::new(), Vec::new(), Vec::new());
        let mut lower: f64 = f64::INFINITY;
        for (k, &n) in SAMPLING_DEGREES.iter().enumerate() {
            let fs = test_polynomials(&basis, n, SAMPLING_RANDOM, 0, config.seed.wrapping_add(k as u64))?;
            if p.is_finite() {
                let rows = mz_check(n, MZ_DELTA, p, &weight, &fs)?;
                c_mz.push(max_of(rows.iter().map(|r| r.constant)));
                for r in rows {
                    mz.push(vec![
                        n.into(),
                        r.delta.into(),
                        pl.clone().into(),
                        wid.clone().into(),
                        r.f_id.into(),
                        r.points.into(),
                        r.lhs.into(),
                        r.rhs.into(),
                        r.constant.into(),
                    ]);
                }
            }
            let rows = shrink_check(n, SHRINK_DELTA, p, &weight, &fs)?;
            c_shrink.push(max_of(rows.iter().map(|r| r.ratio)));
            for r in rows {
                shrink.push(vec![
                    n.into(),
                    r.delta.into(),
                    pl.clone().into(),
                    wid.clone().into(),
                    r.f_id.into(),
                    r.full.into(),
                    r.shrunk.into(),
                    r.ratio.into(),
                ]);
            }
            let rows = maximal_check(n, beta, p, &weight, &fs)?;
            c_max.push(max_of(rows.iter().map(|r| r.ratio)));
            for r in rows {
                lower = lower.min(r.ratio);
                maximal.push(vec![
                    n.into(),
                    r.beta.into(),
                    pl.clone().into(),
                    wid.clone().into(),
                    r.f_id.into(),
                    r.norm.into(),
                    r.maximal_norm.into(),
                    r.ratio.into(),
                ]);
            }
        }
        if p.is_finite() {
            checks.push(Check::at_most(format!("mz-stability[p={pl}]"), spread(&c_mz), tol));
        }
        checks.push(Check::at_most(format!("shrink-stability[p={pl}]"), spread(&c_shrink), tol));
        checks.push(Check::at_most(format!("maximal-stability[p={pl}]"), spread(&c_max), tol));
        checks.push(Check::at_least(format!("maximal-lower[p={pl}]"), lower, 1.0 - 1e-12));
    }
    Ok((checks, vec![mz, shrink, maximal]))
}
