//! Command-line flags and their validation into a [`RunConfig`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use simplex_bernstein::measure::DoublingWeightSpec;
use simplex_bernstein::JacobiParams;

use crate::error::{CliError, CliResult};
use crate::report::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteId {
    /// Eigenfunction, pointwise and integral identities of the spectral operator.
    Spectral,
    /// Extremal eigenvalues of the form sets and their equality cases.
    Sharp,
    /// Kernel reproduction and localization profiles.
    Kernels,
    /// L^p Bernstein ratios and the sampling lemmas.
    Lp,
    /// Tidy plot-ready tables from an existing report directory.
    Render,
}

impl SuiteId {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteId::Spectral => "spectral",
            SuiteId::Sharp => "sharp",
            SuiteId::Kernels => "kernels",
            SuiteId::Lp => "lp",
            SuiteId::Render => "render",
        }
    }

    /// Default `(A, B)` of `--n A..B`.
    fn default_n(&self) -> (usize, usize) {
        match self {
            SuiteId::Spectral => (0, 6),
            SuiteId::Sharp => (1, 6),
            SuiteId::Kernels => (8, 64),
            SuiteId::Lp => (2, 12),
            SuiteId::Render => (0, 0),
        }
    }

    /// Hard tolerances and their defaults.
    pub fn tolerances(&self) -> &'static [(&'static str, f64)] {
        match self {
            SuiteId::Spectral => &[("eigen", 1e-8), ("operator", 1e-8), ("integral", 1e-8)],
            SuiteId::Sharp => &[("lambda", 1e-8), ("projection", 1e-6), ("equality", 1e-8), ("anchor", 1e-12)],
            SuiteId::Kernels => &[("reproduction", 1e-8), ("localized", 1e-8), ("stability", 4.0)],
            SuiteId::Lp => &[("slope", 0.1), ("iteration", 0.1), ("stability", 2.0)],
            SuiteId::Render => &[],
        }
    }

    /// Accepted values of `--check`.
    pub fn checks(&self) -> &'static [&'static str] {
        match self {
            SuiteId::Spectral => &["all", "eigen", "symmetric", "radial", "axis", "integral"],
            SuiteId::Kernels => &["all", "reproduction", "profiles"],
            SuiteId::Lp => &["all", "sweep", "sampling"],
            _ => &["all"],
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "simplex-bernstein", version, about = "Verification suites for Bernstein inequalities on the simplex")]
pub struct Cli {
    pub suite: SuiteId,
    /// Dimension of the simplex.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Inclusive degree range `A..B` (or a single `A`); `kernels` uses A, 2A, 4A, ... <= B.
    #[arg(long)]
    pub n: Option<String>,
    /// Jacobi parameters, `d + 1` comma-separated reals; repeat for a grid.
    #[arg(long)]
    pub kappa: Vec<String>,
    /// Comma-separated exponents, `inf` allowed.
    #[arg(long)]
    pub p: Option<String>,
    /// Doubling weight `jacobi:k1,..,kd+1` or `jacobi-sin:k1,..,kd+1`; repeatable.
    #[arg(long)]
    pub weight: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report directory (input directory for `render`).
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
    /// Tolerance override `NAME=VAL`; repeatable.
    #[arg(long)]
    pub tol: Vec<String>,
    /// Restrict the suite to one group of checks.
    #[arg(long, default_value = "all")]
    pub check: String,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub suite: SuiteId,
    pub d: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub kappas: Vec<JacobiParams>,
    pub p_values: Vec<f64>,
    pub weights: Vec<DoublingWeightSpec>,
    pub seed: u64,
    pub out: PathBuf,
    pub tolerances: BTreeMap<String, f64>,
    pub check: String,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_range(s: &str) -> CliResult<(usize, usize)> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| config_err(format!("bad degree `{t}` in --n {s}")));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = parse(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(config_err(format!("empty degree range --n {s}")));
    }
    Ok((a, b))
}

pub fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| match t.trim() {
            "inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
            v => v.parse::<f64>().map_err(|_| config_err(format!("bad {what} entry `{v}`"))),
        })
        .collect()
}

pub fn kappa_id(kappa: &JacobiParams) -> String {
    kappa.kappa().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        let suite = cli.suite;
        let d = cli.d;
        if suite != SuiteId::Render && !(2..=4).contains(&d) {
            return Err(config_err(format!("--d {d} outside the supported range 2..4")));
        }
        let (n_min, n_max) = match &cli.n {
            Some(s) => parse_range(s)?,
            None => suite.default_n(),
        };
        let mut kappas = Vec::new();
        for s in &cli.kappa {
            let k = parse_list(s, "kappa")?;
            if k.len() != d + 1 {
                return Err(config_err(format!("--kappa {s} has {} entries, expected d + 1 = {}", k.len(), d + 1)));
            }
            let k = JacobiParams::new(k).map_err(|e| config_err(e.to_string()))?;
            k.require_nonnegative().map_err(|e| config_err(e.to_string()))?;
            kappas.push(k);
        }
        if kappas.is_empty() {
            kappas.push(JacobiParams::lebesgue(d));
        }
        let p_values = match &cli.p {
            Some(s) => parse_list(s, "p")?,
            None => vec![1.0, 2.0, f64::INFINITY],
        };
        if let Some(p) = p_values.iter().find(|p| !(**p >= 1.0)) {
            return Err(config_err(format!("--p entry {p} must be >= 1")));
        }
        let mut weights = Vec::new();
        for s in &cli.weight {
            let w = DoublingWeightSpec::parse(s).map_err(|e| config_err(e.to_string()))?;
            if w.dim() != d {
                return Err(config_err(format!("--weight {s} has dimension {}, expected {d}", w.dim())));
            }
            weights.push(w);
        }
        if weights.is_empty() {
            weights = default_weights(d);
        }
        let mut tolerances: BTreeMap<String, f64> = suite.tolerances().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for t in &cli.tol {
            let (name, value) = t.split_once('=').ok_or_else(|| config_err(format!("--tol {t} is not NAME=VAL")))?;
            let value: f64 = value.parse().map_err(|_| config_err(format!("--tol {t}: bad value")))?;
            match tolerances.get_mut(name) {
                Some(slot) => *slot = value,
                None => return Err(config_err(format!("unknown tolerance `{name}` for suite {}", suite.name()))),
            }
        }
        if !suite.checks().contains(&cli.check.as_str()) {
            return Err(config_err(format!(
                "--check {} not one of {} for suite {}",
                cli.check,
                suite.checks().join(", "),
                suite.name()
            )));
        }
        let config = Self {
            suite,
            d,
            n_min,
            n_max,
            kappas,
            p_values,
            weights,
            seed: cli.seed,
            out: cli.out.clone(),
            tolerances,
            check: cli.check.clone(),
        };
        config.validate_suite()?;
        Ok(config)
    }

    fn validate_suite(&self) -> CliResult<()> {
        use simplex_bernstein::basis::MAX_BASIS_DEGREE;
        use simplex_bernstein::forms::MAX_SHARP_DEGREE;
        let max = match self.suite {
            SuiteId::Spectral | SuiteId::Lp => MAX_BASIS_DEGREE,
            SuiteId::Sharp => MAX_SHARP_DEGREE,
            SuiteId::Kernels => 512,
            SuiteId::Render => usize::MAX,
        };
        if self.n_max > max {
            return Err(config_err(format!("degree {} exceeds the limit {max} of suite {}", self.n_max, self.suite.name())));
        }
        if matches!(self.suite, SuiteId::Kernels | SuiteId::Lp) && self.n_min == 0 {
            return Err(config_err(format!("suite {} needs degrees >= 1", self.suite.name())));
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn wants(&self, group: &str) -> bool {
        self.check == "all" || self.check == group
    }

    /// `A, 2A, 4A, ... <= B` for the kernel profiles.
    pub fn doubling_degrees(&self) -> Vec<usize> {
        std::iter::successors(Some(self.n_min), |n| Some(n * 2)).take_while(|n| *n <= self.n_max).collect()
    }

    /// Everything that determines the results (the output path does not).
    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "n": [self.n_min, self.n_max],
            "kappa": self.kappas.iter().map(|k| k.kappa().iter().map(|v| num(*v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "p": self.p_values.iter().map(|p| num(*p)).collect::<Vec<_>>(),
            "weight": self.weights.iter().map(DoublingWeightSpec::id).collect::<Vec<_>>(),
            "seed": self.seed,
            "check": self.check,
            "tolerances": self.tolerances.iter().map(|(k, v)| (k.clone(), num(*v))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// `W_0`, `W_(1, 1/2, ..., 1/2)` and `W_0 (1 + sin(3 x_1) / 2)`.
pub fn default_weights(d: usize) -> Vec<DoublingWeightSpec> {
    let mut k = vec![0.5; d + 1];
    k[0] = 1.0;
    vec![
        DoublingWeightSpec::jacobi(JacobiParams::lebesgue(d)),
        DoublingWeightSpec::jacobi(JacobiParams::new(k).expect("positive parameters")),
        DoublingWeightSpec::jacobi_sine(JacobiParams::lebesgue(d)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("simplex-bernstein").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..6").unwrap(), (1, 6));
        assert_eq!(parse_range("3").unwrap(), (3, 3));
        assert_eq!(parse_range("2..=4").unwrap(), (2, 4));
        assert!(parse_range("5..3").is_err());
        assert!(parse_range("a..3").is_err());
    }

    #[test]
    fn kappa_length_and_tolerances_are_validated() {
        assert!(RunConfig::from_cli(&cli(&["sharp", "--kappa", "0,0"])).is_err());
        assert!(RunConfig::from_cli(&cli(&["sharp", "--tol", "bogus=1"])).is_err());
        let c = RunConfig::from_cli(&cli(&["sharp", "--tol", "lambda=1e-6", "--kappa", "0,0.5,1"])).unwrap();
        assert_eq!(c.tol("lambda"), 1e-6);
        assert_eq!(kappa_id(&c.kappas[0]), "0,0.5,1");
        assert!(RunConfig::from_cli(&cli(&["sharp", "--check", "eigen"])).is_err());
    }

    #[test]
    fn doubling_degrees() {
        let c = RunConfig::from_cli(&cli(&["kernels", "--n", "8..64"])).unwrap();
        assert_eq!(c.doubling_degrees(), vec![8, 16, 32, 64]);
    }
}
