//! Weights on the simplex used by the doubling and L^p machinery.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::JacobiParams;

/// Smooth positive multiplier of a Jacobi weight.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothFactor {
    /// `1 + amplitude * sin(frequency * x_axis)`, positive for `|amplitude| < 1`.
    Sine { axis: usize, amplitude: f64, frequency: f64 },
}

impl SmoothFactor {
    pub fn value(&self, bary: &[f64]) -> f64 {
        match self {
            Self::Sine { axis, amplitude, frequency } => 1.0 + amplitude * (frequency * bary[*axis]).sin(),
        }
    }

    fn id(&self) -> String {
        match self {
            Self::Sine { axis, amplitude, frequency } => {
                format!("1+{amplitude}sin({frequency}x{})", axis + 1)
            }
        }
    }
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Pointwise weight description.
#[derive(Clone)]
pub enum WeightKind {
    /// `b_kappa W_kappa`.
    Jacobi(JacobiParams),
    /// `b_kappa W_kappa` times a smooth positive factor.
    JacobiTimesSmooth(JacobiParams, SmoothFactor),
    /// Arbitrary positive density on barycentric coordinates.
    Custom { dim: usize, name: String, eval: Evaluator },
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Jacobi(k) => f.debug_tuple("Jacobi").field(k).finish(),
            Self::JacobiTimesSmooth(k, s) => f.debug_tuple("JacobiTimesSmooth").field(k).field(s).finish(),
            Self::Custom { dim, name, .. } => {
                f.debug_struct("Custom").field("dim", dim).field("name", name).finish()
            }
        }
    }
}

/// A weight together with its estimated doubling constant and index.
#[derive(Debug, Clone)]
pub struct DoublingWeightSpec {
    pub kind: WeightKind,
    pub estimated_doubling_constant: Option<f64>,
    pub estimated_doubling_index: Option<f64>,
}

impl DoublingWeightSpec {
    pub fn new(kind: WeightKind) -> Self {
        Self { kind, estimated_doubling_constant: None, estimated_doubling_index: None }
    }

    pub fn jacobi(kappa: JacobiParams) -> Self {
        Self::new(WeightKind::Jacobi(kappa))
    }

    /// `b_kappa W_kappa (1 + sin(3 x_1) / 2)`.
    pub fn jacobi_sine(kappa: JacobiParams) -> Self {
        Self::new(WeightKind::JacobiTimesSmooth(
            kappa,
            SmoothFactor::Sine { axis: 0, amplitude: 0.5, frequency: 3.0 },
        ))
    }

    pub fn custom<F>(dim: usize, name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(WeightKind::Custom { dim, name: name.into(), eval: Arc::new(eval) })
    }

    /// Parses `jacobi:<k1,...>` or `jacobi-sin:<k1,...>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, list) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("weight spec `{spec}` lacks `kind:`")))?;
        let kappa = list
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("weight spec `{spec}`: {e}")))?;
        let kappa = JacobiParams::new(kappa)?;
        match kind {
            "jacobi" => Ok(Self::jacobi(kappa)),
            "jacobi-sin" => Ok(Self::jacobi_sine(kappa)),
            other => Err(Error::InvalidParameter(format!("unknown weight kind `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            WeightKind::Jacobi(k) | WeightKind::JacobiTimesSmooth(k, _) => k.dim(),
            WeightKind::Custom { dim, .. } => *dim,
        }
    }

    /// Stable identifier used in reports.
    pub fn id(&self) -> String {
        let list = |k: &JacobiParams| {
            k.kappa().iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
        };
        match &self.kind {
            WeightKind::Jacobi(k) => format!("jacobi:{}", list(k)),
            WeightKind::JacobiTimesSmooth(k, s) => format!("jacobi:{}*{}", list(k), s.id()),
            WeightKind::Custom { name, .. } => name.clone(),
        }
    }

    /// Jacobi part, when the weight has one.
    pub fn jacobi_params(&self) -> Option<&JacobiParams> {
        match &self.kind {
            WeightKind::Jacobi(k) | WeightKind::JacobiTimesSmooth(k, _) => Some(k),
            WeightKind::Custom { .. } => None,
        }
    }

    /// Ratio of the density to `b_kappa W_kappa` (1 for pure Jacobi weights).
    pub fn smooth_factor(&self, bary: &[f64]) -> f64 {
        match &self.kind {
            WeightKind::JacobiTimesSmooth(_, s) => s.value(bary),
            _ => 1.0,
        }
    }

    /// Density with respect to Lebesgue measure at barycentric coordinates.
    pub fn density(&self, bary: &[f64]) -> f64 {
        match &self.kind {
            WeightKind::Jacobi(k) => k.b() * k.weight_at(bary),
            WeightKind::JacobiTimesSmooth(k, s) => k.b() * k.weight_at(bary) * s.value(bary),
            WeightKind::Custom { eval, .. } => eval(bary),
        }
    }

    /// A closure evaluating the density with the normalization hoisted.
    pub fn density_fn(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        let b = self.jacobi_params().map_or(1.0, JacobiParams::b);
        move |bary: &[f64]| match &self.kind {
            WeightKind::Jacobi(k) => b * k.weight_at(bary),
            WeightKind::JacobiTimesSmooth(k, s) => b * k.weight_at(bary) * s.value(bary),
            WeightKind::Custom { eval, .. } => eval(bary),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.estimated_doubling_constant.is_some() && self.estimated_doubling_index.is_some()
    }
}
