//! Ball measures and empirical doubling constants.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

use super::separated::lattice;
use super::sphere::{integrate_ball, BallQuadrature};
use super::{DoublingWeightSpec, SimplexPoint};

/// `w(B(x, r))` with the default ball quadrature.
pub fn ball_measure(w: &DoublingWeightSpec, x: &SimplexPoint, r: f64) -> Result<f64> {
    ball_measure_with(w, x, r, &BallQuadrature::default())
}

pub fn ball_measure_with(w: &DoublingWeightSpec, x: &SimplexPoint, r: f64, quad: &BallQuadrature) -> Result<f64> {
    if !(r > 0.0 && r <= FRAC_PI_2 + 1e-12) {
        return Err(Error::InvalidParameter(format!("ball radius {r} outside (0, pi/2]")));
    }
    if x.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: x.dim() });
    }
    let density = w.density_fn();
    Ok(integrate_ball(x, r, None, quad, |y, _| density(y)))
}

/// Empirical doubling constant and index of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingEstimate {
    /// `sup w(B(x, 2r)) / w(B(x, r))` over the lattice grid, boundary included.
    pub constant: f64,
    /// Fitted `alpha` in `w(B(x, 2^m r)) <= c 2^{alpha m} w(B(x, r))`.
    pub index: f64,
}

const CONSTANT_LATTICE: usize = 4;
const CONSTANT_LEVELS: i32 = 7;
const INDEX_STEPS: i32 = 5;

/// Estimates the doubling constant over centers on a barycentric lattice and
/// radii `pi / 2^j`, and the doubling index from balls contained in the simplex.
pub fn estimate_doubling(w: &DoublingWeightSpec) -> Result<DoublingEstimate> {
    let d = w.dim();
    let quad = BallQuadrature::default();
    let density = w.density_fn();

    let centers = lattice(d, CONSTANT_LATTICE);
    let per_center = par::map(&centers, |x| {
        let m: Vec<f64> = (1..=CONSTANT_LEVELS)
            .map(|j| integrate_ball(x, std::f64::consts::PI / 2f64.powi(j), None, &quad, |y, _| density(y)))
            .collect();
        m.windows(2).map(|p| p[0] / p[1]).fold(0.0, f64::max)
    });
    let constant = per_center.into_iter().fold(0.0, f64::max);
    if !constant.is_finite() {
        return Err(Error::NonConvergent(constant));
    }

    // interior lattice points; balls of radius up to the boundary distance
    let interior: Vec<SimplexPoint> = lattice(d, d + 4)
        .into_iter()
        .filter(|x| x.min_barycentric() > 0.0)
        .collect();
    let ratios = par::map(&interior, |x| {
        let r0 = x.boundary_distance();
        let m: Vec<f64> = (0..=INDEX_STEPS)
            .map(|k| integrate_ball(x, r0 / 2f64.powi(INDEX_STEPS - k), None, &quad, |y, _| density(y)))
            .collect();
        m.iter().map(|v| v / m[0]).collect::<Vec<_>>()
    });
    let sup: Vec<f64> = (0..=INDEX_STEPS as usize)
        .map(|k| ratios.iter().map(|r| r[k]).fold(0.0, f64::max))
        .collect();
    let index = fit_slope(
        &(1..=INDEX_STEPS as usize).map(|k| k as f64).collect::<Vec<_>>(),
        &sup[1..].iter().map(|v| v.log2()).collect::<Vec<_>>(),
    );
    Ok(DoublingEstimate { constant, index })
}

impl DoublingWeightSpec {
    /// Fills the estimated doubling constant and index.
    pub fn certify(mut self) -> Result<Self> {
        let est = estimate_doubling(&self)?;
        self.estimated_doubling_constant = Some(est.constant);
        self.estimated_doubling_index = Some(est.index);
        Ok(self)
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::JacobiParams;

    #[test]
    fn whole_simplex_ball() {
        let w = DoublingWeightSpec::jacobi(JacobiParams::lebesgue(2));
        let x = SimplexPoint::new(vec![0.3, 0.3]).unwrap();
        let m = ball_measure(&w, &x, FRAC_PI_2).unwrap();
        assert!((m - 1.0).abs() < 0.02);
        assert!(ball_measure(&w, &x, 0.0).is_err());
        assert!(ball_measure(&w, &x, -1.0).is_err());
    }

    #[test]
    fn jacobi_whole_mass_and_monotone() {
        let w = DoublingWeightSpec::jacobi(JacobiParams::new(vec![1.0, 0.5, 2.0]).unwrap());
        let x = SimplexPoint::new(vec![0.1, 0.7]).unwrap();
        assert!((ball_measure(&w, &x, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-4);
        // nondecreasing up to quadrature error; the largest balls already cover the simplex
        let mut prev = 0.0;
        for k in 1..=12 {
            let m = ball_measure(&w, &x, FRAC_PI_2 * k as f64 / 12.0).unwrap();
            assert!(m > prev - 1e-5, "{k}: {m} < {prev}");
            prev = m;
        }
    }

    #[test]
    fn doubling_estimates() {
        let lebesgue = estimate_doubling(&DoublingWeightSpec::jacobi(JacobiParams::lebesgue(2))).unwrap();
        assert!((lebesgue.index - 2.0).abs() <= 0.3, "{lebesgue:?}");
        let k = JacobiParams::uniform(2, 1.0).unwrap();
        let heavy = estimate_doubling(&DoublingWeightSpec::jacobi(k.clone())).unwrap();
        assert!(heavy.index <= 2.0 * 3.0 + 2.0 + 3.0, "{heavy:?}");
        assert!(heavy.constant > lebesgue.constant);
        let sine = DoublingWeightSpec::jacobi_sine(k).certify().unwrap();
        assert!(sine.is_certified());
        assert!(sine.estimated_doubling_constant.unwrap().is_finite());
    }

    #[test]
    fn slope_fit() {
        assert!((fit_slope(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]) - 2.0).abs() < 1e-14);
    }
}
