#![allow(dead_code)]

use proptest::prelude::*;
use simplex_bernstein::poly::space_dim;
use simplex_bernstein::{JacobiParams, Polynomial, SimplexPoint};

/// Point of the `d`-simplex from `d + 1` positive weights.
pub fn point(d: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(1e-3f64..1.0, d + 1).prop_map(|w| {
        let s: f64 = w.iter().sum();
        let b: Vec<f64> = w.iter().map(|v| v / s).collect();
        SimplexPoint::from_barycentric(&b).unwrap()
    })
}

pub fn poly(d: usize, n: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-1.0f64..1.0, space_dim(d, n)).prop_map(move |c| Polynomial::from_coeffs(d, n, c).unwrap())
}

pub fn kappa(d: usize, values: &'static [f64]) -> impl Strategy<Value = JacobiParams> {
    prop::collection::vec(prop::sample::select(values), d + 1).prop_map(|k| JacobiParams::new(k).unwrap())
}

pub fn max_abs_diff(a: &Polynomial, b: &Polynomial) -> f64 {
    a.sub(b).max_abs_coeff()
}
