mod common;

use common::point;
use proptest::prelude::*;
use simplex_bernstein::kernels::{localized_kernel, CutoffFunction, KernelConfig};
use simplex_bernstein::{distance, JacobiParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn xi_lower_bounds(x in point(2), y in point(2), t in prop::collection::vec(-1.0f64..1.0, 3)) {
        let c: Vec<f64> = x.barycentric().iter().zip(y.barycentric()).map(|(a, b)| (a * b).sqrt()).collect();
        let xi: f64 = c.iter().zip(&t).map(|(c, t)| c * t).sum();
        let d = distance(&x, &y);
        let gap = 1.0 - xi;
        prop_assert!(gap >= 2.0 / std::f64::consts::PI.powi(2) * d * d - 1e-12);
        let sum: f64 = c.iter().zip(&t).map(|(c, t)| c * (1.0 - t)).sum();
        prop_assert!(gap >= sum - 1e-12);
    }

    #[test]
    fn cutoff_is_admissible(t in 0.0f64..4.0) {
        let a = CutoffFunction::default();
        let v = a.eval(t);
        prop_assert!((0.0..=1.0).contains(&v));
        if t <= 1.0 {
            prop_assert_eq!(v, 1.0);
        }
        if t >= 2.0 {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert!(a.eval(t + 1e-3) <= v + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn localized_kernel_is_symmetric(x in point(2), y in point(2), n in 1usize..10) {
        let config = KernelConfig::new(n, JacobiParams::new(vec![0.5, 0.0, 1.0]).unwrap()).unwrap();
        let a = localized_kernel(&x, &y, &config).unwrap();
        let b = localized_kernel(&y, &x, &config).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}
