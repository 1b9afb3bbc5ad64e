mod common;

use common::{kappa, max_abs_diff, poly};
use proptest::prelude::*;
use simplex_bernstein::poly::{monomials, MultiIndex};
use simplex_bernstein::Polynomial;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_linear(f in poly(3, 5), g in poly(3, 5), a in -3.0f64..3.0, k in kappa(3, &[0.0, 0.5, 1.0, 2.7])) {
        let h = f.scale(a).add(&g);
        let scale = 1.0 + f.max_abs_coeff() + g.max_abs_coeff();
        let ops: Vec<Box<dyn Fn(&Polynomial) -> Polynomial>> = vec![
            Box::new(|p| p.partial(1).unwrap()),
            Box::new(|p| p.diff_pair(0, 2).unwrap()),
            Box::new(|p| p.diff_pair(1, 3).unwrap()),
            Box::new(|p| p.euler()),
            Box::new(|p| p.apply_spectral(&k).unwrap()),
        ];
        for op in &ops {
            let lhs = op(&h);
            let rhs = op(&f).scale(a).add(&op(&g));
            prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * scale * (1.0 + lhs.max_abs_coeff()));
        }
    }

    #[test]
    fn euler_scales_homogeneous_parts(exps in prop::collection::vec(0u32..4, 3), c in -2.0f64..2.0) {
        let m = MultiIndex::new(exps.clone());
        let f = Polynomial::from_terms(3, &[(&exps, c)]).unwrap();
        let e = f.euler();
        prop_assert!((e.coeff(&exps) - m.total() as f64 * c).abs() <= 1e-14 * (1.0 + c.abs()));
        prop_assert!(max_abs_diff(&e, &f.scale(m.total() as f64)) <= 1e-14 * (1.0 + c.abs()));
    }

    #[test]
    fn evaluation_matches_monomial_sum(f in poly(2, 6), x in common::point(2)) {
        let set = monomials(2, 6);
        let vals = set.values_at(x.coords());
        let direct: f64 = f.coeffs().iter().zip(&vals).map(|(c, v)| c * v).sum();
        prop_assert!((f.eval(x.coords()) - direct).abs() <= 1e-13);
        prop_assert!((f.evaluate(x.coords()).unwrap() - f.eval_with(&vals)).abs() <= 1e-13);
    }
}
