mod common;

use hilbert_bundle::derivation::d_hat_mu_matrix;
use hilbert_bundle::linalg::{mat_residual, vec_residual};
use hilbert_bundle::morphism::{
    assoc_transport, breve_l, chi, d_circ_mu, d_circ_mu_limit, transported_from_morphism,
    transported_morphism,
};
use hilbert_bundle::{DifferenceScheme, SectionMorphism};
use proptest::prelude::*;

fn tol() -> f64 {
    DifferenceScheme::default().fd_tolerance(2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn associated_transport_cocycle_inverse_linearity(seed in any::<u64>(), n in 1usize..5, d in 1usize..4) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let (x, y, z) = (common::point(&mut r, d), common::point(&mut r, d), common::point(&mut r, d));
        let (chi_m, xi) = (common::cmat(&mut r, n, 1.0), common::cmat(&mut r, n, 1.0));
        let (lam, mu) = (common::cnum(&mut r), common::cnum(&mut r));

        let two_step = assoc_transport(&t, &x, &y, &assoc_transport(&t, &z, &x, &chi_m).unwrap()).unwrap();
        prop_assert!(mat_residual(&two_step, &assoc_transport(&t, &z, &y, &chi_m).unwrap()) < 1e-12);

        let round = assoc_transport(&t, &y, &x, &assoc_transport(&t, &x, &y, &chi_m).unwrap()).unwrap();
        prop_assert!(mat_residual(&round, &chi_m) < 1e-12);
        prop_assert!(mat_residual(&assoc_transport(&t, &x, &x, &chi_m).unwrap(), &chi_m) < 1e-12);

        let combo = assoc_transport(&t, &x, &y, &(&chi_m * lam + &xi * mu)).unwrap();
        let split = assoc_transport(&t, &x, &y, &chi_m).unwrap() * lam + assoc_transport(&t, &x, &y, &xi).unwrap() * mu;
        prop_assert!(mat_residual(&combo, &split) < 1e-12);
    }

    #[test]
    fn transported_morphisms_are_characterized_pairwise(seed in any::<u64>(), n in 1usize..5, d in 1usize..4) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let x0 = common::point(&mut r, d);
        let a = transported_morphism(&t, &x0, &common::cmat(&mut r, n, 1.0)).unwrap();
        for _ in 0..3 {
            let (x, y) = (common::point(&mut r, d), common::point(&mut r, d));
            let ax = a.eval(&x).unwrap();
            prop_assert!(mat_residual(&a.eval(&y).unwrap(), &assoc_transport(&t, &x, &y, &ax).unwrap()) < 1e-12);
        }
        let s = DifferenceScheme::default();
        let x = common::point(&mut r, d);
        for mu in 0..d {
            prop_assert!(d_circ_mu(&t, &chi(&a), &x, mu, &s).unwrap().norm() < tol() * a.eval(&x).unwrap().norm().max(1.0));
        }
    }

    #[test]
    fn conjugate_of_transported_morphism_is_transported(seed in any::<u64>(), n in 1usize..5, d in 1usize..3, weighted in any::<bool>()) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, weighted);
        let x0 = common::point(&mut r, d);
        let a = transported_morphism(&t, &x0, &common::cmat(&mut r, n, 1.0)).unwrap();
        let conj = t.herm_conj_morphism(&a);
        let reseeded = transported_from_morphism(&t, &x0, &conj).unwrap();
        let y = common::point(&mut r, d);
        prop_assert!(mat_residual(&conj.eval(&y).unwrap(), &reseeded.eval(&y).unwrap()) < 1e-10);
    }

    #[test]
    fn associated_derivation_bridges(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let a = common::morphism(&mut r, n, d);
        let y = common::section(&mut r, n, d);
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        let a_hat = SectionMorphism::generated(a.clone());
        let breve = breve_l(&t, &a_hat, &x).unwrap();
        let yx = y.eval(&x).unwrap();
        for mu in 0..d {
            let circ = d_circ_mu(&t, &chi(&a), &x, mu, &s).unwrap();
            let circ_limit = d_circ_mu_limit(&t, &chi(&a), &x, mu, &s).unwrap();
            prop_assert!(mat_residual(&circ_limit, &circ) < tol());
            let hat = d_hat_mu_matrix(&t, &a, &x, mu, &s).unwrap() * &yx;
            prop_assert!(vec_residual(&hat, &(circ * &yx)) < tol());
            let from_breve = breve.derivative_at_base(&y, mu, &s).unwrap().components;
            prop_assert!(vec_residual(&from_breve, &hat) < 3.0 * tol());
        }
    }

    #[test]
    fn breve_vanishes_for_transported_morphisms(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let x = common::point(&mut r, d);
        let a = transported_morphism(&t, &x, &common::cmat(&mut r, n, 1.0)).unwrap();
        let y = common::section(&mut r, n, d);
        let breve = breve_l(&t, &SectionMorphism::generated(a), &x).unwrap();
        let z = common::point(&mut r, d);
        let v = breve.eval(&y, &z).unwrap().components;
        prop_assert!(v.norm() < 1e-10 * y.eval(&z).unwrap().norm().max(1.0));
    }
}
