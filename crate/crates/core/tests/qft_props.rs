mod common;

use hilbert_bundle::linalg::{c, mat_residual, rel_residual};
use hilbert_bundle::qft::{
    apply_section_morphism, lift_field, lift_operator, lift_state, smear_bundle, smear_conventional,
};
use hilbert_bundle::{
    CMat, CoordinateChart, FibreMap, FibreVector, Field, FieldComponents, QuadratureRule,
    SectionMorphism, SupportBox, TestFunction,
};
use proptest::prelude::*;

fn chart(d: usize) -> CoordinateChart {
    CoordinateChart::new(vec![-1.0; d], vec![0.25; d], vec![9; d]).unwrap()
}

fn random_fields(
    r: &mut rand_chacha::ChaCha8Rng,
    n_comp: usize,
    n: usize,
    d: usize,
) -> FieldComponents {
    FieldComponents::new(
        (0..n_comp)
            .map(|_| common::morphism_field(r, n, d))
            .collect(),
    )
}

fn random_test_function(r: &mut rand_chacha::ChaCha8Rng, d: usize) -> TestFunction {
    let amps: Vec<_> = (0..4).map(|_| common::cnum(r)).collect();
    let lo = vec![1; d];
    let hi = vec![6; d];
    TestFunction::new(chart(d), SupportBox::new(lo, hi), move |i, y| {
        amps[i % 4] * (1.0 - 0.2 * y[0] * y[0])
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expectation_values_are_invariant(seed in any::<u64>(), n in 1usize..5, d in 1usize..3, weighted in any::<bool>()) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, weighted);
        let h = common::hermitian(&mut r, n);
        let k = common::hermitian(&mut r, n);
        let a = Field::new(move |x: &[f64]| &h + &k * c(x[0].sin(), 0.));
        let x0 = common::cvec(&mut r, n);
        let y0 = common::cvec(&mut r, n);
        let (xs, ys) = (lift_state(&t, &x0).unwrap(), lift_state(&t, &y0).unwrap());
        let ay = apply_section_morphism(&SectionMorphism::generated(lift_operator(&t, &a)), &ys);
        let x = common::point(&mut r, d);
        let conventional = t.space().inner(&x0, &(a.eval(&x).unwrap() * &y0)).unwrap();
        let bundle = t.fibre_inner(&xs.at(&x).unwrap(), &ay.at(&x).unwrap()).unwrap();
        prop_assert!(rel_residual(&[bundle], &[conventional]) < 1e-12);
    }

    #[test]
    fn hermiticity_and_unitarity_transport(seed in any::<u64>(), n in 1usize..5, d in 1usize..3, weighted in any::<bool>()) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, weighted);
        let x = common::point(&mut r, d);
        let space = t.space().clone();
        // Self-adjoint and unitary with respect to the Gram product of F.
        let root = space.gram_root();
        let root_inv = root.clone().try_inverse().unwrap();
        let h = &root_inv * common::hermitian(&mut r, n) * &root;
        let u = &root_inv * common::unitary(&mut r, n) * &root;
        let g = common::cmat(&mut r, n, 1.0);
        for (op, herm, unit) in [(h, true, false), (u, false, true), (g, false, false)] {
            prop_assert_eq!(space.is_hermitian(&op, 1e-10).unwrap(), herm);
            let lifted = lift_operator(&t, &Field::constant(op.clone())).eval(&x).unwrap();
            let conj = t.herm_conj_morphism_at(&x, &lifted).unwrap();
            prop_assert_eq!(mat_residual(&conj, &lifted) < 1e-10, herm);
            let as_map = FibreMap::new(x.clone(), x.clone(), lifted);
            prop_assert_eq!(t.is_fibre_unitary(&as_map, 1e-10).unwrap(), unit || space.is_unitary(&op, 1e-10).unwrap());
        }
    }

    #[test]
    fn smearing_is_consistent_and_linear(seed in any::<u64>(), n in 1usize..4, d in 1usize..3, n_comp in 1usize..4) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let fields = random_fields(&mut r, n_comp, n, d);
        let f = random_test_function(&mut r, d);
        let g = random_test_function(&mut r, d);
        let q = QuadratureRule::trapezoid(&chart(d), &SupportBox::new(vec![0; d], vec![8; d])).unwrap();
        let x = common::point(&mut r, d);

        let conv = smear_conventional(&fields, &f, &q).unwrap();
        let bundle = smear_bundle(&t, &lift_field(&t, &fields), &f, &q, &x).unwrap();
        let (l, l_inv) = t.pair_at(&x).unwrap();
        prop_assert!(mat_residual(&bundle, &(l_inv * &conv * l)) < 1e-12);

        let (a, b) = (common::cnum(&mut r), common::cnum(&mut r));
        let combo = smear_conventional(&fields, &f.linear_combination(a, &g, b), &q).unwrap();
        let split = conv.clone() * a + smear_conventional(&fields, &g, &q).unwrap() * b;
        prop_assert!(mat_residual(&combo, &split) < 1e-12);

        let other = random_fields(&mut r, n_comp, n, d);
        let summed = FieldComponents::new(
            fields.components().iter().zip(other.components()).map(|(p, q)| {
                let (p, q) = (p.clone(), q.clone());
                Field::fallible(move |y| Ok(p.eval(y)? * a + q.eval(y)? * b))
            }).collect(),
        );
        let lhs = smear_conventional(&summed, &f, &q).unwrap();
        let rhs = conv * a + smear_conventional(&other, &f, &q).unwrap() * b;
        prop_assert!(mat_residual(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn lifted_states_are_transported_sections(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let x0 = common::cvec(&mut r, n);
        let lifted = lift_state(&t, &x0).unwrap();
        let p = common::point(&mut r, d);
        let through = t.transported_section(&FibreVector::new(p.clone(), lifted.eval(&p).unwrap())).unwrap();
        let y = common::point(&mut r, d);
        prop_assert!(hilbert_bundle::linalg::vec_residual(&through.eval(&y).unwrap(), &lifted.eval(&y).unwrap()) < 1e-12);
        let _ = CMat::zeros(1, 1);
    }
}
