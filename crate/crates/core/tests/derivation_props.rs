mod common;

use hilbert_bundle::derivation::{
    d_directional_section, d_hat_mu_commutator, d_hat_mu_components, d_hat_mu_matrix,
    d_mu_analytic, d_mu_components, d_mu_limit, gamma, gamma_transform, gamma_via_transport,
    DirectionalField,
};
use hilbert_bundle::grid::partial_derivative;
use hilbert_bundle::linalg::{c, mat_residual, vec_residual};
use hilbert_bundle::{
    CMat, CVec, CoordinateChange, DifferenceScheme, FibreVector, Field, Section, SectionMorphism,
};
use proptest::prelude::*;

fn tol() -> f64 {
    DifferenceScheme::default().fd_tolerance(2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partial_derivative_is_linear(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let (f, g) = (common::section(&mut r, n, d), common::section(&mut r, n, d));
        let (a, b) = (common::cnum(&mut r), common::cnum(&mut r));
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        let combo = f.linear_combination(a, &g, b);
        let lhs: CVec = partial_derivative(|z: &[f64]| combo.eval(z), &x, 0, &s).unwrap();
        let df: CVec = partial_derivative(|z: &[f64]| f.eval(z), &x, 0, &s).unwrap();
        let dg: CVec = partial_derivative(|z: &[f64]| g.eval(z), &x, 0, &s).unwrap();
        prop_assert!(vec_residual(&lhs, &(df * a + dg * b)) < 1e-9);
    }

    #[test]
    fn leibniz_on_sections(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let y = common::section(&mut r, n, d);
        let (f, df) = common::scalar(&mut r, d);
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        let fy = y.scaled_by(&f);
        for mu in 0..d {
            let lhs = d_mu_analytic(&t, &fy, &x, mu, &s).unwrap().components;
            let dy = d_mu_analytic(&t, &y, &x, mu, &s).unwrap().components;
            let rhs = y.eval(&x).unwrap() * df[mu].eval(&x).unwrap() + dy * f.eval(&x).unwrap();
            prop_assert!(vec_residual(&lhs, &rhs) < 3.0 * tol());
        }
    }

    #[test]
    fn leibniz_on_morphisms(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let a = common::morphism(&mut r, n, d);
        let b = common::morphism(&mut r, n, d);
        let y = common::section(&mut r, n, d);
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        let ab = a.compose(&b);
        let yx = y.eval(&x).unwrap();
        for mu in 0..d {
            let lhs = d_hat_mu_matrix(&t, &ab, &x, mu, &s).unwrap() * &yx;
            let da = d_hat_mu_matrix(&t, &a, &x, mu, &s).unwrap();
            let db = d_hat_mu_matrix(&t, &b, &x, mu, &s).unwrap();
            let rhs = (da * b.eval(&x).unwrap() + a.eval(&x).unwrap() * db) * &yx;
            prop_assert!(vec_residual(&lhs, &rhs) < 3.0 * tol());
        }
    }

    #[test]
    fn component_and_analytic_forms_agree(seed in any::<u64>(), n in 1usize..4, d in 1usize..3, weighted in any::<bool>()) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, weighted);
        let y = common::section(&mut r, n, d);
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        for mu in 0..d {
            let a = d_mu_analytic(&t, &y, &x, mu, &s).unwrap().components;
            let b = d_mu_components(&t, &y, &x, mu, &s).unwrap().components;
            let l = d_mu_limit(&t, &y, &x, mu, &s).unwrap().components;
            prop_assert!(vec_residual(&a, &b) < tol());
            prop_assert!(vec_residual(&l, &a) < tol());
            let g = gamma(&t, &x, mu, &s).unwrap().matrix;
            let gt = gamma_via_transport(&t, &x, mu, &s).unwrap();
            prop_assert!(mat_residual(&g, &gt) < tol());
        }
    }

    #[test]
    fn morphism_derivative_forms_agree(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let a = common::morphism(&mut r, n, d);
        let y = common::section(&mut r, n, d);
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        let a_hat = SectionMorphism::generated(a.clone());
        for mu in 0..d {
            let closed = d_hat_mu_matrix(&t, &a, &x, mu, &s).unwrap();
            let comps = d_hat_mu_components(&t, &a, &x, mu, &s).unwrap();
            prop_assert!(mat_residual(&closed, &comps) < tol());
            let via = d_hat_mu_commutator(&t, &a_hat, &y, &x, mu, &s).unwrap().components;
            prop_assert!(vec_residual(&via, &(closed * y.eval(&x).unwrap())) < 3.0 * tol());
        }
    }

    #[test]
    fn derivations_transform_as_tangent_vectors(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let y = common::section(&mut r, n, d);
        let x: Vec<f64> = common::point(&mut r, d).iter().map(|v| 0.5 * v).collect();
        let s = DifferenceScheme::default();
        let change = CoordinateChange::cubic(0.3);
        let jinv = change.jacobian_inverse(&x).unwrap();
        let (tp, yp) = (t.in_chart(&change), y.in_chart(&change));
        let xp = change.forward(&x);
        let unprimed: Vec<CVec> = (0..d).map(|nu| d_mu_analytic(&t, &y, &x, nu, &s).unwrap().components).collect();
        for mu in 0..d {
            let primed = d_mu_analytic(&tp, &yp, &xp, mu, &s).unwrap().components;
            let mut expected = CVec::zeros(n);
            for nu in 0..d {
                expected += &unprimed[nu] * c(jinv[(nu, mu)], 0.);
            }
            prop_assert!(vec_residual(&primed, &expected) < 10.0 * tol());
        }
    }

    #[test]
    fn directional_derivative_is_chart_independent(seed in any::<u64>(), n in 1usize..4) {
        let mut r = common::rng(seed);
        let d = 2;
        let t = common::trivializer(&mut r, n, d, false);
        let y = common::section(&mut r, n, d);
        let x: Vec<f64> = common::point(&mut r, d).iter().map(|v| 0.5 * v).collect();
        let s = DifferenceScheme::default();
        let v = DirectionalField::from_fn(|x: &[f64]| vec![1.0 + x[1], x[0] * x[0]]);
        let change = CoordinateChange::cubic(0.3);
        let here = d_directional_section(&t, &y, &v, &x, &s).unwrap().components;
        let there = d_directional_section(&t.in_chart(&change), &y.in_chart(&change), &v.in_chart(&change), &change.forward(&x), &s)
            .unwrap()
            .components;
        prop_assert!(vec_residual(&there, &here) < 10.0 * tol());
    }

    #[test]
    fn gamma_transform_matches_recomputation(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let k = common::cmat(&mut r, n, 0.3);
        let basis = Field::new(move |x: &[f64]| common::expm(&(&k * c(x[0].cos(), 0.))));
        let x: Vec<f64> = common::point(&mut r, d).iter().map(|v| 0.5 * v).collect();
        let s = DifferenceScheme::default();
        let change = CoordinateChange::cubic(0.2);
        let recomputed_triv = t.rebased(&basis).in_chart(&change);
        let xp = change.forward(&x);
        let gf = |z: &[f64], nu: usize| Ok(gamma(&t, z, nu, &s)?.matrix);
        for mu in 0..d {
            let transformed = gamma_transform(gf, &basis, &change, &x, mu, &s).unwrap();
            let recomputed = gamma(&recomputed_triv, &xp, mu, &s).unwrap().matrix;
            prop_assert!(mat_residual(&transformed, &recomputed) < 10.0 * tol());
        }
    }

    #[test]
    fn annihilation_detects_perturbations(seed in any::<u64>(), n in 1usize..4, d in 1usize..3) {
        let mut r = common::rng(seed);
        let t = common::trivializer(&mut r, n, d, false);
        let x0 = common::point(&mut r, d);
        let y = t.transported_section(&FibreVector::new(x0, common::cvec(&mut r, n))).unwrap();
        let w = common::cvec(&mut r, n).normalize();
        let x = common::point(&mut r, d);
        let s = DifferenceScheme::default();
        let tt = t.clone();
        let bump = Section::from_fn(move |z: &[f64]| {
            let l_inv = tt.inverse_at(z).unwrap();
            l_inv * &w * c(1e-3 * (z[0] + 0.5).sin(), 0.)
        });
        let perturbed = y.linear_combination(c(1., 0.), &bump, c(1., 0.));
        let clean = d_mu_analytic(&t, &y, &x, 0, &s).unwrap().components;
        prop_assert!(clean.norm() <= tol() * y.eval(&x).unwrap().norm().max(1.0));
        let dirty = d_mu_analytic(&t, &perturbed, &x, 0, &s).unwrap().components;
        // The response is 1e-3·cos(x⁰+0.5)·L⁻¹w, bounded away from zero on [-1, 1].
        prop_assert!(dirty.norm() > 10.0 * tol());
    }
}

#[test]
fn limit_form_converges_at_second_order() {
    let mut r = common::rng(7);
    let (n, d) = (3, 2);
    let t = common::trivializer(&mut r, n, d, false);
    let y = common::section(&mut r, n, d);
    let x = common::point(&mut r, d);
    let reference = d_mu_analytic(
        &t,
        &y,
        &x,
        1,
        &DifferenceScheme::central(1e-3).with_richardson(3),
    )
    .unwrap()
    .components;
    let errors: Vec<f64> = (0..5)
        .map(|k| {
            let s = DifferenceScheme::central(1e-2 * 0.5f64.powi(k));
            (d_mu_limit(&t, &y, &x, 1, &s).unwrap().components - &reference).norm()
        })
        .collect();
    let slope = (errors[0] / errors[4]).log2() / 4.0;
    assert!(
        (1.8..=2.2).contains(&slope),
        "slope {slope}, errors {errors:?}"
    );

    let forward: Vec<f64> = (0..5)
        .map(|k| {
            let s = DifferenceScheme::forward(1e-2 * 0.5f64.powi(k));
            (d_mu_limit(&t, &y, &x, 1, &s).unwrap().components - &reference).norm()
        })
        .collect();
    let slope = (forward[0] / forward[4]).log2() / 4.0;
    assert!((0.8..=1.2).contains(&slope), "forward slope {slope}");
}

#[test]
fn richardson_improves_coarse_steps() {
    let mut r = common::rng(11);
    let t = common::trivializer(&mut r, 2, 1, false);
    let y = common::section(&mut r, 2, 1);
    let x = [0.3];
    let exact = d_mu_analytic(
        &t,
        &y,
        &x,
        0,
        &DifferenceScheme::central(1e-3).with_richardson(3),
    )
    .unwrap()
    .components;
    let plain = d_mu_limit(&t, &y, &x, 0, &DifferenceScheme::central(1e-2))
        .unwrap()
        .components;
    let extrapolated = d_mu_limit(
        &t,
        &y,
        &x,
        0,
        &DifferenceScheme::central(1e-2).with_richardson(2),
    )
    .unwrap()
    .components;
    assert!((extrapolated - &exact).norm() < 0.01 * (plain - &exact).norm());
    let _ = CMat::zeros(1, 1);
}
