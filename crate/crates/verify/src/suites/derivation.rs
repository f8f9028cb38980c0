//! The derivations `D_μ` and `D̂_μ`, connection coefficients and their
//! behaviour under coordinate and basis changes.

use hilbert_bundle::derivation::{
    d_directional_section, d_hat_mu, d_hat_mu_commutator, d_hat_mu_components, d_hat_mu_matrix,
    d_mu_analytic, d_mu_components, d_mu_limit, gamma, gamma_transform, gamma_via_transport,
};
use hilbert_bundle::linalg::{c, mat_residual, vec_residual};
use hilbert_bundle::{
    BundleMorphism, CMat, CVec, DifferenceScheme, DirectionalField, Error, FibreVector, Field,
    Section, SectionMorphism,
};

use super::{
    exact_d_morphism, exact_d_section, exact_gamma, morphism_of, scalar_field, section_of, solve,
    suite, Ctx, Outcome, Suite, SuiteError, Tol,
};
use crate::sampling;

pub(super) fn suites() -> Vec<Suite> {
    vec![
        suite("eq-2.28-linearity", "2.28", Tol::Fd, linearity),
        suite("eq-2.29-limit-vs-exact", "2.29", Tol::Fd, limit_vs_exact),
        suite(
            "eq-2.29-convergence-order",
            "2.29",
            Tol::Fixed(0.2),
            convergence_order,
        ),
        suite(
            "eq-2.30-generated-only",
            "2.30",
            Tol::Algebraic,
            generated_only,
        ),
        suite("eq-2.31-commutator", "2.31", Tol::Fd, commutator_form),
        suite(
            "eq-2.32-leibniz-sections",
            "2.32",
            Tol::Fd,
            leibniz_sections,
        ),
        suite(
            "eq-2.33-leibniz-morphisms",
            "2.33",
            Tol::Fd,
            leibniz_morphisms,
        ),
        suite("eq-2.34-closed-form", "2.34", Tol::Fd, section_closed_form),
        suite(
            "eq-2.34-annihilates-transported",
            "2.34",
            Tol::Fd,
            annihilates_transported,
        ),
        suite(
            "eq-2.34-detects-perturbation",
            "2.34",
            Tol::Fixed(1.0),
            detects_perturbation,
        ),
        suite("eq-2.35-closed-form", "2.35", Tol::Fd, morphism_closed_form),
        suite(
            "eq-2.38-chart-covariance",
            "2.38",
            Tol::Fd,
            chart_covariance,
        ),
        suite("eq-2.b1-components", "2.b1", Tol::Fd, components),
        suite(
            "eq-2.b2-basis-derivative",
            "2.b2",
            Tol::Fd,
            basis_derivative,
        ),
        suite("eq-2.b3-gamma", "2.b3", Tol::Fd, gamma_routes),
        suite(
            "eq-2.b4-gamma-transform",
            "2.b4",
            Tol::Fd,
            gamma_transformation,
        ),
        suite("eq-2.b5-dhat-matrix", "2.b5", Tol::Fd, dhat_matrix),
    ]
}

fn linearity(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let (y, z) = (section_of(&ctx.section(i)), section_of(&ctx.section(i + 1)));
        let (a, b) = (ctx.cnum(), ctx.cnum());
        let (x, mu) = (ctx.point(), ctx.axis());
        let lhs = d_mu_analytic(t, &y.linear_combination(a, &z, b), &x, mu, &s)?.components;
        let rhs = d_mu_analytic(t, &y, &x, mu, &s)?.components * a
            + d_mu_analytic(t, &z, &x, mu, &s)?.components * b;
        ctx.record(vec_residual(&lhs, &rhs));
    }
    Ok(())
}

fn limit_vs_exact(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let y = ctx.section(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let limit = d_mu_limit(t, &section_of(&y), &x, mu, &s)?;
        ctx.record(vec_residual(
            &limit.components,
            &exact_d_section(model, &y, &x, mu)?,
        ));
    }
    Ok(())
}

/// Least-squares slope of `log err` against `log ε`.
fn slope(eps: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Errors below this are dominated by rounding and say nothing about the
/// truncation order.
const ROUNDING_FLOOR: f64 = 1e-11;

fn convergence_order(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let order = ctx.scheme.order;
    let eps: Vec<f64> = (0..5).map(|k| 1e-2 * 0.5f64.powi(k)).collect();
    let (n, dim) = (ctx.n(), ctx.dim());
    for _ in 0..ctx.samples {
        // Random sections only: a polynomial section of low degree may be
        // differentiated exactly.
        let y = sampling::section(&mut ctx.rng, n, dim);
        let (x, mu) = (ctx.point(), ctx.axis());
        let exact = exact_d_section(model, &y, &x, mu)?;
        let mut err = Vec::with_capacity(eps.len());
        for &e in &eps {
            let scheme = DifferenceScheme {
                epsilon: e,
                order,
                richardson_levels: 0,
                floor: 0.0,
            };
            err.push(vec_residual(
                &d_mu_limit(t, &section_of(&y), &x, mu, &scheme)?.components,
                &exact,
            ));
        }
        if err.iter().any(|e| *e < ROUNDING_FLOOR) {
            continue;
        }
        ctx.record((slope(&eps, &err) - f64::from(order.order())).abs());
    }
    Ok(())
}

fn generated_only(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let dim = ctx.dim();
    for i in 0..ctx.samples {
        let a = SectionMorphism::generated(morphism_of(&ctx.morphism(i)));
        let general = SectionMorphism::general(|y: &Section| y.clone());
        let mu = ctx.axis();
        ctx.expect(matches!(
            d_hat_mu(t, &general, mu, &s),
            Err(Error::UnsupportedMorphism)
        ));
        ctx.expect(matches!(
            d_hat_mu(t, &a, dim, &s),
            Err(Error::AxisOutOfRange { .. })
        ));
        ctx.expect(d_hat_mu(t, &a, mu, &s)?.generator().is_ok());
    }
    Ok(())
}

fn commutator_form(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let (a, y) = (ctx.morphism(i), ctx.section(i));
        let (x, mu) = (ctx.point(), ctx.axis());
        let a_hat = SectionMorphism::generated(morphism_of(&a));
        let comm = d_hat_mu_commutator(t, &a_hat, &section_of(&y), &x, mu, &s)?;
        let exact = exact_d_morphism(model, &a, &x, mu)? * y.eval(&x)?;
        ctx.record(vec_residual(&comm.components, &exact));
    }
    Ok(())
}

fn leibniz_sections(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let (f, y) = (ctx.scalar(), section_of(&ctx.section(i)));
        let (x, mu) = (ctx.point(), ctx.axis());
        let lhs = d_mu_analytic(t, &y.scaled_by(&scalar_field(&f)), &x, mu, &s)?.components;
        let rhs = y.eval(&x)? * f.partial(mu, &x)?
            + d_mu_analytic(t, &y, &x, mu, &s)?.components * f.eval(&x)?;
        ctx.record(vec_residual(&lhs, &rhs));
    }
    Ok(())
}

fn leibniz_morphisms(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let a = SectionMorphism::generated(morphism_of(&ctx.morphism(i)));
        let b = SectionMorphism::generated(morphism_of(&ctx.morphism(i + 1)));
        let (x, mu) = (ctx.point(), ctx.axis());
        let at = |m: &SectionMorphism| -> Result<CMat, SuiteError> { Ok(m.generator()?.eval(&x)?) };
        let lhs = at(&d_hat_mu(t, &a.compose(&b), mu, &s)?)?;
        let rhs =
            at(&d_hat_mu(t, &a, mu, &s)?)? * at(&b)? + at(&a)? * at(&d_hat_mu(t, &b, mu, &s)?)?;
        ctx.record(mat_residual(&lhs, &rhs));
    }
    Ok(())
}

fn section_closed_form(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let y = ctx.section(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let analytic = d_mu_analytic(t, &section_of(&y), &x, mu, &s)?.components;
        let limit = d_mu_limit(t, &section_of(&y), &x, mu, &s)?.components;
        let exact = exact_d_section(model, &y, &x, mu)?;
        ctx.record(vec_residual(&analytic, &exact).max(vec_residual(&analytic, &limit)));
    }
    Ok(())
}

fn annihilates_transported(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let p = ctx.point();
        let y = t.transported_section(&FibreVector::new(p, ctx.cvec()))?;
        let (x, mu) = (ctx.point(), ctx.axis());
        let d = d_mu_analytic(t, &y, &x, mu, &s)?.components;
        ctx.record(vec_residual(&d, &CVec::zeros(n)));
        let d = d_mu_limit(t, &y, &x, mu, &s)?.components;
        ctx.record(vec_residual(&d, &CVec::zeros(n)));
    }
    Ok(())
}

/// Size of the non-transported admixture.
const PERTURBATION: f64 = 1e-3;

fn detects_perturbation(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let fd_tol = model.spec.tolerances.fd;
    for _ in 0..ctx.samples {
        let p = ctx.point();
        let base = t.transported_section(&FibreVector::new(p, ctx.cvec()))?;
        let (x, mu) = (ctx.point(), ctx.axis());
        let w = ctx.cvec();
        let w = &w / c(w.norm(), 0.);
        // x^μ times the transported section through the unit vector w at x:
        // D_μ of it at x is exactly w.
        let bump = t.transported_section(&FibreVector::new(x.clone(), w))?;
        let perturbed = base.linear_combination(
            c(1., 0.),
            &bump.scaled_by(&Field::new(move |z: &[f64]| c(PERTURBATION * z[mu], 0.))),
            c(1., 0.),
        );
        let response = d_mu_analytic(t, &perturbed, &x, mu, &s)?.components.norm();
        ctx.record(10.0 * fd_tol / response);
    }
    Ok(())
}

fn morphism_closed_form(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let (a, y) = (ctx.morphism(i), ctx.section(i));
        let (x, mu) = (ctx.point(), ctx.axis());
        let closed = d_hat_mu_matrix(t, &morphism_of(&a), &x, mu, &s)?;
        let a_hat = SectionMorphism::generated(morphism_of(&a));
        let comm = d_hat_mu_commutator(t, &a_hat, &section_of(&y), &x, mu, &s)?.components;
        let yx = y.eval(&x)?;
        ctx.record(
            vec_residual(&(&closed * &yx), &comm)
                .max(mat_residual(&closed, &exact_d_morphism(model, &a, &x, mu)?)),
        );
    }
    Ok(())
}

fn chart_covariance(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let change = &model.change;
    let primed = t.in_chart(change);
    let dim = ctx.dim();
    for i in 0..ctx.samples {
        let (y, a) = (section_of(&ctx.section(i)), ctx.morphism(i));
        let x = ctx.point();
        let xp = change.forward(&x);
        let jac_inv = change.jacobian_inverse(&x)?;
        let back = change.inverse_map();
        let a_p = BundleMorphism::new(a.value.pullback(move |z: &[f64]| back(z)));
        let y_p = y.in_chart(change);
        for mu in 0..dim {
            let lhs = d_mu_analytic(&primed, &y_p, &xp, mu, &s)?.components;
            let lhs_hat = d_hat_mu_matrix(&primed, &a_p, &xp, mu, &s)?;
            let mut rhs = CVec::zeros(ctx.n());
            let mut rhs_hat = CMat::zeros(ctx.n(), ctx.n());
            for nu in 0..dim {
                let w = c(jac_inv[(nu, mu)], 0.);
                rhs += d_mu_analytic(t, &y, &x, nu, &s)?.components * w;
                rhs_hat += d_hat_mu_matrix(t, &morphism_of(&a), &x, nu, &s)? * w;
            }
            ctx.record(vec_residual(&lhs, &rhs).max(mat_residual(&lhs_hat, &rhs_hat)));
        }
        // D_V is chart independent.
        let coeffs: Vec<f64> = (0..dim).map(|_| ctx.cnum().re).collect();
        let v = DirectionalField::new(Field::constant(coeffs));
        let plain = d_directional_section(t, &y, &v, &x, &s)?.components;
        let moved = d_directional_section(&primed, &y_p, &v.in_chart(change), &xp, &s)?.components;
        ctx.record(vec_residual(&moved, &plain));
    }
    Ok(())
}

fn components(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let y = ctx.section(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let d = d_mu_components(t, &section_of(&y), &x, mu, &s)?.components;
        ctx.record(vec_residual(&d, &exact_d_section(model, &y, &x, mu)?));
    }
    Ok(())
}

fn basis_derivative(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let (x, mu) = (ctx.point(), ctx.axis());
        let j = rand::Rng::random_range(&mut ctx.rng, 0..n);
        let e_j = Section::new(Field::constant(CVec::from_fn(n, |i, _| {
            c(f64::from(u8::from(i == j)), 0.)
        })));
        let d = d_mu_analytic(t, &e_j, &x, mu, &s)?.components;
        let g = gamma(t, &x, mu, &s)?.matrix;
        let exact = exact_gamma(model, &x, mu)?;
        ctx.record(
            vec_residual(&d, &g.column(j).into_owned())
                .max(vec_residual(&d, &exact.column(j).into_owned())),
        );
    }
    Ok(())
}

fn gamma_routes(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for _ in 0..ctx.samples {
        let (x, mu) = (ctx.point(), ctx.axis());
        let g = gamma(t, &x, mu, &s)?;
        ctx.expect(g.at == x && g.mu == mu);
        let via = gamma_via_transport(t, &x, mu, &s)?;
        let exact = exact_gamma(model, &x, mu)?;
        ctx.record(mat_residual(&g.matrix, &exact).max(mat_residual(&via, &exact)));
    }
    Ok(())
}

fn gamma_transformation(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let change = &model.change;
    let basis = &model.basis;
    let recomputed = t.rebased(&basis.value).in_chart(change);
    for _ in 0..ctx.samples {
        let (x, mu) = (ctx.point(), ctx.axis());
        let transformed = gamma_transform(
            |z: &[f64], nu| Ok(gamma(t, z, nu, &s)?.matrix),
            &basis.value,
            change,
            &x,
            mu,
            &s,
        )?;
        let direct = gamma(&recomputed, &change.forward(&x), mu, &s)?.matrix;
        // Exact form from the families' partials.
        let cx = basis.eval(&x)?;
        let jac_inv = change.jacobian_inverse(&x)?;
        let mut exact = CMat::zeros(ctx.n(), ctx.n());
        for nu in 0..ctx.dim() {
            let term = exact_gamma(model, &x, nu)? * &cx + basis.partial(nu, &x)?;
            exact += solve(&cx, &term)? * c(jac_inv[(nu, mu)], 0.);
        }
        ctx.record(mat_residual(&transformed, &direct).max(mat_residual(&transformed, &exact)));
    }
    Ok(())
}

fn dhat_matrix(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    let (n, dim) = (ctx.n(), ctx.dim());
    for i in 0..ctx.samples {
        let a = ctx.morphism(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let comp = d_hat_mu_components(t, &morphism_of(&a), &x, mu, &s)?;
        ctx.record(mat_residual(&comp, &exact_d_morphism(model, &a, &x, mu)?));
        // For A = L⁻¹·Â·L the matrix is L⁻¹·∂_μÂ·L.
        let op = sampling::morphism(&mut ctx.rng, n, dim);
        let (tt, opv) = (t.clone(), op.value.clone());
        let lifted = BundleMorphism::new(Field::fallible(move |z: &[f64]| {
            let (l, l_inv) = tt.pair_at(z)?;
            Ok(l_inv * opv.eval(z)? * l)
        }));
        let l = t.matrix_at(&x)?;
        let expected = solve(&l, &(op.partial(mu, &x)? * &l))?;
        ctx.record(mat_residual(
            &d_hat_mu_matrix(t, &lifted, &x, mu, &s)?,
            &expected,
        ));
    }
    Ok(())
}
