//! The associated transport `l°` on fibre endomorphisms, its derivation
//! `D°_μ` and the `l̆` relation.

use hilbert_bundle::derivation::d_hat_mu_matrix;
use hilbert_bundle::linalg::{mat_residual, vec_residual};
use hilbert_bundle::morphism::{
    assoc_transport, breve_l, chi, d_circ_mu, d_circ_mu_limit, transported_from_morphism,
    transported_morphism,
};
use hilbert_bundle::{CMat, CVec, SectionMorphism};

use crate::catalog::MorphismFamily;

use super::{
    exact_d_morphism, exact_d_section, morphism_of, section_of, solve, suite, Ctx, Outcome, Suite,
    Tol,
};

pub(super) fn suites() -> Vec<Suite> {
    vec![
        suite("eq-2.39-definition", "2.39", Tol::Algebraic, definition),
        suite("eq-2.39-linearity", "2.39", Tol::Algebraic, linearity),
        suite("eq-2.40-cocycle", "2.40", Tol::Algebraic, cocycle),
        suite("eq-2.41-identity", "2.41", Tol::Algebraic, identity),
        suite("eq-2.42-inverse", "2.42", Tol::Algebraic, inverse),
        suite(
            "eq-2.43-transported-morphisms",
            "2.43",
            Tol::Algebraic,
            transported_morphisms,
        ),
        suite("eq-2.44-anchored", "2.44", Tol::Algebraic, anchored),
        suite(
            "eq-2.45-from-morphism",
            "2.45",
            Tol::Algebraic,
            from_morphism,
        ),
        suite("eq-2.46-limit-vs-exact", "2.46", Tol::Fd, limit_vs_exact),
        suite("eq-2.47-closed-form", "2.47", Tol::Fd, closed_form),
        suite("eq-2.48-bridge", "2.48", Tol::Fd, bridge),
        suite("eq-2.49-breve", "2.49", Tol::Algebraic, breve),
        suite(
            "eq-2.50-breve-derivative",
            "2.50",
            Tol::Fd,
            breve_derivative,
        ),
    ]
}

fn definition(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let chi_x = ctx.cmat();
        let oracle = t.transport(&x, &y)?.matrix * &chi_x * t.transport(&y, &x)?.matrix;
        ctx.record(mat_residual(&assoc_transport(t, &x, &y, &chi_x)?, &oracle));
    }
    Ok(())
}

fn linearity(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let (a, b) = (ctx.cmat(), ctx.cmat());
        let (lam, mu) = (ctx.cnum(), ctx.cnum());
        let combo = assoc_transport(t, &x, &y, &(&a * lam + &b * mu))?;
        let split = assoc_transport(t, &x, &y, &a)? * lam + assoc_transport(t, &x, &y, &b)? * mu;
        ctx.record(mat_residual(&combo, &split));
    }
    Ok(())
}

fn cocycle(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y, z) = (ctx.point(), ctx.point(), ctx.point());
        let chi_z = ctx.cmat();
        let two_step = assoc_transport(t, &x, &y, &assoc_transport(t, &z, &x, &chi_z)?)?;
        ctx.record(mat_residual(
            &two_step,
            &assoc_transport(t, &z, &y, &chi_z)?,
        ));
    }
    Ok(())
}

fn identity(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let chi_x = ctx.cmat();
        ctx.record(mat_residual(&assoc_transport(t, &x, &x, &chi_x)?, &chi_x));
    }
    Ok(())
}

fn inverse(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let (chi_x, chi_y) = (ctx.cmat(), ctx.cmat());
        let round = assoc_transport(t, &y, &x, &assoc_transport(t, &x, &y, &chi_x)?)?;
        let other = assoc_transport(t, &x, &y, &assoc_transport(t, &y, &x, &chi_y)?)?;
        ctx.record(mat_residual(&round, &chi_x).max(mat_residual(&other, &chi_y)));
    }
    Ok(())
}

fn transported_morphisms(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let named: Vec<_> = model
        .spec
        .morphisms
        .iter()
        .zip(&model.morphisms)
        .filter(|((_, fam), _)| matches!(fam, MorphismFamily::TransportedFrom { .. }))
        .map(|(_, (_, m))| m)
        .collect();
    for i in 0..ctx.samples {
        let x0 = ctx.point();
        let a = transported_morphism(t, &x0, &ctx.cmat())?;
        let (x, y) = (ctx.point(), ctx.point());
        ctx.record(mat_residual(
            &a.eval(&y)?,
            &assoc_transport(t, &x, &y, &a.eval(&x)?)?,
        ));
        if !named.is_empty() {
            let m = named[i % named.len()];
            ctx.record(mat_residual(
                &m.eval(&y)?,
                &assoc_transport(t, &x, &y, &m.eval(&x)?)?,
            ));
        }
    }
    Ok(())
}

fn anchored(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x0, y) = (ctx.point(), ctx.point());
        let chi0 = ctx.cmat();
        let a = transported_morphism(t, &x0, &chi0)?;
        let expected = t.transport(&x0, &y)?.matrix * &chi0 * t.transport(&y, &x0)?.matrix;
        ctx.record(mat_residual(&a.eval(&x0)?, &chi0).max(mat_residual(&a.eval(&y)?, &expected)));
    }
    Ok(())
}

fn from_morphism(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let a = morphism_of(&ctx.morphism(i));
        let (x, y) = (ctx.point(), ctx.point());
        let seeded = transported_from_morphism(t, &x, &a)?;
        ctx.record(mat_residual(
            &seeded.eval(&y)?,
            &assoc_transport(t, &x, &y, &a.eval(&x)?)?,
        ));
    }
    Ok(())
}

fn limit_vs_exact(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let a = ctx.morphism(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let limit = d_circ_mu_limit(t, &chi(&morphism_of(&a)), &x, mu, &s)?;
        ctx.record(mat_residual(&limit, &exact_d_morphism(model, &a, &x, mu)?));
    }
    Ok(())
}

fn closed_form(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let a = ctx.morphism(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let section = chi(&morphism_of(&a));
        let closed = d_circ_mu(t, &section, &x, mu, &s)?;
        let limit = d_circ_mu_limit(t, &section, &x, mu, &s)?;
        ctx.record(
            mat_residual(&closed, &limit)
                .max(mat_residual(&closed, &exact_d_morphism(model, &a, &x, mu)?)),
        );
    }
    Ok(())
}

fn bridge(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let (a, y) = (ctx.morphism(i), ctx.section(i));
        let (x, mu) = (ctx.point(), ctx.axis());
        let yx = y.eval(&x)?;
        let hat = d_hat_mu_matrix(t, &morphism_of(&a), &x, mu, &s)? * &yx;
        let circ = d_circ_mu_limit(t, &chi(&morphism_of(&a)), &x, mu, &s)? * &yx;
        ctx.record(vec_residual(&hat, &circ));
    }
    Ok(())
}

fn breve(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let n = ctx.n();
    for i in 0..ctx.samples {
        let (a, y) = (ctx.morphism(i), ctx.section(i));
        let (x, z) = (ctx.point(), ctx.point());
        let b = breve_l(t, &SectionMorphism::generated(morphism_of(&a)), &x)?;
        let value = b.eval(&section_of(&y), &z)?;
        ctx.expect(value.at == x);
        let to_x = solve(&t.matrix_at(&x)?, &t.matrix_at(&z)?)?;
        let yz = y.eval(&z)?;
        let expected = &to_x * (a.eval(&z)? * &yz) - a.eval(&x)? * (&to_x * &yz);
        ctx.record(vec_residual(&value.components, &expected));
        let at_base = b.eval(&section_of(&y), &x)?.components;
        ctx.record(vec_residual(&at_base, &CVec::zeros(n)));
    }
    Ok(())
}

fn breve_derivative(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let (t, s) = (&model.triv, ctx.scheme);
    for i in 0..ctx.samples {
        let (a, y) = (ctx.morphism(i), ctx.section(i));
        let (x, mu) = (ctx.point(), ctx.axis());
        let b = breve_l(t, &SectionMorphism::generated(morphism_of(&a)), &x)?;
        let d = b.derivative_at_base(&section_of(&y), mu, &s)?.components;
        let exact: CVec = exact_d_morphism(model, &a, &x, mu)? * y.eval(&x)?;
        ctx.record(vec_residual(&d, &exact));
        // Equivalently D_μ(AY) − A·D_μY.
        let ay = crate::catalog::Smooth {
            value: hilbert_bundle::Field::fallible({
                let (a, y) = (a.clone(), y.clone());
                move |z: &[f64]| Ok(a.eval(z)? * y.eval(z)?)
            }),
            partials: (0..ctx.dim())
                .map(|nu| {
                    let (a, y) = (a.clone(), y.clone());
                    hilbert_bundle::Field::fallible(move |z: &[f64]| {
                        Ok(a.partial(nu, z)? * y.eval(z)? + a.eval(z)? * y.partial(nu, z)?)
                    })
                })
                .collect(),
        };
        let via_sections: CVec = exact_d_section(model, &ay, &x, mu)?
            - a.eval(&x)? * exact_d_section(model, &y, &x, mu)?;
        ctx.record(vec_residual(&d, &via_sections));
        let _: &CMat = &a.eval(&x)?;
    }
    Ok(())
}
