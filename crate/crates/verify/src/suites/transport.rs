//! The bundle transport `l_{x→y}` and transported sections.

use hilbert_bundle::linalg::{mat_residual, vec_residual};
use hilbert_bundle::{CMat, Error, FibreVector};

use crate::catalog::SectionFamily;

use super::{solve, solve_vec, suite, Ctx, Outcome, Suite, Tol};

pub(super) fn suites() -> Vec<Suite> {
    vec![
        suite(
            "eq-2.20-fibre-to-fibre",
            "2.20",
            Tol::Algebraic,
            fibre_to_fibre,
        ),
        suite("eq-2.21-definition", "2.21", Tol::Algebraic, definition),
        suite("eq-2.22-cocycle", "2.22", Tol::Algebraic, cocycle),
        suite("eq-2.23-identity", "2.23", Tol::Algebraic, identity),
        suite("eq-2.24-linearity", "2.24", Tol::Algebraic, linearity),
        suite("eq-2.25-inverse", "2.25", Tol::Algebraic, inverse),
        suite(
            "eq-2.26-transported-section",
            "2.26",
            Tol::Algebraic,
            transported_section,
        ),
        suite(
            "eq-2.27-lifted-vector",
            "2.27",
            Tol::Algebraic,
            lifted_vector,
        ),
    ]
}

fn fibre_to_fibre(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let l = t.transport(&x, &y)?;
        ctx.expect(l.from == x && l.to == y);
        let image = l.apply(&FibreVector::new(x.clone(), ctx.cvec()))?;
        ctx.expect(image.at == y);
        if x != y {
            let stray = l.apply(&FibreVector::new(y.clone(), ctx.cvec()));
            ctx.expect(matches!(stray, Err(Error::BasePointMismatch { .. })));
        }
    }
    Ok(())
}

fn definition(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let oracle = solve(&t.matrix_at(&y)?, &t.matrix_at(&x)?)?;
        ctx.record(mat_residual(&t.transport(&x, &y)?.matrix, &oracle));
    }
    Ok(())
}

fn cocycle(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y, z) = (ctx.point(), ctx.point(), ctx.point());
        let two_step = t.transport(&z, &x)?.then(&t.transport(&x, &y)?)?;
        ctx.record(mat_residual(&two_step.matrix, &t.transport(&z, &y)?.matrix));
    }
    Ok(())
}

fn identity(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        ctx.record(mat_residual(
            &t.transport(&x, &x)?.matrix,
            &CMat::identity(n, n),
        ));
    }
    Ok(())
}

fn linearity(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let (u, v) = (ctx.cvec(), ctx.cvec());
        let (lam, mu) = (ctx.cnum(), ctx.cnum());
        let l = t.transport(&x, &y)?;
        let combo = l.apply(&FibreVector::new(x.clone(), &u * lam + &v * mu))?;
        let lu = l.apply(&FibreVector::new(x.clone(), u))?;
        let lv = l.apply(&FibreVector::new(x.clone(), v))?;
        ctx.record(vec_residual(
            &combo.components,
            &(lu.components * lam + lv.components * mu),
        ));
    }
    Ok(())
}

fn inverse(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let inv = t
            .transport(&x, &y)?
            .inverse()
            .ok_or("transport is not invertible")?;
        let back = t.transport(&y, &x)?;
        ctx.expect(inv.from == back.from && inv.to == back.to);
        ctx.record(mat_residual(&inv.matrix, &back.matrix));
    }
    Ok(())
}

fn transported_section(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    // Named sections of the transported family obey the same law.
    let named: Vec<_> = model
        .spec
        .sections
        .iter()
        .zip(&model.sections)
        .filter(|((_, fam), _)| matches!(fam, SectionFamily::Transported { .. }))
        .map(|(_, (_, s))| s)
        .collect();
    for i in 0..ctx.samples {
        let x0 = ctx.point();
        let y = t.transported_section(&FibreVector::new(x0.clone(), ctx.cvec()))?;
        let (x, z) = (ctx.point(), ctx.point());
        let l = t.transport(&x, &z)?.matrix;
        ctx.record(vec_residual(&y.eval(&z)?, &(&l * y.eval(&x)?)));
        if !named.is_empty() {
            let s = named[i % named.len()];
            ctx.record(vec_residual(&s.eval(&z)?, &(&l * s.eval(&x)?)));
        }
    }
    Ok(())
}

fn lifted_vector(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x0 = ctx.cvec();
        let p = ctx.point();
        let through = t.transported_section(&t.from_typical(&p, &x0)?)?;
        let x = ctx.point();
        ctx.record(vec_residual(
            &through.eval(&x)?,
            &solve_vec(&t.matrix_at(&x)?, &x0)?,
        ));
    }
    Ok(())
}
