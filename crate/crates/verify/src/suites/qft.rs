//! Lifting states, operators and fields into the bundle, and smearing.

use hilbert_bundle::linalg::{c, mat_residual, rel_residual, vec_residual};
use hilbert_bundle::morphism::assoc_transport;
use hilbert_bundle::qft::{
    apply_section_morphism, lift_field, lift_operator, lift_state, smear_bundle, smear_conventional,
};
use hilbert_bundle::{
    CMat, Complex64, FibreVector, Field, FieldComponents, SectionMorphism, TestFunction,
};

use super::{components_of, solve, solve_vec, suite, Ctx, Outcome, Suite, Tol};

pub(super) fn suites() -> Vec<Suite> {
    vec![
        suite("eq-3.3-smearing", "3.3", Tol::Algebraic, smearing),
        suite("eq-3.4-state-lift", "3.4", Tol::Algebraic, state_lift),
        suite("eq-3.5-expectation", "3.5", Tol::Algebraic, expectation).at_least(100),
        suite("eq-3.6-metric", "3.6", Tol::Algebraic, metric),
        suite(
            "eq-3.6'-typical-inner",
            "3.6'",
            Tol::Algebraic,
            typical_inner,
        ),
        suite("eq-3.7-operator-lift", "3.7", Tol::Algebraic, operator_lift),
        suite(
            "eq-3.8-hermiticity-unitarity",
            "3.8",
            Tol::Algebraic,
            hermiticity_unitarity,
        ),
        suite("eq-3.9-field-lift", "3.9", Tol::Algebraic, field_lift),
        suite(
            "eq-3.10-smeared-component",
            "3.10",
            Tol::Algebraic,
            smeared_component,
        ),
        suite(
            "eq-3.11-smeared-field",
            "3.11",
            Tol::Algebraic,
            smeared_field,
        ),
        suite(
            "eq-3.12-transport-form",
            "3.12",
            Tol::Algebraic,
            transport_form,
        ),
        suite(
            "eq-3.13-section-morphism",
            "3.13",
            Tol::Algebraic,
            section_morphism,
        ),
        suite("eq-3.14-pointwise", "3.14", Tol::Algebraic, pointwise),
        suite(
            "eq-3.15-expectation-sections",
            "3.15",
            Tol::Algebraic,
            expectation_sections,
        )
        .at_least(100),
    ]
}

/// Decision threshold for the G-Hermitian / G-unitary predicates.
const DECISION: f64 = 1e-9;

fn explicit_smear(
    fields: &FieldComponents,
    f: &TestFunction,
    nodes: &[(Vec<f64>, f64)],
) -> Result<CMat, super::SuiteError> {
    let n = fields.eval(0, &nodes[0].0)?.nrows();
    let mut acc = CMat::zeros(n, n);
    for (y, w) in nodes {
        for i in 0..fields.n_comp() {
            acc += fields.eval(i, y)? * (f.eval(i, y) * *w);
        }
    }
    Ok(acc)
}

fn smearing(ctx: &mut Ctx) -> Outcome {
    for i in 0..ctx.samples {
        let fields = components_of(&ctx.fields());
        let k = fields.n_comp();
        let (f, g) = (ctx.test_function(i, k), ctx.test_function(i + 1, k));
        let quad = ctx.quadrature(&f)?;
        let smeared = smear_conventional(&fields, &f, &quad)?;
        ctx.record(mat_residual(
            &smeared,
            &explicit_smear(&fields, &f, quad.nodes())?,
        ));
        if f.support() == g.support() {
            let (a, b) = (ctx.cnum(), ctx.cnum());
            let combo = smear_conventional(&fields, &f.linear_combination(a, &g, b), &quad)?;
            let split = smeared * a + smear_conventional(&fields, &g, &quad)? * b;
            ctx.record(mat_residual(&combo, &split));
        }
    }
    Ok(())
}

fn state_lift(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x0 = ctx.cvec();
        let lifted = lift_state(t, &x0)?;
        let x = ctx.point();
        ctx.record(vec_residual(
            &lifted.eval(&x)?,
            &solve_vec(&t.matrix_at(&x)?, &x0)?,
        ));
    }
    Ok(())
}

fn expectation(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let space = t.space();
    for _ in 0..ctx.samples {
        let (psi, a) = (ctx.cvec(), ctx.cmat());
        let x = ctx.point();
        let big_x = lift_state(t, &psi)?.eval(&x)?;
        let a_x = lift_operator(t, &Field::constant(a.clone())).eval(&x)?;
        let bundle = t.fibre_inner(
            &FibreVector::new(x.clone(), big_x.clone()),
            &FibreVector::new(x.clone(), &a_x * &big_x),
        )?;
        let oracle = (psi.adjoint() * space.gram() * (&a * &psi))[(0, 0)];
        ctx.record(rel_residual(&[bundle], &[oracle]));
    }
    Ok(())
}

fn metric(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let g = t.space().gram().clone();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let l = t.matrix_at(&x)?;
        ctx.record(mat_residual(&t.metric_at(&x)?, &(l.adjoint() * &g * &l)));
    }
    Ok(())
}

fn typical_inner(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let g = t.space().gram().clone();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let (u, v) = (ctx.cvec(), ctx.cvec());
        let fibre = t.fibre_inner(
            &FibreVector::new(x.clone(), u.clone()),
            &FibreVector::new(x.clone(), v.clone()),
        )?;
        let l = t.matrix_at(&x)?;
        let oracle = ((&l * &u).adjoint() * &g * (&l * &v))[(0, 0)];
        ctx.record(rel_residual(&[fibre], &[oracle]));
        // Back from the typical fibre.
        let phi = ctx.cvec();
        let w = t.from_typical(&x, &phi)?;
        ctx.record(vec_residual(&t.to_typical(&w)?, &phi));
    }
    Ok(())
}

fn operator_lift(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let g = t.space().gram().clone();
    for i in 0..ctx.samples {
        let a = ctx.morphism(i);
        let x = ctx.point();
        let lifted = lift_operator(t, &a.value).eval(&x)?;
        let l = t.matrix_at(&x)?;
        let ax = a.eval(&x)?;
        ctx.record(mat_residual(&lifted, &solve(&l, &(&ax * &l))?));
        // Through the metric: M⁻¹·L^H·G·A·L.
        let via_metric = solve(&t.metric_at(&x)?, &(l.adjoint() * &g * &ax * &l))?;
        ctx.record(mat_residual(&lifted, &via_metric));
    }
    Ok(())
}

fn hermiticity_unitarity(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let space = t.space().clone();
    for k in 0..ctx.samples {
        let a = match k % 3 {
            0 => ctx.g_hermitian(),
            1 => ctx.g_unitary(),
            _ => ctx.cmat(),
        };
        let x = ctx.point();
        let lifted = lift_operator(t, &Field::constant(a.clone())).eval(&x)?;
        let a_herm = space.is_hermitian(&a, DECISION)?;
        let a_unit = space.is_unitary(&a, DECISION)?;
        let conj = t.herm_conj_morphism_at(&x, &lifted)?;
        let lifted_herm = mat_residual(&conj, &lifted) <= DECISION;
        let lifted_unit =
            mat_residual(&(&conj * &lifted), &CMat::identity(a.nrows(), a.ncols())) <= DECISION;
        ctx.expect(a_herm == lifted_herm && a_unit == lifted_unit);
        ctx.expect(match k % 3 {
            0 => a_herm,
            1 => a_unit,
            _ => true,
        });
        // The conjugate of the lift is the lift of the conjugate.
        let conj_lift = lift_operator(t, &Field::constant(space.adjoint(&a)?)).eval(&x)?;
        ctx.record(mat_residual(&conj, &conj_lift));
    }
    Ok(())
}

fn field_lift(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let fields = ctx.fields();
        let lifted = lift_field(t, &components_of(&fields));
        ctx.expect(lifted.len() == fields.len());
        let x = ctx.point();
        let l = t.matrix_at(&x)?;
        for (phi, f) in lifted.iter().zip(&fields) {
            ctx.record(mat_residual(
                &phi.eval(&x)?,
                &solve(&l, &(f.eval(&x)? * &l))?,
            ));
        }
    }
    Ok(())
}

fn smeared_component(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let smooth = ctx.fields();
        let fields = components_of(&smooth);
        let k = fields.n_comp();
        let comp = i % k;
        let base = ctx.test_function(2 * i, k);
        let only = TestFunction::new(base.chart().clone(), base.support().clone(), {
            let base = base.clone();
            move |j, y| {
                if j == comp {
                    base.eval(j, y)
                } else {
                    c(0., 0.)
                }
            }
        })?;
        let quad = ctx.quadrature(&only)?;
        let x = ctx.point();
        let lifted = lift_field(t, &fields);
        let bundle = smear_bundle(t, &lifted, &only, &quad, &x)?;
        let single = FieldComponents::new(vec![fields.components()[comp].clone()]);
        let g = TestFunction::new(base.chart().clone(), base.support().clone(), {
            let base = base.clone();
            move |_, y| base.eval(comp, y)
        })?;
        let conventional = smear_conventional(&single, &g, &quad)?;
        let l = t.matrix_at(&x)?;
        ctx.record(mat_residual(&bundle, &solve(&l, &(conventional * &l))?));
    }
    Ok(())
}

fn smeared_field(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let fields = components_of(&ctx.fields());
        let f = ctx.test_function(i, fields.n_comp());
        let quad = ctx.quadrature(&f)?;
        let x = ctx.point();
        let bundle = smear_bundle(t, &lift_field(t, &fields), &f, &quad, &x)?;
        let l = t.matrix_at(&x)?;
        let conjugated = solve(&l, &(smear_conventional(&fields, &f, &quad)? * &l))?;
        ctx.record(mat_residual(&bundle, &conjugated));
    }
    Ok(())
}

fn transport_form(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let fields = components_of(&ctx.fields());
        let f = ctx.test_function(i, fields.n_comp());
        let quad = ctx.quadrature(&f)?;
        let x = ctx.point();
        let lifted = lift_field(t, &fields);
        let n = ctx.n();
        let mut oracle = CMat::zeros(n, n);
        for (y, w) in quad.nodes() {
            let l_y = t.matrix_at(y)?;
            for (k, field) in fields.components().iter().enumerate() {
                let phi_y = solve(&l_y, &(field.eval(y)? * &l_y))?;
                oracle += assoc_transport(t, y, &x, &phi_y)? * (f.eval(k, y) * *w);
            }
        }
        ctx.record(mat_residual(
            &smear_bundle(t, &lifted, &f, &quad, &x)?,
            &oracle,
        ));
    }
    Ok(())
}

fn section_morphism(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let a = lift_operator(t, &ctx.morphism(i).value);
        let x0 = ctx.cvec();
        let state = lift_state(t, &x0)?;
        let a_hat = SectionMorphism::generated(a.clone());
        let x = ctx.point();
        let expected = a.eval(&x)? * state.eval(&x)?;
        ctx.record(vec_residual(
            &apply_section_morphism(&a_hat, &state).eval(&x)?,
            &expected,
        ));
        ctx.record(vec_residual(&a_hat.apply(&state).eval(&x)?, &expected));
    }
    Ok(())
}

fn pointwise(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let op = ctx.morphism(i);
        let a_hat = SectionMorphism::generated(lift_operator(t, &op.value));
        let x0 = ctx.cvec();
        let x = ctx.point();
        let image = apply_section_morphism(&a_hat, &lift_state(t, &x0)?).eval(&x)?;
        let oracle = solve_vec(&t.matrix_at(&x)?, &(op.eval(&x)? * &x0))?;
        ctx.record(vec_residual(&image, &oracle));
    }
    Ok(())
}

fn expectation_sections(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let space = t.space().clone();
    for i in 0..ctx.samples {
        let op = ctx.morphism(i);
        let psi = ctx.cvec();
        let state = lift_state(t, &psi)?;
        let image = SectionMorphism::generated(lift_operator(t, &op.value)).apply(&state);
        let x = ctx.point();
        let bundle: Complex64 = t.fibre_inner(
            &FibreVector::new(x.clone(), state.eval(&x)?),
            &FibreVector::new(x.clone(), image.eval(&x)?),
        )?;
        let oracle = space.inner(&psi, &(op.eval(&x)? * &psi))?;
        ctx.record(rel_residual(&[bundle], &[oracle]));
    }
    Ok(())
}
