//! Fibre metrics and ‡-conjugation of point maps, fibre maps and morphisms.

use hilbert_bundle::linalg::{mat_residual, rel_residual};
use hilbert_bundle::morphism::{chi, chi_inverse};
use hilbert_bundle::{CMat, CVec, Complex64, FibreMap, FibreVector, MorphismSection, Trivializer};

use super::{morphism_of, solve, suite, Ctx, Outcome, Suite, Tol};

pub(super) fn suites() -> Vec<Suite> {
    vec![
        suite(
            "eq-2.1-metric-compatibility",
            "2.1",
            Tol::Algebraic,
            metric_compatibility,
        ),
        suite("eq-2.1'-round-trip", "2.1'", Tol::Algebraic, round_trip),
        suite("eq-2.2-isometry", "2.2", Tol::Algebraic, isometry),
        suite("eq-2.3-point-pairing", "2.3", Tol::Algebraic, point_pairing),
        suite(
            "eq-2.4-point-conjugate",
            "2.4",
            Tol::Algebraic,
            point_conjugate,
        ),
        suite(
            "eq-2.5-unitary-point-map",
            "2.5",
            Tol::Algebraic,
            unitary_point_map,
        ),
        suite(
            "eq-2.6-trivializer-unitary",
            "2.6",
            Tol::Algebraic,
            trivializer_unitary,
        ),
        suite("eq-2.7-fibre-pairing", "2.7", Tol::Algebraic, fibre_pairing),
        suite(
            "eq-2.8-fibre-conjugate",
            "2.8",
            Tol::Algebraic,
            fibre_conjugate,
        ),
        suite("eq-2.9-involution", "2.9", Tol::Algebraic, involution),
        suite(
            "eq-2.10-anti-homomorphism",
            "2.10",
            Tol::Algebraic,
            anti_homomorphism,
        ),
        suite(
            "eq-2.11-hermitian-maps",
            "2.11",
            Tol::Algebraic,
            hermitian_maps,
        ),
        suite(
            "eq-2.12-1-transport-hermitian",
            "2.12-1",
            Tol::Algebraic,
            transport_hermitian,
        ),
        suite("eq-2.12-unitary-maps", "2.12", Tol::Algebraic, unitary_maps),
        suite(
            "eq-2.12'-unitary-iff-isometric",
            "2.12'",
            Tol::Algebraic,
            maps_unitary_iff_isometric,
        ),
        suite(
            "eq-2.13-transport-unitary",
            "2.13",
            Tol::Algebraic,
            transport_unitary,
        ),
        suite(
            "eq-2.14h-hermitian-and-unitary",
            "2.14h",
            Tol::Algebraic,
            hermitian_and_unitary,
        ),
        suite(
            "eq-2.15-morphism-pairing",
            "2.15",
            Tol::Algebraic,
            morphism_pairing,
        ),
        suite(
            "eq-2.16-morphism-conjugate",
            "2.16",
            Tol::Algebraic,
            morphism_conjugate,
        ),
        suite(
            "eq-2.17-hermitian-morphism",
            "2.17",
            Tol::Algebraic,
            hermitian_morphism,
        ),
        suite(
            "eq-2.18-unitary-morphism",
            "2.18",
            Tol::Algebraic,
            unitary_morphism,
        ),
        suite(
            "eq-2.19-unitary-iff-isometric",
            "2.19",
            Tol::Algebraic,
            morphism_unitary_iff_isometric,
        ),
        suite("eq-chi-bijection", "chi", Tol::Algebraic, chi_bijection),
        suite(
            "eq-morf_B-pointwise",
            "morf_B",
            Tol::Algebraic,
            morf_b_pointwise,
        ),
    ]
}

/// Distinguishes "identity holds" from "identity fails" in the
/// equivalence suites.
const DECISION: f64 = 1e-9;

fn scalar_residual(a: Complex64, b: Complex64) -> f64 {
    rel_residual(&[a], &[b])
}

fn fv(x: &[f64], v: CVec) -> FibreVector {
    FibreVector::new(x.to_vec(), v)
}

fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn metric_compatibility(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let (u, v) = (ctx.cvec(), ctx.cvec());
        let l = t.matrix_at(&x)?;
        let typical = t.space().inner(&(&l * &u), &(&l * &v))?;
        let via_metric = (u.adjoint() * t.metric_at(&x)? * &v)[(0, 0)];
        let fibre = t.fibre_inner(&fv(&x, u), &fv(&x, v))?;
        ctx.record(scalar_residual(fibre, typical).max(scalar_residual(via_metric, typical)));
    }
    Ok(())
}

fn round_trip(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let (phi, psi) = (ctx.cvec(), ctx.cvec());
        let back = t.fibre_inner(&t.from_typical(&x, &phi)?, &t.from_typical(&x, &psi)?)?;
        ctx.record(scalar_residual(back, t.space().inner(&phi, &psi)?));
    }
    Ok(())
}

fn isometry(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let (u, v) = (fv(&x, ctx.cvec()), fv(&x, ctx.cvec()));
        let l = t.transport(&x, &y)?;
        let moved = t.fibre_inner(&l.apply(&u)?, &l.apply(&v)?)?;
        ctx.record(scalar_residual(moved, t.fibre_inner(&u, &v)?));
    }
    Ok(())
}

fn point_pairing(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let a = ctx.cmat();
        let (phi, chi_x) = (ctx.cvec(), ctx.cvec());
        let a_dag = t.herm_conj_point_map(&x, &a)?;
        let lhs = t.fibre_inner(&fv(&x, a_dag * &phi), &fv(&x, chi_x.clone()))?;
        ctx.record(scalar_residual(lhs, t.space().inner(&phi, &(a * chi_x))?));
    }
    Ok(())
}

fn point_conjugate(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let a = ctx.cmat();
        // ⟨A‡φ|χ⟩_x = ≺φ|Aχ≻ for all φ, χ  ⟺  A‡ = M_x⁻¹·A*·G.
        let oracle = solve(&t.metric_at(&x)?, &(a.adjoint() * t.space().gram()))?;
        ctx.record(mat_residual(&t.herm_conj_point_map(&x, &a)?, &oracle));
    }
    Ok(())
}

fn unitary_point_map(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let a = ctx.g_unitary() * t.matrix_at(&x)?;
        let a_dag = t.herm_conj_point_map(&x, &a)?;
        ctx.record(
            mat_residual(&(&a_dag * &a), &identity(n))
                .max(mat_residual(&(&a * &a_dag), &identity(n))),
        );
        // A dilated map is not unitary.
        let b = &a * hilbert_bundle::linalg::c(2.0, 0.0);
        let b_dag = t.herm_conj_point_map(&x, &b)?;
        ctx.expect(mat_residual(&(b_dag * b), &identity(n)) > DECISION);
    }
    Ok(())
}

fn trivializer_unitary(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let l = t.matrix_at(&x)?;
        ctx.record(mat_residual(
            &t.herm_conj_point_map(&x, &l)?,
            &solve(&l, &identity(n))?,
        ));
    }
    Ok(())
}

fn fibre_pairing(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let a = FibreMap::new(y.clone(), x.clone(), ctx.cmat());
        let a_dag = t.herm_conj_fibre_map(&a)?;
        let (phi, psi) = (fv(&x, ctx.cvec()), fv(&y, ctx.cvec()));
        let lhs = t.fibre_inner(&a_dag.apply(&phi)?, &psi)?;
        let rhs = t.fibre_inner(&phi, &a.apply(&psi)?)?;
        ctx.record(scalar_residual(lhs, rhs));
    }
    Ok(())
}

fn fibre_conjugate(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let a = ctx.cmat();
        let a_dag = t.herm_conj_fibre_map(&FibreMap::new(y.clone(), x.clone(), a.clone()))?;
        let oracle = solve(&t.metric_at(&y)?, &(a.adjoint() * t.metric_at(&x)?))?;
        ctx.expect(a_dag.from == x && a_dag.to == y);
        ctx.record(mat_residual(&a_dag.matrix, &oracle));
    }
    Ok(())
}

fn involution(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let a = FibreMap::new(x, y, ctx.cmat());
        let twice = t.herm_conj_fibre_map(&t.herm_conj_fibre_map(&a)?)?;
        ctx.expect(twice.from == a.from && twice.to == a.to);
        ctx.record(mat_residual(&twice.matrix, &a.matrix));
    }
    Ok(())
}

fn anti_homomorphism(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y, z) = (ctx.point(), ctx.point(), ctx.point());
        let a = FibreMap::new(x.clone(), y.clone(), ctx.cmat());
        let b = FibreMap::new(y, z, ctx.cmat());
        let lhs = t.herm_conj_fibre_map(&a.then(&b)?)?;
        let rhs = t
            .herm_conj_fibre_map(&b)?
            .then(&t.herm_conj_fibre_map(&a)?)?;
        ctx.expect(lhs.from == rhs.from && lhs.to == rhs.to);
        ctx.record(mat_residual(&lhs.matrix, &rhs.matrix));
    }
    Ok(())
}

/// `p ↦ q` member of the family `L(q)⁻¹·K·L(p)`.
fn family(t: &Trivializer, k: &CMat, p: &[f64], q: &[f64]) -> Result<FibreMap, super::SuiteError> {
    Ok(FibreMap::new(
        p.to_vec(),
        q.to_vec(),
        solve(&t.matrix_at(q)?, &(k * t.matrix_at(p)?))?,
    ))
}

fn hermitian_maps(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let h = ctx.g_hermitian();
        let conj = t.herm_conj_fibre_map(&family(t, &h, &y, &x)?)?;
        ctx.record(mat_residual(&conj.matrix, &family(t, &h, &x, &y)?.matrix));
        let k = ctx.cmat();
        let conj = t.herm_conj_fibre_map(&family(t, &k, &y, &x)?)?;
        ctx.expect(mat_residual(&conj.matrix, &family(t, &k, &x, &y)?.matrix) > DECISION);
    }
    Ok(())
}

fn transport_hermitian(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let conj = t.herm_conj_fibre_map(&t.transport(&y, &x)?)?;
        let l = t.transport(&x, &y)?;
        ctx.expect(conj.from == l.from && conj.to == l.to);
        ctx.record(mat_residual(&conj.matrix, &l.matrix));
    }
    Ok(())
}

/// `‖A‡·A − 1‖` for `A: fibre_from → fibre_to`: zero iff `A‡` is a left
/// inverse.
fn unitarity_defect(t: &Trivializer, a: &FibreMap) -> Result<f64, super::SuiteError> {
    let a_dag = t.herm_conj_fibre_map(a)?;
    Ok(mat_residual(&(a_dag.matrix * &a.matrix), &identity(t.n())))
}

/// Largest deviation of `⟨Au|Av⟩_to` from `⟨u|v⟩_from` over a few pairs.
fn isometry_defect(ctx: &mut Ctx, a: &FibreMap, apply: bool) -> Result<f64, super::SuiteError> {
    let model = ctx.model;
    let t = &model.triv;
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let (u, v) = (fv(&a.from, ctx.cvec()), fv(&a.from, ctx.cvec()));
        let (au, av) = if apply {
            (a.apply(&u)?, a.apply(&v)?)
        } else {
            (u.clone(), v.clone())
        };
        worst = worst.max(scalar_residual(
            t.fibre_inner(&au, &av)?,
            t.fibre_inner(&u, &v)?,
        ));
    }
    Ok(worst)
}

fn unitary_maps(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let u = ctx.g_unitary();
        ctx.record(unitarity_defect(t, &family(t, &u, &y, &x)?)?);
    }
    Ok(())
}

fn maps_unitary_iff_isometric(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let u = ctx.g_unitary();
        let a = family(t, &u, &y, &x)?;
        let iso = isometry_defect(ctx, &a, true)?;
        ctx.record(iso.max(unitarity_defect(t, &a)?));
        ctx.expect(t.is_fibre_unitary(&a, DECISION)?);
        let k = ctx.cmat();
        let b = family(t, &k, &y, &x)?;
        let (unit, iso) = (
            unitarity_defect(t, &b)? < DECISION,
            isometry_defect(ctx, &b, true)? < DECISION,
        );
        ctx.expect(unit == iso && t.is_fibre_unitary(&b, DECISION)? == unit);
    }
    Ok(())
}

fn transport_unitary(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let l = t.transport(&y, &x)?;
        ctx.record(unitarity_defect(t, &l)?);
        ctx.expect(t.is_fibre_unitary(&l, DECISION)?);
    }
    Ok(())
}

fn hermitian_and_unitary(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let (x, y) = (ctx.point(), ctx.point());
        let l = t.transport(&x, &y)?;
        let conj = t.herm_conj_fibre_map(&t.transport(&y, &x)?)?;
        let back = t.transport(&y, &x)?;
        let inverse = solve(&back.matrix, &identity(t.n()))?;
        ctx.record(mat_residual(&conj.matrix, &l.matrix).max(mat_residual(&l.matrix, &inverse)));
    }
    Ok(())
}

fn morphism_pairing(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let a = morphism_of(&ctx.morphism(i));
        let conj = t.herm_conj_morphism(&a);
        let x = ctx.point();
        let (phi, psi) = (fv(&x, ctx.cvec()), fv(&x, ctx.cvec()));
        let lhs = t.fibre_inner(&conj.apply(&phi)?, &psi)?;
        let rhs = t.fibre_inner(&phi, &a.apply(&psi)?)?;
        ctx.record(scalar_residual(lhs, rhs));
    }
    Ok(())
}

fn morphism_conjugate(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let a = ctx.morphism(i);
        let x = ctx.point();
        let ax = a.eval(&x)?;
        let m = t.metric_at(&x)?;
        let oracle = solve(&m, &(ax.adjoint() * &m))?;
        let pointwise = t.herm_conj_morphism_at(&x, &ax)?;
        let whole = t.herm_conj_morphism(&morphism_of(&a)).eval(&x)?;
        ctx.record(mat_residual(&pointwise, &oracle).max(mat_residual(&whole, &oracle)));
    }
    Ok(())
}

/// `x ↦ L(x)⁻¹·K·L(x)`, pointwise.
fn lifted(t: &Trivializer, k: &CMat, x: &[f64]) -> Result<CMat, super::SuiteError> {
    let l = t.matrix_at(x)?;
    solve(&l, &(k * &l))
}

fn hermitian_morphism(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let h = ctx.g_hermitian();
        let a = lifted(t, &h, &x)?;
        ctx.record(mat_residual(&t.herm_conj_morphism_at(&x, &a)?, &a));
        let k = lifted(t, &ctx.cmat(), &x)?;
        ctx.expect(mat_residual(&t.herm_conj_morphism_at(&x, &k)?, &k) > DECISION);
    }
    Ok(())
}

fn unitary_morphism(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let u = ctx.g_unitary();
        let a = lifted(t, &u, &x)?;
        let conj = t.herm_conj_morphism_at(&x, &a)?;
        ctx.record(
            mat_residual(&(&conj * &a), &identity(n))
                .max(mat_residual(&(&a * &conj), &identity(n))),
        );
    }
    Ok(())
}

fn morphism_unitary_iff_isometric(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    let n = ctx.n();
    for _ in 0..ctx.samples {
        let x = ctx.point();
        let candidates = [ctx.g_unitary(), ctx.cmat(), ctx.g_hermitian()];
        for (k, op) in candidates.iter().enumerate() {
            let a = lifted(t, op, &x)?;
            let unit = mat_residual(&(t.herm_conj_morphism_at(&x, &a)? * &a), &identity(n));
            let as_map = FibreMap::new(x.clone(), x.clone(), a);
            let iso = isometry_defect(ctx, &as_map, true)?;
            if k == 0 {
                ctx.record(unit.max(iso));
            }
            ctx.expect((unit < DECISION) == (iso < DECISION));
        }
    }
    Ok(())
}

fn chi_bijection(ctx: &mut Ctx) -> Outcome {
    for i in 0..ctx.samples {
        let a = ctx.morphism(i);
        let x = ctx.point();
        let bm = morphism_of(&a);
        let there_and_back = chi_inverse(&chi(&bm)).eval(&x)?;
        let section = MorphismSection::new(a.value.clone());
        let back_and_there = chi(&chi_inverse(&section)).eval(&x)?;
        let ax = a.eval(&x)?;
        ctx.record(mat_residual(&there_and_back, &ax).max(mat_residual(&back_and_there, &ax)));
    }
    Ok(())
}

fn morf_b_pointwise(ctx: &mut Ctx) -> Outcome {
    for i in 0..ctx.samples {
        let (a, b) = (ctx.morphism(i), ctx.morphism(i + 1));
        let x = ctx.point();
        let (ax, bx) = (a.eval(&x)?, b.eval(&x)?);
        let composed = morphism_of(&a).compose(&morphism_of(&b)).eval(&x)?;
        ctx.record(mat_residual(&composed, &(&ax * &bx)));
        let u = ctx.cvec();
        let image = morphism_of(&a).apply(&fv(&x, u.clone()))?;
        ctx.expect(image.at == x);
        ctx.record(hilbert_bundle::linalg::vec_residual(
            &image.components,
            &(ax * u),
        ));
    }
    Ok(())
}
