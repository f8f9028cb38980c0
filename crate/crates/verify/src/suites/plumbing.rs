//! Infrastructure checks: manifest coverage, difference-scheme orders,
//! Richardson extrapolation and quadrature weights.

use hilbert_bundle::derivation::d_mu_limit;
use hilbert_bundle::grid::partial_derivative;
use hilbert_bundle::linalg::vec_residual;
use hilbert_bundle::DifferenceScheme;

use crate::manifest::{is_known, ANCHORS, PLUMBING};

use super::{all, exact_d_section, section_of, suite, Ctx, Outcome, Suite, Tol};

pub(super) fn suites() -> Vec<Suite> {
    vec![
        suite(
            "plumbing-anchor-coverage",
            PLUMBING,
            Tol::Algebraic,
            anchor_coverage,
        ),
        suite("plumbing-fd-order", PLUMBING, Tol::Fixed(0.2), fd_order),
        suite(
            "plumbing-quadrature-volume",
            PLUMBING,
            Tol::Algebraic,
            quadrature_volume,
        ),
        suite(
            "plumbing-richardson-shrink",
            PLUMBING,
            Tol::Fixed(1.0),
            richardson_shrink,
        ),
    ]
}

fn anchor_coverage(ctx: &mut Ctx) -> Outcome {
    let suites = all();
    for a in ANCHORS {
        ctx.expect(suites.iter().any(|s| s.anchor == *a));
    }
    for s in &suites {
        ctx.expect(is_known(s.anchor));
    }
    Ok(())
}

/// Observed order of `h ↦ |D_h f − f'|` between two steps a factor 2 apart.
fn observed_order(scheme: fn(f64) -> DifferenceScheme, x: f64) -> Result<f64, super::SuiteError> {
    // Every derivative is positive, so no error term vanishes by accident.
    let f = |y: &[f64]| Ok((0.8 * y[0]).exp());
    let exact = 0.8 * (0.8 * x).exp();
    let err = |h: f64| -> Result<f64, super::SuiteError> {
        Ok((partial_derivative(f, &[x], 0, &scheme(h))? - exact).abs())
    };
    let (e1, e2) = (err(1e-2)?, err(5e-3)?);
    Ok((e1 / e2).log2())
}

fn fd_order(ctx: &mut Ctx) -> Outcome {
    for _ in 0..ctx.samples {
        let x = ctx.point()[0].clamp(-0.9, 0.9);
        ctx.record((observed_order(DifferenceScheme::central, x)? - 2.0).abs());
        ctx.record((observed_order(DifferenceScheme::forward, x)? - 1.0).abs());
    }
    Ok(())
}

fn quadrature_volume(ctx: &mut Ctx) -> Outcome {
    let chart = ctx.model.spec.chart.clone();
    for i in 0..ctx.samples {
        let f = ctx.test_function(i, 1);
        let quad = ctx.quadrature(&f)?;
        let (lo, hi) = (
            chart.coords_of(&f.support().lo),
            chart.coords_of(&f.support().hi),
        );
        let volume: f64 = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .filter(|w| *w > 0.0)
            .product();
        ctx.record((quad.total_weight() - volume).abs() / volume.max(1.0));
    }
    Ok(())
}

/// Below this the error is at rounding level and ratios are meaningless.
const ROUNDING_FLOOR: f64 = 1e-12;

fn richardson_shrink(ctx: &mut Ctx) -> Outcome {
    let model = ctx.model;
    let t = &model.triv;
    for i in 0..ctx.samples {
        let y = ctx.section(i);
        let (x, mu) = (ctx.point(), ctx.axis());
        let exact = exact_d_section(model, &y, &x, mu)?;
        let mut prev: Option<f64> = None;
        for levels in 0..=2 {
            let s = DifferenceScheme::central(1e-2).with_richardson(levels);
            let err = vec_residual(
                &d_mu_limit(t, &section_of(&y), &x, mu, &s)?.components,
                &exact,
            );
            if let Some(p) = prev {
                ctx.record(if p <= ROUNDING_FLOOR { 0.0 } else { err / p });
            }
            prev = Some(err);
        }
    }
    Ok(())
}
