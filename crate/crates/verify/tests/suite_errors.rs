use hilbert_bundle_verify::catalog::Model;
use hilbert_bundle_verify::spec::parse_spec;
use hilbert_bundle_verify::suites::{run_suite, Ctx, Outcome, Suite, SuiteError, Tol};

fn model() -> Model {
    let spec = parse_spec(
        "schema = 1\n[chart]\norigin = [0.0]\nspacing = [0.1]\nextents = [11]\n[fibre]\nn = 2\n[trivializer]\nfamily = \"identity\"\n",
    )
    .unwrap();
    Model::build(&spec).unwrap()
}

fn custom(run: fn(&mut Ctx) -> Outcome) -> Suite {
    Suite {
        id: "custom",
        anchor: "plumbing",
        tol: Tol::Algebraic,
        min_samples: 0,
        run,
    }
}

#[test]
fn error_becomes_failed_report() {
    let r = run_suite(
        &model(),
        &custom(|ctx| {
            ctx.record(0.0);
            Err(SuiteError("boom".to_string()))
        }),
    );
    assert!(!r.passed);
    assert_eq!(r.max_residual, None);
    assert_eq!(r.detail.as_deref(), Some("boom"));
}

#[test]
fn panic_becomes_failed_report() {
    let r = run_suite(&model(), &custom(|_| panic!("kaboom")));
    assert!(!r.passed);
    assert!(r.detail.unwrap().contains("kaboom"));
}

#[test]
fn suite_without_cases_fails() {
    let r = run_suite(&model(), &custom(|_| Ok(())));
    assert!(!r.passed);
    assert_eq!(r.cases, 0);
}

#[test]
fn nan_residual_fails() {
    let r = run_suite(
        &model(),
        &custom(|ctx| {
            ctx.record(f64::NAN);
            Ok(())
        }),
    );
    assert!(!r.passed);
    assert_eq!(r.max_residual, None);
}

#[test]
fn violated_expectation_fails() {
    let r = run_suite(
        &model(),
        &custom(|ctx| {
            ctx.expect(false);
            Ok(())
        }),
    );
    assert!(!r.passed);
}

#[test]
fn clean_suite_passes() {
    let r = run_suite(
        &model(),
        &custom(|ctx| {
            ctx.record(1e-15);
            Ok(())
        }),
    );
    assert!(r.passed);
    assert_eq!((r.cases, r.max_residual), (1, Some(1e-15)));
}
