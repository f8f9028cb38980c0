use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hilbert_bundle_verify::report::{parse_structured, render, Format, Report};
use hilbert_bundle_verify::spec::{load_spec, parse_spec, LoadError};
use hilbert_bundle_verify::{run_suites, select};

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
}

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .output()
        .expect("verify runs")
}

fn structured(args: &[&str]) -> Report {
    let out = verify(args);
    parse_structured(&String::from_utf8(out.stdout).unwrap()).expect("structured output parses")
}

fn strip_times(mut r: Report) -> Report {
    for s in &mut r.suites {
        s.wall_time_ms = 0.0;
    }
    r
}

#[test]
fn same_seed_gives_identical_reports() {
    let p = spec_path("diagonal_phase_1d.toml");
    let p = p.to_str().unwrap();
    let a = structured(&[p, "--format", "structured"]);
    let b = structured(&[p, "--format", "structured"]);
    assert_eq!(strip_times(a), strip_times(b));
}

#[test]
fn seed_flag_changes_samples_only() {
    let p = spec_path("identity_1d.toml");
    let p = p.to_str().unwrap();
    let a = structured(&[p, "--format", "structured", "--seed", "1"]);
    let b = structured(&[p, "--format", "structured", "--seed", "2"]);
    assert_eq!((a.seed, b.seed), (1, 2));
    assert!(a.all_passed && b.all_passed);
    let ids = |r: &Report| r.suites.iter().map(|s| s.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&a), ids(&b));
    assert_ne!(strip_times(a).suites, strip_times(b).suites);
}

#[test]
fn thread_count_does_not_change_results() {
    let p = spec_path("exp_generator_4d.toml");
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_verify"))
            .args([p.to_str().unwrap(), "--format", "structured"])
            .env("VERIFY_THREADS", threads)
            .output()
            .unwrap();
        strip_times(parse_structured(&String::from_utf8(out.stdout).unwrap()).unwrap())
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn structured_report_round_trips() {
    let spec = load_spec(&spec_path("polynomial_2d.toml")).unwrap();
    let report = Report::new(
        &spec.name,
        spec.seed,
        run_suites(&spec, Some("eq-2.3*")).unwrap(),
    );
    let text = render(&report, Format::Structured);
    let back = parse_structured(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(render(&back, Format::Structured), text);
}

#[test]
fn reports_are_sorted_by_id() {
    let r = structured(&[
        spec_path("identity_1d.toml").to_str().unwrap(),
        "--format",
        "structured",
    ]);
    assert!(r.suites.windows(2).all(|w| w[0].id < w[1].id));
}

#[test]
fn filter_selects_only_matching_suites() {
    let spec = load_spec(&spec_path("identity_1d.toml")).unwrap();
    let reports = run_suites(&spec, Some("eq-2.2*")).unwrap();
    assert!(!reports.is_empty());
    for r in &reports {
        assert!(r.id.starts_with("eq-2.2"), "{}", r.id);
        assert!(r.anchor.starts_with("2.2"), "{}", r.anchor);
    }
    let anchors: Vec<_> = reports.iter().map(|r| r.anchor.as_str()).collect();
    for a in [
        "2.20", "2.21", "2.22", "2.23", "2.24", "2.25", "2.26", "2.27", "2.28", "2.29",
    ] {
        assert!(anchors.contains(&a), "missing {a}");
    }
}

#[test]
fn filter_matching_nothing_gives_valid_empty_report() {
    let out = verify(&[
        spec_path("identity_1d.toml").to_str().unwrap(),
        "--filter",
        "no-such-suite",
        "--format",
        "structured",
    ]);
    assert!(out.status.success());
    let r = parse_structured(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(r.suites.is_empty() && r.all_passed);
    assert_eq!(r.missing, r.manifest);
}

#[test]
fn bad_filter_pattern_is_a_usage_error() {
    let out = verify(&[
        spec_path("identity_1d.toml").to_str().unwrap(),
        "--filter",
        "eq-[2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_suites_needs_no_spec() {
    let out = verify(&["--list-suites", "--filter", "eq-3.*"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), select(Some("eq-3.*")).unwrap().len());
    assert!(text.lines().all(|l| l.starts_with("eq-3.")));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = verify(&[
        spec_path("identity_1d.toml").to_str().unwrap(),
        "--filter",
        "eq-2.22*",
        "--format",
        "structured",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r = parse_structured(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r.suites.len(), 1);
}

#[test]
fn text_report_has_one_line_per_suite() {
    let out = verify(&[
        spec_path("identity_1d.toml").to_str().unwrap(),
        "--filter",
        "eq-2.4*",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let n = select(Some("eq-2.4*")).unwrap().len();
    assert_eq!(text.lines().filter(|l| l.starts_with("pass")).count(), n);
    assert!(text.lines().last().unwrap().contains("0 failed"));
}

fn write_spec(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("spec.toml");
    std::fs::write(&p, body).unwrap();
    p
}

const BASE: &str = r#"
schema = 1
[chart]
origin = [0.0]
spacing = [0.1]
extents = [11]
[fibre]
n = 2
"#;

#[test]
fn failing_suite_sets_exit_code_and_shows_in_report() {
    // An absurdly tight tolerance makes the derivative suites fail.
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{BASE}[trivializer]\nfamily = \"exp_generator\"\nparams = {{ random_scale = 0.5 }}\n[tolerances]\nfd = 1e-30\n"
    );
    let p = write_spec(dir.path(), &body);
    let out = verify(&[
        p.to_str().unwrap(),
        "--filter",
        "eq-2.29-limit*",
        "--format",
        "structured",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = parse_structured(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(!r.all_passed);
    assert_eq!(r.suites[0].verdict(), "fail");
    let text = verify(&[p.to_str().unwrap(), "--filter", "eq-2.29-limit*"]);
    assert!(String::from_utf8(text.stdout)
        .unwrap()
        .lines()
        .any(|l| l.starts_with("fail")));
}

#[test]
fn load_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_spec(dir.path(), "schema = 1\n[chart\n");
    let out = verify(&[p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("parse error"));
    let missing = verify(&[dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn load_error_kinds() {
    let unknown = format!("{BASE}[trivializer]\nfamily = \"spiral\"\n");
    assert!(matches!(
        parse_spec(&unknown),
        Err(LoadError::UnknownFamily { .. })
    ));
    let singular = format!("{BASE}[trivializer]\nfamily = \"constant\"\nparams = {{ matrix = [[1.0, 2.0], [2.0, 4.0]] }}\n");
    assert!(matches!(
        parse_spec(&singular),
        Err(LoadError::Validation(_))
    ));
    let bad_gram = "schema = 1\n[chart]\norigin = [0.0]\nspacing = [0.1]\nextents = [5]\n[fibre]\nn = 2\ngram = [[1.0, 0.0], [0.0, -1.0]]\n[trivializer]\nfamily = \"identity\"\n";
    assert!(matches!(
        parse_spec(bad_gram),
        Err(LoadError::Validation(_))
    ));
    let tiny_eps =
        format!("{BASE}[trivializer]\nfamily = \"identity\"\n[scheme]\nepsilon = 1e-12\n");
    assert!(matches!(
        parse_spec(&tiny_eps),
        Err(LoadError::Validation(_))
    ));
    let wrong_schema =
        BASE.replace("schema = 1", "schema = 9") + "[trivializer]\nfamily = \"identity\"\n";
    assert!(matches!(
        parse_spec(&wrong_schema),
        Err(LoadError::Validation(_))
    ));
}

#[test]
fn richardson_levels_shrink_fd_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let run = |levels: u32| {
        let body = format!(
            "seed = 3\nsamples = 10\n{BASE}[trivializer]\nfamily = \"exp_generator\"\nparams = {{ random_scale = 0.5 }}\n[scheme]\nepsilon = 1e-2\nrichardson_levels = {levels}\n[tolerances]\nfd = 1.0\n"
        );
        let p = write_spec(dir.path(), &body);
        let spec = load_spec(&p).unwrap();
        let reports = run_suites(&spec, Some("eq-2.29-limit-vs-exact")).unwrap();
        reports[0].max_residual.unwrap()
    };
    let (r0, r2) = (run(0), run(2));
    assert!(r2 < r0 * 1e-3, "levels 0: {r0:e}, levels 2: {r2:e}");
}
