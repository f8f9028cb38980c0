//! Spec-driven verification of the bundle identities.

pub mod catalog;
pub mod manifest;
pub mod report;
pub mod sampling;
pub mod spec;
pub mod suites;

use rayon::prelude::*;

use crate::catalog::Model;
use crate::report::SuiteReport;
use crate::spec::{BundleSpec, LoadError};
use crate::suites::{run_suite, Suite};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "VERIFY_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("invalid filter pattern: {0}")]
    Filter(#[from] glob::PatternError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Suites whose id matches the glob `filter`, all of them when `None`.
pub fn select(filter: Option<&str>) -> Result<Vec<Suite>, RunError> {
    let all = suites::all();
    match filter {
        None => Ok(all),
        Some(p) => {
            let pat = glob::Pattern::new(p)?;
            Ok(all.into_iter().filter(|s| pat.matches(s.id)).collect())
        }
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
}

/// Runs the selected suites against `spec`, in parallel. Reports come back
/// sorted by id.
pub fn run_suites(spec: &BundleSpec, filter: Option<&str>) -> Result<Vec<SuiteReport>, RunError> {
    let model = Model::build(spec)?;
    let selected = select(filter)?;
    let run = || {
        selected
            .par_iter()
            .map(|s| run_suite(&model, s))
            .collect::<Vec<_>>()
    };
    let mut reports = match threads_from_env() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(run),
        None => run(),
    };
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(reports)
}
