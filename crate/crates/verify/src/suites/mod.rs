//! Identity suites. Each suite samples its own cases from a seeded RNG and
//! reports the largest residual it observed.

use std::fmt;
use std::time::Instant;

use hilbert_bundle::linalg::{c, commutator};
use hilbert_bundle::{
    BundleMorphism, CMat, CVec, Complex64, DifferenceScheme, Field, FieldComponents,
    QuadratureRule, Section, SupportBox, TestFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{sub_seed, Model, Smooth};
use crate::report::SuiteReport;
use crate::sampling;

mod assoc;
mod derivation;
mod metric;
mod plumbing;
mod qft;
mod transport;

/// How a suite's tolerance is derived from the spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tol {
    Algebraic,
    Fd,
    Fixed(f64),
}

pub struct Suite {
    pub id: &'static str,
    pub anchor: &'static str,
    pub tol: Tol,
    /// Lower bound on the sample count, whatever the spec asks for.
    pub min_samples: usize,
    pub run: fn(&mut Ctx) -> Result<(), SuiteError>,
}

impl fmt::Debug for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Suite")
            .field("id", &self.id)
            .field("anchor", &self.anchor)
            .finish()
    }
}

pub(crate) const fn suite(
    id: &'static str,
    anchor: &'static str,
    tol: Tol,
    run: fn(&mut Ctx) -> Result<(), SuiteError>,
) -> Suite {
    Suite {
        id,
        anchor,
        tol,
        min_samples: 0,
        run,
    }
}

impl Suite {
    pub(crate) const fn at_least(mut self, samples: usize) -> Suite {
        self.min_samples = samples;
        self
    }
}

/// Every registered suite, sorted by id.
pub fn all() -> Vec<Suite> {
    let mut v = Vec::new();
    v.extend(metric::suites());
    v.extend(transport::suites());
    v.extend(derivation::suites());
    v.extend(assoc::suites());
    v.extend(qft::suites());
    v.extend(plumbing::suites());
    v.sort_by(|a, b| a.id.cmp(b.id));
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteError(pub String);

impl fmt::Display for SuiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<hilbert_bundle::Error> for SuiteError {
    fn from(e: hilbert_bundle::Error) -> Self {
        SuiteError(e.to_string())
    }
}

impl From<String> for SuiteError {
    fn from(s: String) -> Self {
        SuiteError(s)
    }
}

impl From<&str> for SuiteError {
    fn from(s: &str) -> Self {
        SuiteError(s.to_string())
    }
}

pub type Outcome = Result<(), SuiteError>;

/// Per-suite state: the model, a private RNG and the running residual.
pub struct Ctx<'a> {
    pub model: &'a Model,
    pub rng: ChaCha8Rng,
    pub samples: usize,
    pub scheme: DifferenceScheme,
    pub tolerance: f64,
    cases: usize,
    max_residual: f64,
}

impl<'a> Ctx<'a> {
    pub fn new(model: &'a Model, suite: &Suite) -> Self {
        let spec = &model.spec;
        Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(sub_seed(spec.seed, suite.id)),
            samples: spec.samples.max(suite.min_samples),
            scheme: spec.scheme,
            tolerance: match suite.tol {
                Tol::Algebraic => spec.tolerances.algebraic,
                Tol::Fd => spec.tolerances.fd,
                Tol::Fixed(t) => t,
            },
            cases: 0,
            max_residual: 0.0,
        }
    }

    /// Records one case; NaN counts as an infinite residual.
    pub fn record(&mut self, residual: f64) {
        self.cases += 1;
        let r = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        self.max_residual = self.max_residual.max(r);
    }

    /// Records a boolean expectation as residual 0 (held) or 1 (violated).
    pub fn expect(&mut self, holds: bool) {
        self.record(if holds { 0.0 } else { 1.0 });
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn point(&mut self) -> Vec<f64> {
        sampling::grid_point(&mut self.rng, &self.model.spec.chart)
    }

    pub fn axis(&mut self) -> usize {
        self.rng.random_range(0..self.dim())
    }

    pub fn cnum(&mut self) -> Complex64 {
        sampling::cnum(&mut self.rng)
    }

    pub fn cvec(&mut self) -> CVec {
        {
            let n = self.n();
            sampling::cvec(&mut self.rng, n)
        }
    }

    pub fn cmat(&mut self) -> CMat {
        {
            let n = self.n();
            sampling::cmat(&mut self.rng, n)
        }
    }

    pub fn g_hermitian(&mut self) -> CMat {
        sampling::g_hermitian(&mut self.rng, self.model.triv.space())
    }

    pub fn g_unitary(&mut self) -> CMat {
        sampling::g_unitary(&mut self.rng, self.model.triv.space())
    }

    /// Sample `i`: named spec sections on odd draws (when any exist), random
    /// ones otherwise.
    pub fn section(&mut self, i: usize) -> Smooth<CVec> {
        let named = &self.model.sections;
        if i % 2 == 1 && !named.is_empty() {
            return named[(i / 2) % named.len()].1.clone();
        }
        {
            let (n, d) = (self.n(), self.dim());
            sampling::section(&mut self.rng, n, d)
        }
    }

    /// Like [`Ctx::section`], for morphisms.
    pub fn morphism(&mut self, i: usize) -> Smooth<CMat> {
        let named = &self.model.morphisms;
        if i % 2 == 1 && !named.is_empty() {
            return named[(i / 2) % named.len()].1.clone();
        }
        {
            let (n, d) = (self.n(), self.dim());
            sampling::morphism(&mut self.rng, n, d)
        }
    }

    pub fn scalar(&mut self) -> Smooth<Complex64> {
        {
            let d = self.dim();
            sampling::scalar(&mut self.rng, d)
        }
    }

    /// The spec's operator field, or a random two-component one.
    pub fn fields(&mut self) -> Vec<Smooth<CMat>> {
        match &self.model.fields {
            Some(f) => f.clone(),
            None => (0..2)
                .map(|_| {
                    let (n, d) = (self.n(), self.dim());
                    sampling::morphism(&mut self.rng, n, d)
                })
                .collect(),
        }
    }

    /// Sample `i` of the spec's test functions, or a random hat function on
    /// the grid interior with `n_comp` components.
    pub fn test_function(&mut self, i: usize, n_comp: usize) -> TestFunction {
        let named = &self.model.test_functions;
        if !named.is_empty() && i % 2 == 1 {
            return named[(i / 2) % named.len()].1.clone();
        }
        let chart = self.model.spec.chart.clone();
        let lo: Vec<usize> = chart
            .extents()
            .iter()
            .map(|&e| usize::from(e > 2))
            .collect();
        let hi: Vec<usize> = chart
            .extents()
            .iter()
            .map(|&e| if e > 2 { e - 2 } else { e - 1 })
            .collect();
        let amps: Vec<Complex64> = (0..n_comp).map(|_| self.cnum()).collect();
        let (a, b): (Vec<f64>, Vec<f64>) = (chart.coords_of(&lo), chart.coords_of(&hi));
        TestFunction::new(chart, SupportBox::new(lo, hi), move |i, y| {
            let tent: f64 = y
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let (m, r) = (0.5 * (a[k] + b[k]), 0.5 * (b[k] - a[k]));
                    if r == 0.0 {
                        1.0
                    } else {
                        1.0 - 0.5 * ((v - m) / r).powi(2)
                    }
                })
                .product();
            amps.get(i).copied().unwrap_or(c(0., 0.)) * tent
        })
        .expect("interior box lies in the grid")
    }

    pub fn quadrature(&self, f: &TestFunction) -> Result<QuadratureRule, SuiteError> {
        Ok(QuadratureRule::trapezoid(
            &self.model.spec.chart,
            f.support(),
        )?)
    }

    pub fn finish(self) -> (usize, f64) {
        (self.cases, self.max_residual)
    }
}

pub fn section_of(s: &Smooth<CVec>) -> Section {
    Section::new(s.value.clone())
}

pub fn morphism_of(s: &Smooth<CMat>) -> BundleMorphism {
    BundleMorphism::new(s.value.clone())
}

pub fn components_of(fields: &[Smooth<CMat>]) -> FieldComponents {
    FieldComponents::new(fields.iter().map(|f| f.value.clone()).collect())
}

pub fn scalar_field(s: &Smooth<Complex64>) -> Field<Complex64> {
    s.value.clone()
}

/// `Γ_μ = L⁻¹∂_μL` from the exact partials of the trivializer family.
pub fn exact_gamma(m: &Model, x: &[f64], mu: usize) -> Result<CMat, SuiteError> {
    Ok(m.triv.inverse_at(x)? * m.l.partial(mu, x)?)
}

/// `∂_μY + Γ_μY`, exactly.
pub fn exact_d_section(
    m: &Model,
    y: &Smooth<CVec>,
    x: &[f64],
    mu: usize,
) -> Result<CVec, SuiteError> {
    Ok(y.partial(mu, x)? + exact_gamma(m, x, mu)? * y.eval(x)?)
}

/// `∂_μA + [Γ_μ, A]`, exactly.
pub fn exact_d_morphism(
    m: &Model,
    a: &Smooth<CMat>,
    x: &[f64],
    mu: usize,
) -> Result<CMat, SuiteError> {
    Ok(a.partial(mu, x)? + commutator(&exact_gamma(m, x, mu)?, &a.eval(x)?))
}

/// `A⁻¹B` by LU, independent of the inverses cached in the core.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat, SuiteError> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| SuiteError("singular matrix in oracle".to_string()))
}

pub fn solve_vec(a: &CMat, b: &CVec) -> Result<CVec, SuiteError> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| SuiteError("singular matrix in oracle".to_string()))
}

/// Runs one suite, turning errors and panics into failed reports.
pub fn run_suite(model: &Model, suite: &Suite) -> SuiteReport {
    let start = Instant::now();
    let mut ctx = Ctx::new(model, suite);
    let tolerance = ctx.tolerance;
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(move || {
        let r = (suite.run)(&mut ctx);
        (r, ctx.finish())
    }));
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let (detail, cases, max_residual) = match outcome {
        Ok((Ok(()), (0, max))) => (Some("no cases were checked".to_string()), 0, Some(max)),
        Ok((Ok(()), (cases, max))) => (None, cases, Some(max)),
        Ok((Err(e), (cases, _))) => (Some(e.0), cases, None),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "suite panicked".to_string());
            (Some(msg), 0, None)
        }
    };
    let max_residual = max_residual.filter(|r| r.is_finite());
    let passed = detail.is_none() && max_residual.is_some_and(|r| r <= tolerance);
    SuiteReport {
        id: suite.id.to_string(),
        anchor: suite.anchor.to_string(),
        cases,
        max_residual,
        tolerance,
        passed,
        wall_time_ms,
        detail,
    }
}
