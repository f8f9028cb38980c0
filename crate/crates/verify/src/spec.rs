//! The `BundleSpec` file format: TOML with a `schema` header.
//!
//! Every parametrised object is written as `{ family = "...", params = {...} }`.
//! Complex numbers are either plain floats or `{ re, im }` tables;
//! polynomials are lists of monomials `{ re, im, pow = [..] }`.

use std::path::Path;

use hilbert_bundle::linalg::c;
use hilbert_bundle::{
    CMat, CVec, Complex64, CoordinateChart, DifferenceScheme, FibreSpace, SchemeOrder,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::catalog::{
    CoordinateChangeFamily, MatrixFamily, MorphismFamily, Poly, SectionFamily, TestFunctionFamily,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 25;
pub const DEFAULT_ALGEBRAIC_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LoadError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid spec: {0}")]
    Validation(String),
    #[error("unknown {kind} family `{name}`")]
    UnknownFamily { kind: &'static str, name: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> LoadError {
    LoadError::Validation(msg.into())
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ComplexIn {
    Real(f64),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl ComplexIn {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexIn::Real(re) => c(re, 0.0),
            ComplexIn::Parts { re, im } => c(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct MonomialIn {
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub pow: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyIn {
    pub family: String,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedFamilyIn {
    pub name: String,
    pub family: String,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartIn {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    extents: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FibreIn {
    n: usize,
    gram: Option<Vec<Vec<ComplexIn>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldsIn {
    n_comp: usize,
    families: Vec<FamilyIn>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeIn {
    epsilon: Option<f64>,
    order: Option<String>,
    richardson_levels: Option<u32>,
    floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesIn {
    algebraic: Option<f64>,
    fd: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecIn {
    schema: u32,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    samples: Option<usize>,
    chart: ChartIn,
    fibre: FibreIn,
    trivializer: FamilyIn,
    #[serde(default)]
    sections: Vec<NamedFamilyIn>,
    #[serde(default)]
    morphisms: Vec<NamedFamilyIn>,
    #[serde(default)]
    fields: Option<FieldsIn>,
    #[serde(default)]
    test_functions: Vec<NamedFamilyIn>,
    #[serde(default)]
    scheme: SchemeIn,
    #[serde(default)]
    tolerances: TolerancesIn,
    #[serde(default)]
    coordinate_change: Option<FamilyIn>,
    #[serde(default)]
    basis_change: Option<FamilyIn>,
}

#[derive(Debug, Clone)]
pub struct Tolerances {
    pub algebraic: f64,
    pub fd: f64,
}

#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub n_comp: usize,
    pub components: Vec<MatrixFamily>,
}

/// A validated spec with every family resolved.
#[derive(Debug, Clone)]
pub struct BundleSpec {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub chart: CoordinateChart,
    pub fibre: FibreSpace,
    pub trivializer: MatrixFamily,
    pub sections: Vec<(String, SectionFamily)>,
    pub morphisms: Vec<(String, MorphismFamily)>,
    pub fields: Option<FieldSpec>,
    pub test_functions: Vec<(String, TestFunctionFamily)>,
    pub scheme: DifferenceScheme,
    pub tolerances: Tolerances,
    pub coordinate_change: CoordinateChangeFamily,
    pub basis_change: MatrixFamily,
}

impl BundleSpec {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n(&self) -> usize {
        self.fibre.dim()
    }

    /// Same spec with a different sampling seed. Families drawn at load time
    /// keep the generator they were built with.
    pub fn with_seed(mut self, seed: u64) -> BundleSpec {
        self.seed = seed;
        self
    }
}

pub fn load_spec(path: &Path) -> Result<BundleSpec, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_spec(&text)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_spec(text: &str) -> Result<BundleSpec, LoadError> {
    let raw: SpecIn = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        LoadError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate(raw)
}

pub(crate) fn params<T: DeserializeOwned>(what: &str, table: &toml::Table) -> Result<T, LoadError> {
    toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| invalid(format!("{what}: {}", e.message())))
}

pub(crate) fn complex_matrix(
    what: &str,
    rows: &[Vec<ComplexIn>],
    n: usize,
) -> Result<CMat, LoadError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("{what}: expected a {n}x{n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].value()))
}

pub(crate) fn complex_vector(
    what: &str,
    entries: &[ComplexIn],
    n: usize,
) -> Result<CVec, LoadError> {
    if entries.len() != n {
        return Err(invalid(format!(
            "{what}: expected {n} entries, found {}",
            entries.len()
        )));
    }
    Ok(CVec::from_iterator(n, entries.iter().map(|z| z.value())))
}

pub(crate) fn poly(what: &str, monomials: &[MonomialIn], dim: usize) -> Result<Poly, LoadError> {
    let mut terms = Vec::with_capacity(monomials.len());
    for m in monomials {
        let mut pow = m.pow.clone();
        if pow.len() > dim {
            return Err(invalid(format!(
                "{what}: monomial has {} exponents for a {dim}-D base",
                pow.len()
            )));
        }
        pow.resize(dim, 0);
        terms.push((c(m.re, m.im), pow));
    }
    Ok(Poly::new(terms))
}

fn validate(raw: SpecIn) -> Result<BundleSpec, LoadError> {
    if raw.schema != SCHEMA_VERSION {
        return Err(invalid(format!(
            "unsupported schema {} (expected {SCHEMA_VERSION})",
            raw.schema
        )));
    }
    let chart = CoordinateChart::new(raw.chart.origin, raw.chart.spacing, raw.chart.extents)
        .map_err(|e| invalid(format!("chart: {e}")))?;
    let dim = chart.dim();
    let n = raw.fibre.n;
    if n == 0 {
        return Err(invalid("fibre.n must be positive"));
    }
    let fibre = match &raw.fibre.gram {
        None => FibreSpace::new(n),
        Some(rows) => FibreSpace::with_gram(complex_matrix("fibre.gram", rows, n)?),
    }
    .map_err(|e| invalid(format!("fibre: {e}")))?;

    let samples = raw.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(invalid("samples must be positive"));
    }

    let mut scheme = DifferenceScheme::default();
    if let Some(eps) = raw.scheme.epsilon {
        scheme.epsilon = eps;
    }
    if let Some(floor) = raw.scheme.floor {
        scheme.floor = floor;
    }
    scheme.order = match raw.scheme.order.as_deref() {
        None | Some("central") => SchemeOrder::Central,
        Some("forward") => SchemeOrder::Forward,
        Some(other) => {
            return Err(invalid(format!(
                "scheme.order `{other}` is neither `central` nor `forward`"
            )))
        }
    };
    scheme.richardson_levels = raw.scheme.richardson_levels.unwrap_or(0);
    scheme
        .validate()
        .map_err(|e| invalid(format!("scheme: {e}")))?;

    let algebraic = raw.tolerances.algebraic.unwrap_or(DEFAULT_ALGEBRAIC_TOL);
    let fd = raw
        .tolerances
        .fd
        .unwrap_or_else(|| scheme.fd_tolerance(chart.max_abs_coord()));
    if !(algebraic > 0.0 && fd > 0.0) {
        return Err(invalid("tolerances must be positive"));
    }

    let seed = raw.seed;
    let trivializer = MatrixFamily::parse("trivializer", &raw.trivializer, n, dim, seed)?;
    trivializer.check_invertible_on(&chart, n)?;

    let sections = raw
        .sections
        .iter()
        .map(|s| Ok((s.name.clone(), SectionFamily::parse(s, n, dim, &chart)?)))
        .collect::<Result<Vec<_>, LoadError>>()?;
    unique_names("section", sections.iter().map(|s| &s.0))?;

    let mut morphisms: Vec<(String, MorphismFamily)> = Vec::new();
    for m in &raw.morphisms {
        let fam = MorphismFamily::parse(m, n, dim, seed, &morphisms)?;
        morphisms.push((m.name.clone(), fam));
    }
    unique_names("morphism", morphisms.iter().map(|s| &s.0))?;

    let fields = match raw.fields {
        None => None,
        Some(f) => {
            if f.n_comp == 0 || f.families.len() != f.n_comp {
                return Err(invalid(format!(
                    "fields: n_comp = {} but {} component families given",
                    f.n_comp,
                    f.families.len()
                )));
            }
            let components = f
                .families
                .iter()
                .enumerate()
                .map(|(i, fam)| {
                    MatrixFamily::parse(&format!("fields.families[{i}]"), fam, n, dim, seed)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(FieldSpec {
                n_comp: f.n_comp,
                components,
            })
        }
    };

    let n_comp = fields.as_ref().map_or(1, |f| f.n_comp);
    let test_functions = raw
        .test_functions
        .iter()
        .map(|t| {
            Ok((
                t.name.clone(),
                TestFunctionFamily::parse(t, &chart, n_comp)?,
            ))
        })
        .collect::<Result<Vec<_>, LoadError>>()?;
    unique_names("test function", test_functions.iter().map(|s| &s.0))?;

    let coordinate_change = match &raw.coordinate_change {
        None => CoordinateChangeFamily::Cubic { a: 0.1 },
        Some(f) => CoordinateChangeFamily::parse(f, dim)?,
    };
    let basis_change = match &raw.basis_change {
        None => MatrixFamily::default_basis_change(n, dim),
        Some(f) => MatrixFamily::parse("basis_change", f, n, dim, seed)?,
    };
    basis_change.check_invertible_on(&chart, n)?;

    Ok(BundleSpec {
        name: raw.name.unwrap_or_else(|| "unnamed".to_string()),
        seed,
        samples,
        chart,
        fibre,
        trivializer,
        sections,
        morphisms,
        fields,
        test_functions,
        scheme,
        tolerances: Tolerances { algebraic, fd },
        coordinate_change,
        basis_change,
    })
}

fn unique_names<'a>(kind: &str, names: impl Iterator<Item = &'a String>) -> Result<(), LoadError> {
    let mut seen = std::collections::BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(invalid(format!("duplicate {kind} name `{name}`")));
        }
    }
    Ok(())
}
