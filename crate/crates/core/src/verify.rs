//! Seeded property suites with per-axiom residual reports.
//!
//! Case `c` at half-dimension `n` of suite `s` draws from the stream
//! `(s << 32) | (n << 24) | c`, so any single case can be regenerated from
//! the seed alone. Reports carry no timing data and are byte-stable.

use crate::error::{Error, Result};
use crate::flows::{flat_leafwise_geodesic_path, holonomy_from_flow, symplectic_exp, FlatModelSpec, Rational};
use crate::indices::{
    check_index_gap, check_nondegenerate, cz_index, mean_index, restricted_mean_index, IndexValue, PathGenerator,
    SymplecticPath,
};
use crate::linalg::{j_matrix, Mat};
use crate::maslov::{
    build_lift, homogeneity_cover, lift_residuals, maslov_index, maslov_index_with, uniform_times, via_double_cover,
    well_definedness_check, CoisotropicLoop, HolonomyPath, LiftStrategy,
};
use crate::pathio::{holonomy_document, loop_document, matrix_to_value, path_document, to_canonical_bytes, Metadata};
use crate::random::{
    dilation, generic_symplectic, hamiltonian_matrix, lower_shear, orthogonal_symplectic, upper_shear, SeededRng,
};
use crate::rho::{compute_rho, rho_determinant_oracle, rho_of, rotation, rotations, RhoOptions};
use crate::sympcore::{direct_sum, symplectic_inverse, validate_symplectic, Subspace, Tolerances};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

pub const REPORT_SCHEMA: &str = "verify-report/1";
pub const REPRO_SCHEMA: &str = "verify-repro/1";
/// Environment variable naming the directory for failure artifacts.
pub const ARTIFACT_DIR_ENV: &str = "SYMPIDX_ARTIFACT_DIR";

const PATH_SAMPLES: usize = 64;
const LOOP_SAMPLES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    RhoAxioms,
    MeanIndexProperties,
    CzGap,
    MaslovWelldef,
    FlatModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomSpec {
    pub name: &'static str,
    pub tolerance: f64,
    /// Pass requires `residual < tolerance` instead of `≤`.
    pub strict: bool,
}

const fn ax(name: &'static str, tolerance: f64) -> AxiomSpec {
    AxiomSpec {
        name,
        tolerance,
        strict: false,
    }
}

const RHO_AXIOMS: &[AxiomSpec] = &[
    ax("determinant", 1e-9),
    ax("normal-form", 1e-8),
    ax("naturality", 1e-8),
    ax("product", 1e-8),
    ax("normalization", 0.0),
    ax("off-circle-insensitivity", 1e-8),
];

const MEAN_AXIOMS: &[AxiomSpec] = &[
    ax("concatenation", 1e-8),
    ax("loop", 1e-8),
    ax("loop-integrality", 1e-8),
    ax("naturality", 1e-8),
    ax("product", 1e-8),
    ax("homotopy", 1e-6),
];

const CZ_AXIOMS: &[AxiomSpec] = &[
    AxiomSpec {
        name: "gap",
        tolerance: 1.0,
        strict: true,
    },
    ax("cz-integrality", 1e-6),
    ax("planar-closed-form", 0.0),
    ax("maximum-normalization", 0.0),
];

const MASLOV_AXIOMS: &[AxiomSpec] = &[
    ax("well-definedness", 1e-6),
    ax("lift-constraints", 1e-7),
    ax("lagrangian-reduction", 1e-8),
    ax("constant-reduction", 1e-8),
    ax("flow-lift", 1e-6),
    ax("double-cover", 1e-6),
    ax("homogeneity", 1e-6),
    ax("homotopy", 1e-5),
    ax("orientation-detection", 0.0),
];

const FLAT_AXIOMS: &[AxiomSpec] = &[
    ax("projection-identity", 1e-6),
    ax("unperturbed-zero", 1e-8),
    ax("lagrangian-torus", 1e-8),
];

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::RhoAxioms,
        Suite::MeanIndexProperties,
        Suite::CzGap,
        Suite::MaslovWelldef,
        Suite::FlatModel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RhoAxioms => "rho-axioms",
            Suite::MeanIndexProperties => "mean-index-properties",
            Suite::CzGap => "cz-gap",
            Suite::MaslovWelldef => "maslov-welldef",
            Suite::FlatModel => "flat-model",
        }
    }

    fn id(self) -> u64 {
        match self {
            Suite::RhoAxioms => 1,
            Suite::MeanIndexProperties => 2,
            Suite::CzGap => 3,
            Suite::MaslovWelldef => 4,
            Suite::FlatModel => 5,
        }
    }

    /// Cases per half-dimension.
    pub fn default_cases(self) -> usize {
        match self {
            Suite::RhoAxioms => 1000,
            Suite::MeanIndexProperties => 50,
            Suite::CzGap => 500,
            Suite::MaslovWelldef => 50,
            Suite::FlatModel => 13,
        }
    }

    pub fn default_dims(self) -> (usize, usize) {
        match self {
            Suite::CzGap => (1, 3),
            _ => (1, 4),
        }
    }

    pub fn axioms(self) -> &'static [AxiomSpec] {
        match self {
            Suite::RhoAxioms => RHO_AXIOMS,
            Suite::MeanIndexProperties => MEAN_AXIOMS,
            Suite::CzGap => CZ_AXIOMS,
            Suite::MaslovWelldef => MASLOV_AXIOMS,
            Suite::FlatModel => FLAT_AXIOMS,
        }
    }

    fn run_case(self, rng: &mut SeededRng, n: usize, case: usize) -> Result<CaseRecord> {
        match self {
            Suite::RhoAxioms => rho_case(rng, n),
            Suite::MeanIndexProperties => mean_case(rng, n),
            Suite::CzGap => cz_case(rng, n),
            Suite::MaslovWelldef => maslov_case(rng, n, case),
            Suite::FlatModel => flat_case(rng, n, case),
        }
    }
}

/// Parse a suite name or a comma-separated list; `all` expands to every
/// suite. Duplicates are dropped and the canonical order is kept.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut picked = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part == "all" {
            picked.extend(Suite::ALL);
            continue;
        }
        let suite = Suite::ALL
            .iter()
            .find(|x| x.name() == part)
            .ok_or_else(|| Error::Invalid(format!("unknown suite '{part}'")))?;
        picked.push(*suite);
    }
    Ok(Suite::ALL.iter().copied().filter(|x| picked.contains(x)).collect())
}

/// `a`, `a..b`, `a..=b`, or `a-b`, all inclusive.
pub fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Invalid(format!("bad dimension range '{s}'"));
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once('-') {
        (num(a)?, num(b)?)
    } else {
        let a = num(s)?;
        (a, a)
    };
    if lo == 0 || lo > hi || hi > 8 {
        return Err(Error::Invalid(format!("dimension range '{s}' must lie within 1..=8")));
    }
    Ok((lo, hi))
}

/// `axiom=value` or `suite.axiom=value`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Invalid(format!("tolerance override '{s}' is not key=value")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("tolerance '{v}' is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Invalid(format!("tolerance {v} must be finite and nonnegative")));
    }
    let key = k.trim().to_string();
    let known = Suite::ALL.iter().any(|suite| {
        suite
            .axioms()
            .iter()
            .any(|a| key == a.name || key == format!("{}.{}", suite.name(), a.name))
    });
    if !known {
        return Err(Error::Invalid(format!("unknown axiom '{key}'")));
    }
    Ok((key, v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    /// Cases per half-dimension; suite defaults when absent.
    pub cases: Option<usize>,
    pub seed: u64,
    pub dims: Option<(usize, usize)>,
    pub tolerances: BTreeMap<String, f64>,
}

impl VerifyConfig {
    pub fn new(suites: Vec<Suite>, seed: u64) -> Self {
        VerifyConfig {
            suites,
            cases: None,
            seed,
            dims: None,
            tolerances: BTreeMap::new(),
        }
    }

    fn tolerance(&self, suite: Suite, a: &AxiomSpec) -> f64 {
        let qualified = format!("{}.{}", suite.name(), a.name);
        self.tolerances
            .get(&qualified)
            .or_else(|| self.tolerances.get(a.name))
            .copied()
            .unwrap_or(a.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomSummary {
    pub name: &'static str,
    pub tolerance: f64,
    pub strict: bool,
    pub cases: usize,
    pub max_residual: Option<f64>,
    pub failures: usize,
}

impl AxiomSummary {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub suite: Suite,
    pub axiom: &'static str,
    pub case: usize,
    pub half_dim: usize,
    pub stream: u64,
    pub tolerance: f64,
    pub residual: Option<f64>,
    pub error: Option<String>,
    pub inputs: Vec<(String, Value)>,
}

impl Failure {
    pub fn artifact_name(&self) -> String {
        format!(
            "{}-{}-n{}-case{}.json",
            self.suite.name(),
            self.axiom,
            self.half_dim,
            self.case
        )
    }

    pub fn to_value(&self, seed: u64) -> Value {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), REPRO_SCHEMA.into());
        obj.insert("suite".into(), self.suite.name().into());
        obj.insert("axiom".into(), self.axiom.into());
        obj.insert("seed".into(), seed.into());
        obj.insert("case".into(), self.case.into());
        obj.insert("half_dim".into(), self.half_dim.into());
        obj.insert("stream".into(), self.stream.into());
        obj.insert("tolerance".into(), finite(self.tolerance));
        if let Some(r) = self.residual {
            obj.insert("residual".into(), finite(r));
        }
        if let Some(e) = &self.error {
            obj.insert("error".into(), e.clone().into());
        }
        let inputs: Map<String, Value> = self.inputs.iter().cloned().collect();
        obj.insert("inputs".into(), Value::Object(inputs));
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub dims: (usize, usize),
    pub cases_per_dim: usize,
    pub cases: usize,
    pub axioms: Vec<AxiomSummary>,
    pub setup_errors: usize,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.setup_errors == 0 && self.axioms.iter().all(|a| a.pass())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    /// The first failing case of each axiom.
    pub failures: Vec<Failure>,
}

fn finite(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format!("{x}")))
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass())
    }

    pub fn to_value(&self) -> Value {
        let mut suites = Map::new();
        for s in &self.suites {
            let mut axioms = Map::new();
            for a in &s.axioms {
                let mut o = Map::new();
                o.insert("cases".into(), a.cases.into());
                o.insert("failures".into(), a.failures.into());
                o.insert("max_residual".into(), a.max_residual.map(finite).unwrap_or(Value::Null));
                o.insert("tolerance".into(), finite(a.tolerance));
                o.insert("strict".into(), a.strict.into());
                o.insert("pass".into(), a.pass().into());
                axioms.insert(a.name.into(), Value::Object(o));
            }
            let mut o = Map::new();
            o.insert("axioms".into(), Value::Object(axioms));
            o.insert("cases".into(), s.cases.into());
            o.insert("cases_per_dim".into(), s.cases_per_dim.into());
            o.insert("dims".into(), vec![s.dims.0, s.dims.1].into());
            o.insert("setup_errors".into(), s.setup_errors.into());
            o.insert("pass".into(), s.pass().into());
            suites.insert(s.suite.name().into(), Value::Object(o));
        }
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| {
                let mut o = Map::new();
                o.insert("suite".into(), f.suite.name().into());
                o.insert("axiom".into(), f.axiom.into());
                o.insert("case".into(), f.case.into());
                o.insert("half_dim".into(), f.half_dim.into());
                o.insert("artifact".into(), f.artifact_name().into());
                if let Some(r) = f.residual {
                    o.insert("residual".into(), finite(r));
                }
                if let Some(e) = &f.error {
                    o.insert("error".into(), e.clone().into());
                }
                Value::Object(o)
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("schema_version".into(), REPORT_SCHEMA.into());
        obj.insert("seed".into(), self.seed.into());
        obj.insert("pass".into(), self.pass().into());
        obj.insert("suites".into(), Value::Object(suites));
        obj.insert("failures".into(), Value::Array(failures));
        Value::Object(obj)
    }
}

/// Write one reproducing document per recorded failure into `dir`.
pub fn write_artifacts(report: &VerifyReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.failures.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in &report.failures {
        let path = dir.join(f.artifact_name());
        std::fs::write(&path, to_canonical_bytes(&f.to_value(report.seed)))?;
        written.push(path);
    }
    Ok(written)
}

enum Input {
    Matrix(Mat),
    Path(SymplecticPath),
    Loop(CoisotropicLoop, HolonomyPath),
    Params(Value),
}

impl Input {
    fn documents(&self, name: &str) -> Vec<(String, Value)> {
        let meta = Metadata::new();
        let unencodable = |e: Error| Value::String(format!("unencodable: {e}"));
        match self {
            Input::Matrix(m) => {
                let mut obj = Map::new();
                obj.insert("schema_version".into(), crate::pathio::MATRIX_SCHEMA.into());
                obj.insert("half_dim".into(), (m.nrows() / 2).into());
                obj.insert("metadata".into(), Value::Object(Map::new()));
                obj.insert("entries".into(), matrix_to_value(m).unwrap_or_else(unencodable));
                vec![(name.to_string(), Value::Object(obj))]
            }
            Input::Path(p) => vec![(name.to_string(), path_document(p, &meta).unwrap_or_else(unencodable))],
            Input::Loop(lp, h) => vec![
                (
                    format!("{name}-loop"),
                    loop_document(lp, &meta).unwrap_or_else(unencodable),
                ),
                (
                    format!("{name}-holonomy"),
                    holonomy_document(h, &meta).unwrap_or_else(unencodable),
                ),
            ],
            Input::Params(v) => vec![(name.to_string(), v.clone())],
        }
    }
}

#[derive(Default)]
struct CaseRecord {
    checks: Vec<(&'static str, std::result::Result<f64, String>)>,
    inputs: Vec<(String, Input)>,
}

impl CaseRecord {
    fn check(&mut self, axiom: &'static str, f: impl FnOnce() -> Result<f64>) {
        self.checks.push((axiom, f().map_err(|e| e.to_string())));
    }

    fn input(&mut self, name: &str, input: Input) {
        self.inputs.push((name.to_string(), input));
    }
}

struct CaseOutcome {
    n: usize,
    case: usize,
    stream: u64,
    record: std::result::Result<CaseRecord, String>,
}

fn stream_of(suite: Suite, n: usize, case: usize) -> u64 {
    (suite.id() << 32) | ((n as u64) << 24) | case as u64
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.cases == Some(0) {
        return Err(Error::Invalid("cases must be at least 1".into()));
    }
    let mut suites = Vec::new();
    let mut failures = Vec::new();
    for &suite in &config.suites {
        let (report, mut f) = run_suite(config, suite)?;
        suites.push(report);
        failures.append(&mut f);
    }
    Ok(VerifyReport {
        seed: config.seed,
        suites,
        failures,
    })
}

fn run_suite(config: &VerifyConfig, suite: Suite) -> Result<(SuiteReport, Vec<Failure>)> {
    let dims = config.dims.unwrap_or(suite.default_dims());
    let per_dim = config.cases.unwrap_or(suite.default_cases());
    if per_dim >= 1 << 24 {
        return Err(Error::Invalid("too many cases per dimension".into()));
    }
    let jobs: Vec<(usize, usize)> = (dims.0..=dims.1)
        .flat_map(|n| (0..per_dim).map(move |c| (n, c)))
        .collect();
    let mut outcomes: Vec<CaseOutcome> = jobs
        .par_iter()
        .map(|&(n, case)| {
            let stream = stream_of(suite, n, case);
            let mut rng = SeededRng::new(config.seed, stream);
            let record = suite.run_case(&mut rng, n, case).map_err(|e| e.to_string());
            CaseOutcome {
                n,
                case,
                stream,
                record,
            }
        })
        .collect();
    if suite == Suite::CzGap {
        outcomes.extend(cz_fixed_cases());
    }

    let specs = suite.axioms();
    let mut summaries: Vec<AxiomSummary> = specs
        .iter()
        .map(|a| AxiomSummary {
            name: a.name,
            tolerance: config.tolerance(suite, a),
            strict: a.strict,
            cases: 0,
            max_residual: None,
            failures: 0,
        })
        .collect();
    let mut failures: Vec<Failure> = Vec::new();
    let mut setup_errors = 0;
    for out in &outcomes {
        let rec = match &out.record {
            Ok(r) => r,
            Err(e) => {
                setup_errors += 1;
                if setup_errors == 1 {
                    failures.push(Failure {
                        suite,
                        axiom: "setup",
                        case: out.case,
                        half_dim: out.n,
                        stream: out.stream,
                        tolerance: 0.0,
                        residual: None,
                        error: Some(e.clone()),
                        inputs: Vec::new(),
                    });
                }
                continue;
            }
        };
        for (axiom, result) in &rec.checks {
            let idx = specs
                .iter()
                .position(|a| a.name == *axiom)
                .expect("checks use declared axioms");
            let s = &mut summaries[idx];
            s.cases += 1;
            let (ok, residual, error) = match result {
                Ok(r) => {
                    s.max_residual = Some(s.max_residual.map_or(*r, |m: f64| m.max(*r)));
                    let ok = if s.strict { *r < s.tolerance } else { *r <= s.tolerance };
                    (ok, Some(*r), None)
                }
                Err(e) => (false, None, Some(e.clone())),
            };
            if !ok {
                s.failures += 1;
                if s.failures == 1 {
                    let inputs = rec
                        .inputs
                        .iter()
                        .flat_map(|(name, input)| input.documents(name))
                        .collect();
                    failures.push(Failure {
                        suite,
                        axiom,
                        case: out.case,
                        half_dim: out.n,
                        stream: out.stream,
                        tolerance: s.tolerance,
                        residual,
                        error,
                        inputs,
                    });
                }
            }
        }
    }
    let report = SuiteReport {
        suite,
        dims,
        cases_per_dim: per_dim,
        cases: outcomes.len(),
        axioms: summaries,
        setup_errors,
    };
    Ok((report, failures))
}

fn conj(a: &Mat, m: &Mat) -> Mat {
    a * m * symplectic_inverse(a)
}

/// A symplectic matrix with condition number at most about 3.
fn mild_symplectic(rng: &mut SeededRng, n: usize) -> Mat {
    let o1 = orthogonal_symplectic(rng, n);
    let u = upper_shear(&rng.symmetric_matrix(n, 0.15));
    let d: Vec<f64> = (0..n).map(|_| rng.range(-0.3, 0.3)).collect();
    let l = lower_shear(&rng.symmetric_matrix(n, 0.15));
    let o2 = orthogonal_symplectic(rng, n);
    o1 * u * dilation(&d) * l * o2
}

#[derive(Debug, Clone, Copy)]
enum Block {
    Elliptic(f64),
    Hyperbolic(f64),
    NegativeHyperbolic(f64),
    /// `e^{s ± iφ}`, `e^{−s ± iφ}` on a 4-dimensional block.
    Loxodromic(f64, f64),
}

impl Block {
    fn half_dim(self) -> usize {
        match self {
            Block::Loxodromic(..) => 2,
            _ => 1,
        }
    }

    fn matrix(self) -> Mat {
        match self {
            Block::Elliptic(t) => rotation(1, t),
            Block::Hyperbolic(s) => dilation(&[s]),
            Block::NegativeHyperbolic(s) => -dilation(&[s]),
            Block::Loxodromic(s, phi) => {
                let (sn, cs) = phi.sin_cos();
                let b = Mat::from_row_slice(2, 2, &[cs, -sn, sn, cs]) * s.exp();
                let b_inv_t = b.clone().try_inverse().expect("rotation-dilation").transpose();
                let mut m = Mat::zeros(4, 4);
                m.view_mut((0, 0), (2, 2)).copy_from(&b);
                m.view_mut((2, 2), (2, 2)).copy_from(&b_inv_t);
                m
            }
        }
    }

    fn rho(self) -> Complex64 {
        match self {
            Block::Elliptic(t) => Complex64::from_polar(1.0, t),
            Block::NegativeHyperbolic(_) => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mix {
    Any,
    OffCircle,
    Elliptic,
}

/// Draws spectra whose elliptic angles stay pairwise separated.
#[derive(Default)]
struct SpectrumDraw {
    angles: Vec<f64>,
}

impl SpectrumDraw {
    fn angle(&mut self, rng: &mut SeededRng) -> f64 {
        loop {
            let a = rng.range(0.15, PI - 0.15);
            if self.angles.iter().all(|b| (a - b).abs() > 0.05) {
                self.angles.push(a);
                return if rng.uniform() < 0.5 { a } else { -a };
            }
        }
    }

    fn off_circle(&mut self, rng: &mut SeededRng, room: usize) -> Block {
        let u = rng.uniform();
        let s = rng.range(0.15, 1.0);
        if room >= 2 && u < 0.3 {
            Block::Loxodromic(s, rng.range(0.2, PI - 0.2))
        } else if u < 0.65 {
            Block::Hyperbolic(s)
        } else {
            Block::NegativeHyperbolic(s)
        }
    }

    fn blocks(&mut self, rng: &mut SeededRng, n: usize, mix: Mix) -> Vec<Block> {
        let mut out = Vec::new();
        let mut left = n;
        while left > 0 {
            let b = match mix {
                Mix::Elliptic => Block::Elliptic(self.angle(rng)),
                Mix::OffCircle => self.off_circle(rng, left),
                Mix::Any => {
                    if rng.uniform() < 0.5 {
                        Block::Elliptic(self.angle(rng))
                    } else {
                        self.off_circle(rng, left)
                    }
                }
            };
            left -= b.half_dim();
            out.push(b);
        }
        out
    }
}

fn assemble(blocks: &[Block]) -> Mat {
    let mut it = blocks.iter();
    let first = it.next().expect("at least one block").matrix();
    it.fold(first, |acc, b| direct_sum(&acc, &b.matrix()))
}

fn expected_rho(blocks: &[Block]) -> Complex64 {
    blocks.iter().fold(Complex64::new(1.0, 0.0), |acc, b| acc * b.rho())
}

fn blocks_value(blocks: &[Block]) -> Value {
    Value::Array(blocks.iter().map(|b| Value::String(format!("{b:?}"))).collect())
}

fn rho_case(rng: &mut SeededRng, n: usize) -> Result<CaseRecord> {
    let mut rec = CaseRecord::default();

    let o = orthogonal_symplectic(rng, n);
    rec.check("determinant", || {
        let m = validate_symplectic(o.clone(), 1e-10)?;
        Ok((compute_rho(&m)? - rho_determinant_oracle(&m)?).norm())
    });
    rec.input("orthogonal", Input::Matrix(o));

    let mut draw = SpectrumDraw::default();
    let blocks = draw.blocks(rng, n, Mix::Any);
    let a = generic_symplectic(rng, n);
    let m = conj(&a, &assemble(&blocks));
    let expected = expected_rho(&blocks);
    rec.check("normal-form", || Ok((rho_of(&m)? - expected).norm()));
    let t = generic_symplectic(rng, n);
    rec.check("naturality", || Ok((rho_of(&conj(&t, &m))? - rho_of(&m)?).norm()));
    rec.input("normal-form-blocks", Input::Params(blocks_value(&blocks)));
    rec.input("conjugated", Input::Matrix(m));
    rec.input("conjugator", Input::Matrix(t));

    let (n1, n2) = if n >= 2 {
        let n1 = 1 + rng.below(n - 1);
        (n1, n - n1)
    } else {
        (1, 1)
    };
    let mut draw = SpectrumDraw::default();
    let b1 = draw.blocks(rng, n1, Mix::Any);
    let b2 = draw.blocks(rng, n2, Mix::Any);
    let m1 = conj(&generic_symplectic(rng, n1), &assemble(&b1));
    let m2 = conj(&generic_symplectic(rng, n2), &assemble(&b2));
    rec.check("product", || {
        Ok((rho_of(&direct_sum(&m1, &m2))? - rho_of(&m1)? * rho_of(&m2)?).norm())
    });
    rec.input("factor-1", Input::Matrix(m1));
    rec.input("factor-2", Input::Matrix(m2));

    let mut draw = SpectrumDraw::default();
    let hb = draw.blocks(rng, n, Mix::OffCircle);
    let h = conj(&generic_symplectic(rng, n), &assemble(&hb));
    let sign = expected_rho(&hb);
    rec.check("normalization", || Ok((rho_of(&h)? - sign).norm()));
    rec.input("hyperbolic", Input::Matrix(h));

    let mut draw = SpectrumDraw::default();
    let ne = if n >= 2 { 1 + rng.below(n - 1) } else { 0 };
    let elliptic = if ne > 0 {
        draw.blocks(rng, ne, Mix::Elliptic)
    } else {
        Vec::new()
    };
    let off = draw.blocks(rng, n - ne, Mix::OffCircle);
    let moved: Vec<Block> = off
        .iter()
        .map(|b| match *b {
            Block::Hyperbolic(_) => Block::Hyperbolic(rng.range(0.15, 1.0)),
            Block::NegativeHyperbolic(_) => Block::NegativeHyperbolic(rng.range(0.15, 1.0)),
            Block::Loxodromic(..) => Block::Loxodromic(rng.range(0.15, 1.0), rng.range(0.2, PI - 0.2)),
            e => e,
        })
        .collect();
    let a = generic_symplectic(rng, n);
    let before: Vec<Block> = elliptic.iter().chain(&off).copied().collect();
    let after: Vec<Block> = elliptic.iter().chain(&moved).copied().collect();
    let ma = conj(&a, &assemble(&before));
    let mb = conj(&a, &assemble(&after));
    rec.check("off-circle-insensitivity", || Ok((rho_of(&ma)? - rho_of(&mb)?).norm()));
    rec.input("off-circle-before", Input::Matrix(ma));
    rec.input("off-circle-after", Input::Matrix(mb));
    Ok(rec)
}

/// `t ↦ exp(tX) exp(t²Y)` with a random Hamiltonian `X` that winds and a
/// smaller `Y` that bends the path off a one-parameter subgroup.
fn random_path_generator(rng: &mut SeededRng, n: usize) -> PathGenerator {
    let shift = rng.range(-6.0, 6.0);
    let s = rng.symmetric_matrix(2 * n, 1.0) + Mat::identity(2 * n, 2 * n) * shift;
    let x = j_matrix(n).transpose() * s;
    let y = hamiltonian_matrix(rng, n, 0.7);
    Arc::new(move |t: f64| symplectic_exp(&(&x * t)) * symplectic_exp(&(&y * (t * t))))
}

fn gen_path(n: usize, samples: usize, gen: PathGenerator) -> Result<SymplecticPath> {
    SymplecticPath::from_generator(n, samples, gen, 1e-8)
}

fn mean_case(rng: &mut SeededRng, n: usize) -> Result<CaseRecord> {
    let mut rec = CaseRecord::default();
    let psi_gen = random_path_generator(rng, n);
    let psi = gen_path(n, PATH_SAMPLES, psi_gen.clone())?;
    let d = mean_index(&psi)?.value();

    let a = psi.times()[1 + rng.below(PATH_SAMPLES - 2)];
    rec.check("concatenation", || {
        let left = restricted_mean_index(&psi, 0.0, a)?.value();
        let right = restricted_mean_index(&psi, a, 1.0)?.value();
        Ok((d - left - right).abs())
    });

    let winds: Vec<i64> = (0..n).map(|_| rng.below(5) as i64 - 2).collect();
    let b = generic_symplectic(rng, n);
    let b_inv = symplectic_inverse(&b);
    let turns: Vec<f64> = winds.iter().map(|&k| 2.0 * PI * k as f64).collect();
    let phi_gen: PathGenerator = {
        let (b, b_inv, turns) = (b.clone(), b_inv.clone(), turns.clone());
        Arc::new(move |t: f64| {
            let angles: Vec<f64> = turns.iter().map(|x| x * t).collect();
            &b * rotations(&angles) * &b_inv
        })
    };
    let phi = gen_path(n, PATH_SAMPLES, phi_gen.clone())?;
    let d_phi = mean_index(&phi);
    let expected_loop = 2.0 * winds.iter().sum::<i64>() as f64;
    rec.check(
        "loop-integrality",
        || Ok((d_phi.clone()?.value() - expected_loop).abs()),
    );
    rec.check("loop", || {
        let (pg, qg) = (phi_gen.clone(), psi_gen.clone());
        let prod = gen_path(n, PATH_SAMPLES, Arc::new(move |t| pg(t) * qg(t)))?;
        Ok((mean_index(&prod)?.value() - d_phi.clone()?.value() - d).abs())
    });

    let t = generic_symplectic(rng, n);
    rec.check("naturality", || {
        let (t, t_inv, g) = (t.clone(), symplectic_inverse(&t), psi_gen.clone());
        let p = gen_path(n, PATH_SAMPLES, Arc::new(move |s| &t * g(s) * &t_inv))?;
        Ok((mean_index(&p)?.value() - d).abs())
    });

    let n2 = 1 + rng.below(2);
    let psi2_gen = random_path_generator(rng, n2);
    rec.check("product", || {
        let d2 = mean_index(&gen_path(n2, PATH_SAMPLES, psi2_gen.clone())?)?.value();
        let (g1, g2) = (psi_gen.clone(), psi2_gen.clone());
        let p = gen_path(n + n2, PATH_SAMPLES, Arc::new(move |s| direct_sum(&g1(s), &g2(s))))?;
        Ok((mean_index(&p)?.value() - d - d2).abs())
    });

    let y = hamiltonian_matrix(rng, n, 1.0);
    let eps = 1e-3;
    rec.check("homotopy", || {
        let (g, y) = (psi_gen.clone(), y.clone());
        let p = gen_path(
            n,
            PATH_SAMPLES,
            Arc::new(move |s| g(s) * symplectic_exp(&(&y * (eps * (PI * s).sin())))),
        )?;
        Ok((mean_index(&p)?.value() - d).abs())
    });

    rec.input("path", Input::Path(psi));
    rec.input("loop", Input::Path(phi));
    Ok(rec)
}

fn cz_case(rng: &mut SeededRng, n: usize) -> Result<CaseRecord> {
    let mut rec = CaseRecord::default();
    let opts = RhoOptions::default();
    let mut attempt = 0;
    let path = loop {
        let p = gen_path(n, PATH_SAMPLES, random_path_generator(rng, n))?;
        if check_nondegenerate(p.endpoint(), &opts).is_ok() {
            break p;
        }
        attempt += 1;
        if attempt == 8 {
            return Err(Error::Invalid("no nondegenerate endpoint in 8 draws".into()));
        }
    };
    let gap = check_index_gap(&path);
    rec.check("gap", || Ok(gap.clone()?.gap / n as f64));
    rec.check("cz-integrality", || {
        Ok(gap.clone()?.cz_index.oracle_residual.unwrap_or(f64::NAN))
    });
    rec.input("path", Input::Path(path));
    Ok(rec)
}

fn integer_value(v: IndexValue) -> f64 {
    match v {
        IndexValue::Integer(k) => k as f64,
        IndexValue::Real(x) => x,
    }
}

/// Planar rotations and small-Hessian maxima with known indices.
fn cz_fixed_cases() -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    for (i, &theta) in [0.25, 0.5, 1.3, 2.7].iter().enumerate() {
        let mut rec = CaseRecord::default();
        let gen: PathGenerator = Arc::new(move |t| rotation(1, 2.0 * PI * theta * t));
        let expected = 2.0 * theta.floor() + 1.0;
        let path = gen_path(1, PATH_SAMPLES, gen);
        rec.check("planar-closed-form", || {
            Ok((integer_value(cz_index(&path.clone()?)?.value) - expected).abs())
        });
        rec.input("theta", Input::Params(theta.into()));
        out.push(CaseOutcome {
            n: 1,
            case: i,
            stream: 0,
            record: Ok(rec),
        });
    }
    for n in 1..=3 {
        let mut rec = CaseRecord::default();
        let a = -(j_matrix(n).transpose() * 0.1);
        let gen: PathGenerator = Arc::new(move |t| symplectic_exp(&(&a * t)));
        let path = gen_path(n, PATH_SAMPLES, gen);
        rec.check("maximum-normalization", || {
            Ok((integer_value(cz_index(&path.clone()?)?.value) - n as f64).abs())
        });
        rec.input("hessian-scale", Input::Params((-0.1).into()));
        out.push(CaseOutcome {
            n,
            case: 4 + n,
            stream: 0,
            record: Ok(rec),
        });
    }
    out
}

fn both_strategies(lp: &CoisotropicLoop, hol: &HolonomyPath) -> Result<(f64, f64)> {
    let a = maslov_index_with(lp, hol, LiftStrategy::BlockAssembly)?.value();
    let b = maslov_index_with(lp, hol, LiftStrategy::FrameTransport)?.value();
    Ok((a, b))
}

fn lift_constraint_residual(lp: &CoisotropicLoop, hol: &HolonomyPath) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in [LiftStrategy::BlockAssembly, LiftStrategy::FrameTransport] {
        let lift = build_lift(lp, hol, s)?;
        let (span, quot) = lift_residuals(lp, hol, &lift)?;
        worst = worst.max(span).max(quot);
    }
    Ok(worst)
}

fn loop_from_flow(c0: &Subspace, codim: usize, times: &[f64], flow: &[Mat]) -> Result<CoisotropicLoop> {
    let n = c0.half_dim();
    let mut subspaces = flow.iter().map(|f| c0.image(f, 1e-9)).collect::<Result<Vec<_>>>()?;
    let last = subspaces.len() - 1;
    subspaces[last] = subspaces[0].clone();
    CoisotropicLoop::new(n, codim, times.to_vec(), subspaces, None, Tolerances::default())
}

fn quotient_hamiltonian(rng: &mut SeededRng, m: usize) -> Mat {
    let shift = rng.range(-4.0, 4.0);
    let s = rng.symmetric_matrix(2 * m, 1.0) + Mat::identity(2 * m, 2 * m) * shift;
    j_matrix(m).transpose() * s
}

fn maslov_case(rng: &mut SeededRng, n: usize, case: usize) -> Result<CaseRecord> {
    let mut family = case % 4;
    if family == 0 && n > 3 {
        family = 1;
    }
    let times = uniform_times(LOOP_SAMPLES);
    let mut rec = CaseRecord::default();
    match family {
        0 => {
            let a = mild_symplectic(rng, n);
            let l = Subspace::horizontal_lagrangian(n).image(&a, 1e-9)?;
            let lp = CoisotropicLoop::constant(l, n, LOOP_SAMPLES)?;
            let hol = HolonomyPath::identity(0, lp.times().to_vec())?;
            let both = both_strategies(&lp, &hol);
            rec.check("lagrangian-reduction", || {
                let (x, y) = both.clone()?;
                Ok(x.abs().max(y.abs()))
            });
            rec.check("well-definedness", || {
                let (x, y) = both.clone()?;
                Ok((x - y).abs())
            });
            rec.check("lift-constraints", || lift_constraint_residual(&lp, &hol));
            rec.input("constant-lagrangian", Input::Loop(lp, hol));
        }
        1 => {
            let k = if n == 1 { 0 } else { 1 + rng.below((n - 1).min(3)) };
            let m = n - k;
            let a = mild_symplectic(rng, n);
            let c = Subspace::coordinate_coisotropic(n, k).image(&a, 1e-9)?;
            let lp = CoisotropicLoop::constant(c, k, LOOP_SAMPLES)?;
            let z = quotient_hamiltonian(rng, m);
            let h_gen: PathGenerator = Arc::new(move |t| symplectic_exp(&(&z * t)));
            let maps: Vec<Mat> = times.iter().map(|&t| h_gen(t)).collect();
            let hol = HolonomyPath::new(m, times.clone(), maps, 1e-8)?;
            let h_path = gen_path(m, LOOP_SAMPLES, h_gen)?;
            let mu = maslov_index(&lp, &hol)?.value();
            rec.check("constant-reduction", || Ok((mu + mean_index(&h_path)?.value()).abs()));
            common_loop_checks(&mut rec, &lp, &hol, mu);
            rec.input("constant-coisotropic", Input::Loop(lp, hol));
        }
        2 => {
            let k = 1 + rng.below(n.min(3));
            let m = n - k;
            let a0 = mild_symplectic(rng, n);
            let c0 = Subspace::coordinate_coisotropic(n, k).image(&a0, 1e-9)?;
            let b = mild_symplectic(rng, n);
            let b_inv = symplectic_inverse(&b);
            let turns: Vec<f64> = (0..n).map(|_| 2.0 * PI * (rng.below(3) as f64 - 1.0)).collect();
            let y = hamiltonian_matrix(rng, n, 0.3);
            let phi: PathGenerator = Arc::new(move |t: f64| {
                let angles: Vec<f64> = turns.iter().map(|x| x * t).collect();
                &b * rotations(&angles) * &b_inv * symplectic_exp(&(&y * (PI * t).sin()))
            });
            let flow: Vec<Mat> = times.iter().map(|&t| phi(t)).collect();
            let lp = loop_from_flow(&c0, k, &times, &flow)?;
            rec.check("orientation-detection", || Ok(if lp.oriented() { 0.0 } else { 1.0 }));
            let mut hol = holonomy_from_flow(&lp, &flow)?;
            let twisted = m > 0 && (case / 4) % 2 == 1;
            if twisted {
                let z = quotient_hamiltonian(rng, m) * 0.5;
                let maps = hol
                    .maps()
                    .iter()
                    .zip(&times)
                    .map(|(h, &t)| h * symplectic_exp(&(&z * t)))
                    .collect();
                hol = HolonomyPath::new(m, times.clone(), maps, 1e-8)?;
            }
            let mu = maslov_index(&lp, &hol)?.value();
            if !twisted {
                rec.check("flow-lift", || {
                    Ok((mu + mean_index(&gen_path(n, LOOP_SAMPLES, phi.clone())?)?.value()).abs())
                });
                let w = hamiltonian_matrix(rng, n, 1.0);
                rec.check("homotopy", || {
                    let eps = 1e-3;
                    let bent: Vec<Mat> = times
                        .iter()
                        .zip(&flow)
                        .map(|(&t, f)| symplectic_exp(&(&w * (eps * (PI * t).sin()))) * f)
                        .collect();
                    let lp2 = loop_from_flow(&c0, k, &times, &bent)?;
                    let hol2 = holonomy_from_flow(&lp2, &bent)?;
                    Ok((maslov_index(&lp2, &hol2)?.value() - mu).abs())
                });
            }
            common_loop_checks(&mut rec, &lp, &hol, mu);
            rec.input("moving", Input::Loop(lp, hol));
        }
        _ => {
            let k = 1 + rng.below(n.min(3));
            let j = rng.below(k);
            let a0 = mild_symplectic(rng, n);
            let a0_inv = symplectic_inverse(&a0);
            let c0 = Subspace::coordinate_coisotropic(n, k).image(&a0, 1e-9)?;
            let phi: PathGenerator = Arc::new(move |t: f64| {
                let mut angles = vec![0.0; n];
                angles[j] = PI * t;
                &a0 * rotations(&angles) * &a0_inv
            });
            let flow: Vec<Mat> = times.iter().map(|&t| phi(t)).collect();
            let lp = loop_from_flow(&c0, k, &times, &flow)?;
            rec.check("orientation-detection", || Ok(if lp.oriented() { 1.0 } else { 0.0 }));
            let hol = holonomy_from_flow(&lp, &flow)?;
            let both = both_strategies(&lp, &hol);
            rec.check("well-definedness", || {
                let (x, y) = both.clone()?;
                Ok((x - y).abs())
            });
            rec.check("flow-lift", || {
                let end = phi(1.0);
                let g = phi.clone();
                let doubled: PathGenerator = Arc::new(
                    move |s: f64| {
                        if s <= 0.5 {
                            g(2.0 * s)
                        } else {
                            g(2.0 * s - 1.0) * &end
                        }
                    },
                );
                let d = mean_index(&gen_path(n, 2 * LOOP_SAMPLES - 1, doubled)?)?.value();
                Ok((both.clone()?.0 + 0.5 * d).abs())
            });
            rec.input("half-turn", Input::Loop(lp, hol));
        }
    }
    Ok(rec)
}

fn common_loop_checks(rec: &mut CaseRecord, lp: &CoisotropicLoop, hol: &HolonomyPath, mu: f64) {
    rec.check("well-definedness", || Ok(well_definedness_check(lp, hol)?.difference));
    rec.check("lift-constraints", || lift_constraint_residual(lp, hol));
    rec.check("double-cover", || {
        Ok((via_double_cover(lp, hol, LiftStrategy::BlockAssembly)?.value() - mu).abs())
    });
    rec.check("homogeneity", || {
        let mut worst = 0.0f64;
        for k in [2usize, 3] {
            let (l2, h2) = homogeneity_cover(lp, hol, k)?;
            worst = worst.max((maslov_index(&l2, &h2)?.value() - k as f64 * mu).abs());
        }
        Ok(worst)
    });
}

fn flat_case(rng: &mut SeededRng, n: usize, case: usize) -> Result<CaseRecord> {
    let k = 1 + rng.below(n.min(3));
    let m = n - k;
    let variant = case % 4;
    let mut velocity: Vec<Rational> = (0..k)
        .map(|_| Rational::new(rng.below(7) as i64 - 3, 1 + rng.below(3) as i64))
        .collect::<Result<_>>()?;
    if velocity.iter().all(|r| r.num == 0) {
        velocity[0] = Rational::new(1, 1)?;
    }
    let mut spec = FlatModelSpec::new(k, velocity);
    spec.quotient_half_dim = m;
    if variant & 1 == 1 {
        spec.metric_perturbation = Some(rng.symmetric_matrix(k, 0.1));
    }
    if variant & 2 == 2 && m > 0 {
        let g = rng.gaussian_matrix(2 * m, 2 * m, 1.0);
        spec.quotient_hessian = Some(Mat::identity(2 * m, 2 * m) * 0.2 + &g * g.transpose() * 0.3);
    }
    let (path, lp, hol) = flat_leafwise_geodesic_path(&spec, LOOP_SAMPLES)?;
    let d = mean_index(&path)?.value();
    let mu = maslov_index(&lp, &hol)?.value();
    flat_record(path, lp, hol, d, mu, variant, m, &spec)
}

#[allow(clippy::too_many_arguments)]
fn flat_record(
    path: SymplecticPath,
    lp: CoisotropicLoop,
    hol: HolonomyPath,
    d: f64,
    mu: f64,
    variant: usize,
    m: usize,
    spec: &FlatModelSpec,
) -> Result<CaseRecord> {
    let mut rec = CaseRecord::default();
    rec.check("projection-identity", || Ok((mu + d).abs()));
    if variant == 0 {
        rec.check("unperturbed-zero", || Ok(mu.abs().max(d.abs())));
    }
    if m == 0 {
        rec.check("lagrangian-torus", || Ok(mu.abs()));
    }
    let mut params = Map::new();
    params.insert("codim".into(), spec.codim.into());
    params.insert(
        "velocity".into(),
        Value::Array(
            spec.velocity
                .iter()
                .map(|r| Value::String(format!("{}/{}", r.num, r.den)))
                .collect(),
        ),
    );
    params.insert("quotient_half_dim".into(), spec.quotient_half_dim.into());
    if let Some(e) = &spec.metric_perturbation {
        params.insert("metric_perturbation".into(), matrix_to_value(e)?);
    }
    if let Some(kh) = &spec.quotient_hessian {
        params.insert("quotient_hessian".into(), matrix_to_value(kh)?);
    }
    rec.input("spec", Input::Params(Value::Object(params)));
    rec.input("path", Input::Path(path));
    rec.input("projected", Input::Loop(lp, hol));
    Ok(rec)
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v = parse_suites(s)?;
        match v.as_slice() {
            [one] => Ok(*one),
            _ => Err(Error::Invalid(format!("'{s}' names more than one suite"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suite: Suite, cases: usize) -> VerifyReport {
        let mut cfg = VerifyConfig::new(vec![suite], 7);
        cfg.cases = Some(cases);
        run(&cfg).unwrap()
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_dims("1..4").unwrap(), (1, 4));
        assert_eq!(parse_dims("2..=3").unwrap(), (2, 3));
        assert_eq!(parse_dims("3").unwrap(), (3, 3));
        assert_eq!(parse_dims("1-2").unwrap(), (1, 2));
        assert!(parse_dims("0..2").is_err());
        assert!(parse_dims("1..9").is_err());
        assert_eq!(parse_tolerance("product=1e-7").unwrap(), ("product".into(), 1e-7));
        assert!(parse_tolerance("rho-axioms.naturality=1e-6").is_ok());
        assert!(parse_tolerance("nonsense=1").is_err());
        assert_eq!(parse_suites("all").unwrap().len(), 5);
        assert_eq!(
            parse_suites("flat-model, rho-axioms,flat-model").unwrap(),
            vec![Suite::RhoAxioms, Suite::FlatModel]
        );
        assert!(parse_suites("rho-axioms,bogus").is_err());
    }

    #[test]
    fn every_suite_passes_a_few_cases() {
        for suite in Suite::ALL {
            let r = small(suite, 4);
            let text = serde_json::to_string(&r.to_value()).unwrap();
            assert!(r.pass(), "{}", text);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = small(Suite::RhoAxioms, 5).to_value();
        let b = small(Suite::RhoAxioms, 5).to_value();
        assert_eq!(to_canonical_bytes(&a), to_canonical_bytes(&b));
    }

    #[test]
    fn failures_produce_artifacts() {
        let mut cfg = VerifyConfig::new(vec![Suite::RhoAxioms], 3);
        cfg.cases = Some(2);
        cfg.dims = Some((2, 2));
        cfg.tolerances.insert("naturality".into(), 0.0);
        cfg.tolerances.insert("product".into(), 0.0);
        let r = run(&cfg).unwrap();
        assert!(!r.pass());
        let dir = tempfile::tempdir().unwrap();
        let files = write_artifacts(&r, dir.path()).unwrap();
        assert!(!files.is_empty());
        let doc: Value = serde_json::from_slice(&std::fs::read(&files[0]).unwrap()).unwrap();
        assert_eq!(doc["schema_version"], REPRO_SCHEMA);
        assert!(doc["inputs"]["conjugated"]["entries"].is_array());
    }
}
