//! Command-line front end. Results go to stdout as canonical JSON,
//! diagnostics to stderr.

use crate::error::Error;
use crate::flows::{
    ellipsoid_orbit_index, ellipsoid_path, ellipsoid_tangent_loop, flat_leafwise_geodesic_path, EllipsoidSpec,
    FlatModelSpec, Rational,
};
use crate::indices::{check_index_gap, cz_index, mean_index, DEFAULT_SAMPLES};
use crate::maslov::{maslov_index_with, well_definedness_check, LiftStrategy};
use crate::pathio::{
    self, read_holonomy, read_loop, read_matrix, read_path, report_to_value, to_canonical_bytes, Metadata,
};
use crate::rho::classify_spectrum;
use crate::verify::{self, parse_dims, parse_suites, parse_tolerance, VerifyConfig, ARTIFACT_DIR_ENV};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

/// Directory for failure artifacts when neither the flag nor the environment
/// variable is set.
pub const DEFAULT_ARTIFACT_DIR: &str = "sympidx-artifacts";

#[derive(Debug, Parser)]
#[command(
    name = "sympidx",
    version,
    about = "Symplectic index computations and property checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ρ-invariant and spectral classification of a symplectic matrix.
    Rho {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Mean index Δ of a sampled path.
    MeanIndex(PathArg),
    /// Conley–Zehnder index of a path with nondegenerate endpoint.
    CzIndex(PathArg),
    /// Check |Δ − μCZ| < n.
    GapCheck(PathArg),
    /// Maslov index of a coisotropic loop with holonomy.
    Maslov {
        #[arg(long = "loop")]
        loop_file: PathBuf,
        #[arg(long)]
        holonomy: PathBuf,
        #[arg(long, default_value = "block-assembly")]
        strategy: String,
    },
    /// Index of the closed orbit γ_j on an irrational ellipsoid.
    Ellipsoid {
        /// Comma-separated semi-axis weights.
        #[arg(long)]
        lambdas: String,
        #[arg(long, default_value_t = 1)]
        orbit: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Also write path, loop, holonomy and report documents here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Leafwise geodesic flow in the flat coisotropic model.
    FlatModel {
        #[arg(long)]
        codim: usize,
        /// Comma-separated rational leaf velocity, e.g. `1,1/2,0.25`.
        #[arg(long)]
        velocity: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Half-dimension of the symplectic quotient factor.
        #[arg(long, default_value_t = 0)]
        quotient_dim: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct PathArg {
    #[arg(long)]
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name or `all`; comma-separated lists are accepted.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Cases per half-dimension.
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Range of half-dimensions, e.g. `1..4`.
    #[arg(long)]
    pub dims: Option<String>,
    /// Output directory for failure artifacts.
    #[arg(long)]
    pub artifact_dir: Option<PathBuf>,
    /// Tolerance override `axiom=value` or `suite.axiom=value`.
    #[arg(long = "tol")]
    pub tolerances: Vec<String>,
}

/// Outcome of a subcommand before it is written out.
struct Outcome {
    json: Value,
    code: i32,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Outcome { json, code: EXIT_OK }
    }
}

/// Parse `args` (including the program name), run, and write to the given
/// streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, err) {
        Ok(o) => {
            let _ = out.write_all(&to_canonical_bytes(&o.json));
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, err: &mut dyn Write) -> Result<Outcome, Error> {
    match cmd {
        Command::Rho { matrix } => rho(&matrix).map(Outcome::ok),
        Command::MeanIndex(a) => {
            let (path, _) = read_path(&read_file(&a.path)?)?;
            Ok(Outcome::ok(report_to_value(&mean_index(&path)?)?))
        }
        Command::CzIndex(a) => {
            let (path, _) = read_path(&read_file(&a.path)?)?;
            Ok(Outcome::ok(report_to_value(&cz_index(&path)?)?))
        }
        Command::GapCheck(a) => {
            let (path, _) = read_path(&read_file(&a.path)?)?;
            let g = check_index_gap(&path)?;
            Ok(Outcome::ok(json!({
                "half_dim": g.half_dim,
                "mean_index": report_to_value(&g.mean_index)?,
                "cz_index": report_to_value(&g.cz_index)?,
                "gap": finite(g.gap)?,
                "pass": g.pass,
            })))
        }
        Command::Maslov {
            loop_file,
            holonomy,
            strategy,
        } => maslov(&loop_file, &holonomy, &strategy).map(Outcome::ok),
        Command::Ellipsoid {
            lambdas,
            orbit,
            samples,
            out_dir,
        } => ellipsoid(&lambdas, orbit, samples, out_dir.as_deref()).map(Outcome::ok),
        Command::FlatModel {
            codim,
            velocity,
            samples,
            quotient_dim,
            out_dir,
        } => flat_model(codim, &velocity, samples, quotient_dim, out_dir.as_deref()).map(Outcome::ok),
        Command::Verify(a) => run_verify(a, err),
    }
}

fn read_file(p: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn write_file(p: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn finite(x: f64) -> Result<Value, Error> {
    // `+ 0.0` turns −0 into 0
    serde_json::Number::from_f64(x + 0.0)
        .map(Value::Number)
        .ok_or_else(|| Error::Invalid(format!("non-finite result {x}")))
}

fn complex(z: Complex64) -> Result<Value, Error> {
    Ok(json!({ "re": finite(z.re)?, "im": finite(z.im)? }))
}

fn samples_ok(samples: usize) -> Result<(), Error> {
    if samples < 2 {
        return Err(Error::Invalid("samples must be at least 2".into()));
    }
    Ok(())
}

fn rho(file: &Path) -> Result<Value, Error> {
    let (m, _) = read_matrix(&read_file(file)?)?;
    let c = classify_spectrum(&m)?;
    let spectrum = c
        .clusters
        .iter()
        .map(|cl| {
            Ok(json!({
                "value": complex(cl.value)?,
                "multiplicity": cl.multiplicity,
                "tag": cl.tag.as_str(),
            }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let krein = c
        .krein_table
        .iter()
        .map(|e| {
            Ok(json!({
                "eigenvalue": complex(e.eigenvalue)?,
                "multiplicity": e.multiplicity,
                "m_plus": e.m_plus,
            }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(json!({
        "half_dim": m.half_dim(),
        "rho": complex(c.rho())?,
        "m0": c.m0,
        "minus_one_multiplicity": c.minus_one_multiplicity,
        "spectrum": spectrum,
        "krein_table": krein,
    }))
}

fn maslov(loop_file: &Path, hol_file: &Path, strategy: &str) -> Result<Value, Error> {
    let single = match strategy {
        "both" => None,
        s => Some(s.parse::<LiftStrategy>().map_err(Error::Invalid)?),
    };
    let (lp, _) = read_loop(&read_file(loop_file)?)?;
    let (hol, _) = read_holonomy(&read_file(hol_file)?)?;
    let base = json!({
        "half_dim": lp.half_dim(),
        "codim": lp.codim(),
        "oriented": lp.oriented(),
    });
    let mut obj = base.as_object().cloned().unwrap_or_default();
    if let Some(s) = single {
        let r = maslov_index_with(&lp, &hol, s)?;
        obj.insert("strategy".into(), Value::String(strategy.into()));
        obj.insert("report".into(), report_to_value(&r)?);
        obj.insert("value".into(), finite(r.value())?);
    } else {
        let w = well_definedness_check(&lp, &hol)?;
        obj.insert("block_assembly".into(), finite(w.block_assembly)?);
        obj.insert("frame_transport".into(), finite(w.frame_transport)?);
        obj.insert("difference".into(), finite(w.difference)?);
        obj.insert("value".into(), finite(w.block_assembly)?);
    }
    Ok(Value::Object(obj))
}

fn parse_list<T>(s: &str, what: &str, parse: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Error> {
    let items: Vec<T> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse(p.trim()))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(Error::Invalid(format!("{what} list is empty")));
    }
    Ok(items)
}

fn parse_lambda(s: &str) -> Result<f64, Error> {
    s.parse::<f64>()
        .map_err(|_| Error::Invalid(format!("'{s}' is not a number")))
}

fn ellipsoid(lambdas: &str, orbit: usize, samples: usize, out_dir: Option<&Path>) -> Result<Value, Error> {
    samples_ok(samples)?;
    let spec = EllipsoidSpec::new(parse_list(lambdas, "lambda", parse_lambda)?, orbit)?;
    let r = ellipsoid_orbit_index(&spec, samples)?;
    if let Some(dir) = out_dir {
        let mut meta = Metadata::new();
        meta.insert("generator".into(), json!("ellipsoid"));
        meta.insert("lambdas".into(), json!(spec.lambdas));
        meta.insert("orbit".into(), json!(orbit));
        meta.insert("samples".into(), json!(samples));
        let path = ellipsoid_path(&spec, samples, 1)?;
        let (_, lp, hol) = ellipsoid_tangent_loop(&spec, samples)?;
        write_bundle(dir, &meta, &path, Some((&lp, &hol)), &report_to_value(&r.mean_index)?)?;
    }
    Ok(json!({
        "lambdas": spec.lambdas,
        "orbit": orbit,
        "samples": samples,
        "period": finite(r.period)?,
        "capping_area": finite(spec.capping_area())?,
        "mu_numeric": finite(r.mu_numeric)?,
        "mu_closed_form": finite(r.mu_closed_form)?,
        "abs_error": finite((r.mu_numeric - r.mu_closed_form).abs())?,
        "mean_index": report_to_value(&r.mean_index)?,
    }))
}

fn flat_model(
    codim: usize,
    velocity: &str,
    samples: usize,
    quotient_dim: usize,
    out_dir: Option<&Path>,
) -> Result<Value, Error> {
    samples_ok(samples)?;
    let v = parse_list(velocity, "velocity", Rational::parse)?;
    let mut spec = FlatModelSpec::new(codim, v);
    spec.quotient_half_dim = quotient_dim;
    let (path, lp, hol) = flat_leafwise_geodesic_path(&spec, samples)?;
    let delta = mean_index(&path)?;
    let mu = maslov_index_with(&lp, &hol, LiftStrategy::BlockAssembly)?;
    let velocity: Vec<String> = spec.velocity.iter().map(|r| r.to_string()).collect();
    if let Some(dir) = out_dir {
        let mut meta = Metadata::new();
        meta.insert("generator".into(), json!("flat-model"));
        meta.insert("codim".into(), json!(codim));
        meta.insert("velocity".into(), json!(velocity));
        meta.insert("quotient_dim".into(), json!(quotient_dim));
        meta.insert("samples".into(), json!(samples));
        write_bundle(dir, &meta, &path, Some((&lp, &hol)), &report_to_value(&mu)?)?;
    }
    Ok(json!({
        "codim": codim,
        "quotient_dim": quotient_dim,
        "velocity": velocity,
        "samples": samples,
        "period": finite(spec.period()?)?,
        "delta_rho": finite(delta.value())?,
        "mu": finite(mu.value())?,
        "projection_residual": finite((mu.value() + delta.value()).abs())?,
        "mean_index": report_to_value(&delta)?,
        "maslov_index": report_to_value(&mu)?,
    }))
}

fn write_bundle(
    dir: &Path,
    meta: &Metadata,
    path: &crate::indices::SymplecticPath,
    tangent: Option<(&crate::maslov::CoisotropicLoop, &crate::maslov::HolonomyPath)>,
    report: &Value,
) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    write_file(&dir.join("path.json"), &pathio::write_path(path, meta)?)?;
    if let Some((lp, hol)) = tangent {
        write_file(&dir.join("loop.json"), &pathio::write_loop(lp, meta)?)?;
        write_file(&dir.join("holonomy.json"), &pathio::write_holonomy(hol, meta)?)?;
    }
    write_file(&dir.join("report.json"), &to_canonical_bytes(report))
}

fn run_verify(a: VerifyArgs, err: &mut dyn Write) -> Result<Outcome, Error> {
    let mut config = VerifyConfig::new(parse_suites(&a.suite)?, a.seed);
    if let Some(c) = a.cases {
        if c == 0 {
            return Err(Error::Invalid("cases must be at least 1".into()));
        }
        config.cases = Some(c);
    }
    if let Some(d) = &a.dims {
        config.dims = Some(parse_dims(d)?);
    }
    for t in &a.tolerances {
        let (k, v) = parse_tolerance(t)?;
        config.tolerances.insert(k, v);
    }
    let report = verify::run(&config)?;
    let json = report.to_value();
    if report.pass() {
        return Ok(Outcome::ok(json));
    }
    let dir = a
        .artifact_dir
        .or_else(|| std::env::var_os(ARTIFACT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_ARTIFACT_DIR));
    let written = verify::write_artifacts(&report, &dir)?;
    for p in &written {
        let _ = writeln!(err, "wrote {}", p.display());
    }
    Ok(Outcome {
        json,
        code: EXIT_VIOLATION,
    })
}
