//! Mean index and Conley–Zehnder index of sampled symplectic paths.

use crate::error::{Error, Result};
use crate::linalg::{max_abs, Mat};
use crate::rho::{classify_spectrum_with, rho_with, RhoOptions};
use crate::sympcore::symplectic_residual;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Evaluates the true path at an arbitrary time, used for adaptive refinement.
pub type PathGenerator = Arc<dyn Fn(f64) -> Mat + Send + Sync>;

pub const DEFAULT_REFINEMENT_BUDGET: usize = 20;
pub const DEFAULT_SAMPLES: usize = 512;

/// Phase steps at or above this bound trigger refinement.
pub const PHASE_STEP_BOUND: f64 = PI / 2.0;

/// A sampled path `Ψ: [0, 1] → Sp(2n)` with `Ψ₀ = I`.
#[derive(Clone)]
pub struct SymplecticPath {
    half_dim: usize,
    times: Vec<f64>,
    frames: Vec<Mat>,
    refinement_budget: usize,
    generator: Option<PathGenerator>,
}

impl fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("half_dim", &self.half_dim)
            .field("samples", &self.times.len())
            .field("refinement_budget", &self.refinement_budget)
            .field("generator", &self.generator.is_some())
            .finish()
    }
}

impl PartialEq for SymplecticPath {
    fn eq(&self, other: &Self) -> bool {
        self.half_dim == other.half_dim
            && self.times == other.times
            && self.frames == other.frames
            && self.refinement_budget == other.refinement_budget
    }
}

/// Validate a sample grid on `[0, 1]`.
pub fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::Document("a path needs at least two samples".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Document("times contain non-finite values".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Document("times[0] must be 0".into()));
    }
    for i in 1..times.len() {
        if times[i] <= times[i - 1] {
            return Err(Error::Document(format!("times not strictly increasing at index {i}")));
        }
    }
    if *times.last().unwrap() != 1.0 {
        return Err(Error::Document("last time must be 1".into()));
    }
    Ok(())
}

fn check_frame(m: &Mat, n: usize, index: usize, tol: f64) -> Result<()> {
    if m.nrows() != 2 * n || m.ncols() != 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "frame {index} is {}x{}, expected {}x{}",
            m.nrows(),
            m.ncols(),
            2 * n,
            2 * n
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Document(format!("frame {index} has non-finite entries")));
    }
    let residual = symplectic_residual(m);
    if residual > tol {
        return Err(Error::Document(format!(
            "frame {index} is not symplectic: residual {residual:e} exceeds {tol:e}"
        )));
    }
    Ok(())
}

impl SymplecticPath {
    /// Validated raw samples. Refinement is impossible without a generator.
    pub fn new(half_dim: usize, times: Vec<f64>, frames: Vec<Mat>, tol: f64) -> Result<Self> {
        if half_dim == 0 {
            return Err(Error::Invalid("half_dim must be at least 1".into()));
        }
        check_times(&times)?;
        if frames.len() != times.len() {
            return Err(Error::Document(format!(
                "{} frames for {} times",
                frames.len(),
                times.len()
            )));
        }
        for (i, f) in frames.iter().enumerate() {
            check_frame(f, half_dim, i, tol)?;
        }
        let id_err = max_abs(&(&frames[0] - Mat::identity(2 * half_dim, 2 * half_dim)));
        if id_err > 1e-12 {
            return Err(Error::Document(format!(
                "frames[0] differs from the identity by {id_err:e}"
            )));
        }
        Ok(SymplecticPath {
            half_dim,
            times,
            frames,
            refinement_budget: DEFAULT_REFINEMENT_BUDGET,
            generator: None,
        })
    }

    /// Sample `gen` on a uniform grid of `samples` points, keeping `gen` for
    /// refinement.
    pub fn from_generator(half_dim: usize, samples: usize, gen: PathGenerator, tol: f64) -> Result<Self> {
        let samples = samples.max(2);
        let times: Vec<f64> = (0..samples)
            .map(|i| {
                if i + 1 == samples {
                    1.0
                } else {
                    i as f64 / (samples - 1) as f64
                }
            })
            .collect();
        let frames: Vec<Mat> = times.iter().map(|&t| gen(t)).collect();
        let mut p = SymplecticPath::new(half_dim, times, frames, tol)?;
        p.generator = Some(gen);
        Ok(p)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.refinement_budget = budget;
        self
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Mat] {
        &self.frames
    }

    pub fn endpoint(&self) -> &Mat {
        self.frames.last().unwrap()
    }

    pub fn refinement_budget(&self) -> usize {
        self.refinement_budget
    }

    pub fn generator(&self) -> Option<&PathGenerator> {
        self.generator.as_ref()
    }

    /// Samples and generator restricted to `[a, b]`, with no re-basing.
    pub fn segment(&self, a: f64, b: f64) -> Result<Segment> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
            return Err(Error::Invalid(format!("bad restriction interval [{a}, {b}]")));
        }
        match &self.generator {
            Some(g) => {
                let samples = self.times.len();
                let times: Vec<f64> = (0..samples)
                    .map(|i| {
                        if i + 1 == samples {
                            b
                        } else {
                            a + (b - a) * i as f64 / (samples - 1) as f64
                        }
                    })
                    .collect();
                let frames = times.iter().map(|&t| g(t)).collect();
                Ok(Segment {
                    times,
                    frames,
                    generator: Some(g.clone()),
                    refinement_budget: self.refinement_budget,
                })
            }
            None => {
                let i0 = self.times.iter().position(|&t| t == a);
                let i1 = self.times.iter().position(|&t| t == b);
                match (i0, i1) {
                    (Some(i0), Some(i1)) => Ok(Segment {
                        times: self.times[i0..=i1].to_vec(),
                        frames: self.frames[i0..=i1].to_vec(),
                        generator: None,
                        refinement_budget: self.refinement_budget,
                    }),
                    _ => Err(Error::Invalid(
                        "restriction of a raw path must end on sample times".into(),
                    )),
                }
            }
        }
    }

    fn as_segment(&self) -> Segment {
        Segment {
            times: self.times.clone(),
            frames: self.frames.clone(),
            generator: self.generator.clone(),
            refinement_budget: self.refinement_budget,
        }
    }
}

/// A sampled path on an arbitrary interval, not necessarily starting at I.
#[derive(Clone)]
pub struct Segment {
    pub times: Vec<f64>,
    pub frames: Vec<Mat>,
    pub generator: Option<PathGenerator>,
    pub refinement_budget: usize,
}

/// A computed index with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub value: IndexValue,
    pub max_phase_step: f64,
    pub refinement_depth: usize,
    pub oracle_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexValue {
    Real(f64),
    Integer(i64),
}

impl IndexValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            IndexValue::Real(x) => x,
            IndexValue::Integer(k) => k as f64,
        }
    }
}

impl IndexReport {
    pub fn value(&self) -> f64 {
        self.value.as_f64()
    }
}

/// Continuous phase accumulator for ρ along a segment.
struct Unwrapper<'a> {
    generator: Option<&'a PathGenerator>,
    budget: usize,
    opts: RhoOptions,
    total: f64,
    max_step: f64,
    depth: usize,
}

impl Unwrapper<'_> {
    fn step(&mut self, t0: f64, t1: f64, r0: Complex64, r1: Complex64, level: usize) -> Result<()> {
        let step = (r1 * r0.conj()).arg();
        if step.abs() < PHASE_STEP_BOUND {
            self.total += step;
            self.max_step = self.max_step.max(step.abs());
            self.depth = self.depth.max(level);
            return Ok(());
        }
        let gen = match self.generator {
            Some(g) if level < self.budget => g,
            _ => {
                return Err(Error::RefinementExhausted {
                    t0,
                    t1,
                    step: step.abs(),
                })
            }
        };
        let tm = 0.5 * (t0 + t1);
        let rm = rho_with(&gen(tm), &self.opts)?;
        self.step(t0, tm, r0, rm, level + 1)?;
        self.step(tm, t1, rm, r1, level + 1)
    }
}

pub fn segment_mean_index(seg: &Segment, opts: &RhoOptions) -> Result<IndexReport> {
    let rhos = seg
        .frames
        .iter()
        .map(|f| rho_with(f, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut u = Unwrapper {
        generator: seg.generator.as_ref(),
        budget: seg.refinement_budget,
        opts: *opts,
        total: 0.0,
        max_step: 0.0,
        depth: 0,
    };
    for i in 0..rhos.len() - 1 {
        u.step(seg.times[i], seg.times[i + 1], rhos[i], rhos[i + 1], 0)?;
    }
    Ok(IndexReport {
        value: IndexValue::Real(u.total / PI),
        max_phase_step: u.max_step,
        refinement_depth: u.depth,
        oracle_residual: None,
    })
}

/// `Δ(Ψ) = α(1) − α(0)` with `ρ(Ψ_t) = e^{iπα(t)}`.
pub fn mean_index(path: &SymplecticPath) -> Result<IndexReport> {
    mean_index_with(path, &RhoOptions::default())
}

pub fn mean_index_with(path: &SymplecticPath, opts: &RhoOptions) -> Result<IndexReport> {
    segment_mean_index(&path.as_segment(), opts)
}

/// Mean index of `Ψ|[a, b]`.
pub fn restricted_mean_index(path: &SymplecticPath, a: f64, b: f64) -> Result<IndexReport> {
    segment_mean_index(&path.segment(a, b)?, &RhoOptions::default())
}

/// Conley–Zehnder index of a path with nondegenerate endpoint.
///
/// The path is extended through nondegenerate matrices to a normal form in
/// which every elliptic eigenvalue has been rotated to −1 (hyperbolic blocks
/// do not move ρ). Along the extension ρ changes by `(2p − m)(π − θ)` for each
/// elliptic cluster `e^{iθ}`, `θ ∈ (0, π)`, of multiplicity `m` with `p`
/// positive Krein directions, so the index is that phase added to `Δ(Ψ)`.
pub fn cz_index(path: &SymplecticPath) -> Result<IndexReport> {
    cz_index_with(path, &RhoOptions::default())
}

pub fn cz_index_with(path: &SymplecticPath, opts: &RhoOptions) -> Result<IndexReport> {
    let end = path.endpoint();
    check_nondegenerate(end, opts)?;
    let cls = classify_spectrum_with(end, opts)?;
    let delta = mean_index_with(path, opts)?;
    let mut extension = 0.0;
    for e in &cls.krein_table {
        let theta = e.eigenvalue.arg();
        let weight = 2.0 * e.m_plus as f64 - e.multiplicity as f64;
        extension += weight * (PI - theta) / PI;
    }
    let x = delta.value() + extension;
    let mu = x.round();
    let residual = (x - mu).abs();
    if residual > 1e-3 {
        return Err(Error::IllConditioned {
            eigenvalue: "endpoint spectrum".into(),
            detail: format!("extended phase {x} is not integral (residual {residual:.3e})"),
        });
    }
    Ok(IndexReport {
        value: IndexValue::Integer(mu as i64),
        max_phase_step: delta.max_phase_step,
        refinement_depth: delta.refinement_depth,
        oracle_residual: Some(residual),
    })
}

/// Reject endpoints with an eigenvalue near 1.
pub fn check_nondegenerate(end: &Mat, opts: &RhoOptions) -> Result<()> {
    let tol = opts.circle_tolerance.max(opts.unit_snap);
    for z in crate::linalg::eigenvalues(end).ok_or(Error::EigenSolver)?.iter() {
        if (z - Complex64::new(1.0, 0.0)).norm() <= tol {
            return Err(Error::DegenerateEndpoint {
                eigenvalue: crate::rho::format_complex(*z),
                tolerance: tol,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub mean_index: IndexReport,
    pub cz_index: IndexReport,
    pub half_dim: usize,
    pub gap: f64,
    pub pass: bool,
}

/// `|Δ(Ψ) − μCZ(Ψ)| < n`.
pub fn check_index_gap(path: &SymplecticPath) -> Result<GapReport> {
    let cz = cz_index(path)?;
    let mean = mean_index(path)?;
    let gap = (mean.value() - cz.value()).abs();
    Ok(GapReport {
        half_dim: path.half_dim,
        pass: gap < path.half_dim as f64,
        gap,
        mean_index: mean,
        cz_index: cz,
    })
}

/// `Δρ − n ≤ cz ≤ Δρ + (n − k)`.
pub fn cz_window(delta_rho: f64, cz: i64, n: usize, k: usize) -> bool {
    let cz = cz as f64;
    delta_rho - n as f64 <= cz && cz <= delta_rho + (n - k.min(n)) as f64
}

/// Data of a sphere `A` used to change a capping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecapData {
    pub c1_pairing: i64,
    pub omega_pairing: f64,
}

pub fn recap_mean_index(delta: f64, recap: RecapData) -> f64 {
    delta - 2.0 * recap.c1_pairing as f64
}

pub fn recap_action(action: f64, recap: RecapData) -> f64 {
    action - recap.omega_pairing
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rho::rotation;

    fn rotation_path(theta: f64) -> SymplecticPath {
        let gen: PathGenerator = Arc::new(move |t| rotation(1, 2.0 * PI * theta * t));
        SymplecticPath::from_generator(1, 64, gen, 1e-9).unwrap()
    }

    #[test]
    fn identity_path_has_zero_index() {
        let p = SymplecticPath::new(2, vec![0.0, 1.0], vec![Mat::identity(4, 4); 2], 1e-9).unwrap();
        assert_eq!(mean_index(&p).unwrap().value(), 0.0);
        assert!(matches!(cz_index(&p), Err(Error::DegenerateEndpoint { .. })));
        assert!(matches!(check_index_gap(&p), Err(Error::DegenerateEndpoint { .. })));
    }

    #[test]
    fn full_turn_has_index_two() {
        let d = mean_index(&rotation_path(1.0)).unwrap();
        assert!((d.value() - 2.0).abs() < 1e-12);
        assert!(d.max_phase_step < PHASE_STEP_BOUND);
    }

    #[test]
    fn planar_cz_closed_form() {
        for &theta in &[0.25, 0.5, 1.3, 2.7] {
            let r = cz_index(&rotation_path(theta)).unwrap();
            let expected = 2 * theta.floor() as i64 + 1;
            assert_eq!(r.value, IndexValue::Integer(expected), "theta = {theta}");
        }
    }

    #[test]
    fn gap_examples() {
        let g = check_index_gap(&rotation_path(0.5)).unwrap();
        assert!(g.pass && g.gap < 1e-12);
        let g = check_index_gap(&rotation_path(1.3)).unwrap();
        assert!(g.pass && (g.gap - 0.4).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_path() {
        let gen: PathGenerator =
            Arc::new(|t| Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![t.exp(), (-t).exp()])));
        let p = SymplecticPath::from_generator(1, 16, gen, 1e-9).unwrap();
        assert_eq!(mean_index(&p).unwrap().value(), 0.0);
        assert_eq!(cz_index(&p).unwrap().value, IndexValue::Integer(0));
    }

    #[test]
    fn raw_paths_refuse_to_guess() {
        let frames = vec![Mat::identity(2, 2), rotation(1, 2.0), rotation(1, 4.0)];
        let p = SymplecticPath::new(1, vec![0.0, 0.5, 1.0], frames, 1e-9).unwrap();
        assert!(matches!(mean_index(&p), Err(Error::RefinementExhausted { .. })));
    }

    #[test]
    fn generator_refinement_recovers() {
        let gen: PathGenerator = Arc::new(|t| rotation(1, 3.0 * PI * t));
        let p = SymplecticPath::from_generator(1, 5, gen, 1e-9).unwrap();
        let r = mean_index(&p).unwrap();
        assert!((r.value() - 3.0).abs() < 1e-12, "{r:?}");
        assert!(r.refinement_depth > 0);
    }

    #[test]
    fn restriction_is_additive() {
        let p = rotation_path(1.3);
        let a = restricted_mean_index(&p, 0.0, 0.37).unwrap().value();
        let b = restricted_mean_index(&p, 0.37, 1.0).unwrap().value();
        assert!((a + b - 2.6).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        let f = vec![Mat::identity(2, 2); 3];
        let e = SymplecticPath::new(1, vec![0.0, 0.6, 0.5], f.clone(), 1e-9).unwrap_err();
        assert_eq!(e, Error::Document("times not strictly increasing at index 2".into()));
        let mut g = f;
        g[1][(0, 0)] = 2.0;
        let e = SymplecticPath::new(1, vec![0.0, 0.5, 1.0], g, 1e-9).unwrap_err();
        assert!(format!("{e}").contains("frame 1 is not symplectic"));
    }

    #[test]
    fn window_and_recap_arithmetic() {
        assert!(cz_window(12.0, 10, 3, 1));
        assert!(!cz_window(12.0, 8, 3, 1));
        assert!(cz_window(0.0, 0, 2, 2));
        let r = |c1| RecapData {
            c1_pairing: c1,
            omega_pairing: 0.0,
        };
        assert_eq!(recap_mean_index(12.0, r(0)), 12.0);
        assert_eq!(recap_mean_index(12.0, r(3)), 6.0);
        assert_eq!(recap_mean_index(0.0, r(-1)), 2.0);
        let w = |o| RecapData {
            c1_pairing: 0,
            omega_pairing: o,
        };
        assert_eq!(recap_action(1.5, w(0.0)), 1.5);
        assert_eq!(recap_action(1.5, w(2.0 * PI)), 1.5 - 2.0 * PI);
        assert_eq!(recap_action(0.0, w(-0.25)), 0.25);
    }
}
