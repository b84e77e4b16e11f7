//! Analytically known symplectic paths: linear Hamiltonian flows, ellipsoid
//! orbits, and flat leafwise-geodesic models.

use crate::error::{Error, Result};
use crate::indices::{mean_index, IndexReport, PathGenerator, SymplecticPath};
use crate::linalg::{j_matrix, max_abs, orth_complement, Mat};
use crate::maslov::{CoisotropicLoop, HolonomyPath};
use crate::sympcore::{
    adapted_frames, resymplectify, symplectic_inverse, symplectic_residual, FrameLayout, Subspace, Tolerances,
};
use nalgebra::DVector;
use std::f64::consts::PI;
use std::sync::Arc;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [f64; 5] = [
    1.495585217958292e-2,
    2.53939833006323e-1,
    9.504178996162932e-1,
    2.097847961257068,
    5.371920351148152,
];

fn one_norm(a: &Mat) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_low(a: &Mat, b: &[f64]) -> (Mat, Mat) {
    let n = a.nrows();
    let a2 = a * a;
    let mut u = Mat::zeros(n, n);
    let mut v = Mat::zeros(n, n);
    let mut pow = Mat::identity(n, n);
    for k in (0..b.len()).step_by(2) {
        v += &pow * b[k];
        if k + 1 < b.len() {
            u += &pow * b[k + 1];
        }
        pow = &pow * &a2;
    }
    (a * u, v)
}

fn pade13(a: &Mat) -> (Mat, Mat) {
    let n = a.nrows();
    let b = &PADE13;
    let id = Mat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    (u, v)
}

/// Matrix exponential by scaling and squaring with a Padé approximant whose
/// order is chosen from the 1-norm.
pub fn expm(a: &Mat) -> Mat {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let (u, v, s) = if norm <= THETA[0] {
        let (u, v) = pade_low(a, &PADE3);
        (u, v, 0)
    } else if norm <= THETA[1] {
        let (u, v) = pade_low(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA[2] {
        let (u, v) = pade_low(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA[3] {
        let (u, v) = pade_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = (norm / THETA[4]).log2().ceil().max(0.0) as i32;
        let scaled = a / 2f64.powi(s);
        let (u, v) = pade13(&scaled);
        (u, v, s)
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `H(z) = ½ zᵀ S z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    half_dim: usize,
    s: Mat,
}

impl QuadraticHamiltonian {
    pub fn new(s: Mat) -> Result<Self> {
        if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) || s.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Hessian must be square of even size, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        let asym = max_abs(&(&s - s.transpose()));
        if asym > 1e-12 {
            return Err(Error::Invalid(format!("Hessian is not symmetric (defect {asym:e})")));
        }
        Ok(QuadraticHamiltonian {
            half_dim: s.nrows() / 2,
            s,
        })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn hessian(&self) -> &Mat {
        &self.s
    }

    /// `X_H = J₀ᵀ S`, i.e. `ẋ = ∂H/∂y`, `ẏ = −∂H/∂x`.
    pub fn vector_field(&self) -> Mat {
        j_matrix(self.half_dim).transpose() * &self.s
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.s * z))
    }
}

/// `exp(M)` for a Hamiltonian `M`, re-symplectified only when the residual
/// exceeds 1e-9.
pub fn symplectic_exp(m: &Mat) -> Mat {
    let e = expm(m);
    let residual = symplectic_residual(&e);
    if residual > 1e-9 {
        log::warn!("exponential drifted off Sp(2n) (residual {residual:e}); correcting");
        if let Some(c) = resymplectify(&e) {
            return c;
        }
    }
    e
}

/// `t ↦ exp(t · duration · J₀ᵀS)` on `[0, 1]`.
pub fn flow_generator(h: &QuadraticHamiltonian, duration: f64) -> PathGenerator {
    let a = h.vector_field() * duration;
    Arc::new(move |t: f64| symplectic_exp(&(&a * t)))
}

pub fn linearized_flow(h: &QuadraticHamiltonian, duration: f64, samples: usize) -> Result<SymplecticPath> {
    if !duration.is_finite() {
        return Err(Error::Invalid("duration must be finite".into()));
    }
    SymplecticPath::from_generator(h.half_dim, samples, flow_generator(h, duration), 1e-9)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidSpec {
    pub lambdas: Vec<f64>,
    /// 1-based.
    pub orbit_index: usize,
}

impl EllipsoidSpec {
    pub fn new(lambdas: Vec<f64>, orbit_index: usize) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Invalid("at least one lambda is required".into()));
        }
        if lambdas.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::Invalid("all lambdas must be positive and finite".into()));
        }
        if orbit_index == 0 || orbit_index > lambdas.len() {
            return Err(Error::Invalid(format!(
                "orbit index {orbit_index} outside 1..={}",
                lambdas.len()
            )));
        }
        Ok(EllipsoidSpec { lambdas, orbit_index })
    }

    pub fn half_dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambdas[self.orbit_index - 1]
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.lambda()
    }

    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        let mut d = self.lambdas.clone();
        d.extend_from_slice(&self.lambdas);
        QuadraticHamiltonian::new(Mat::from_diagonal(&DVector::from_vec(d))).unwrap()
    }

    /// `(2/λ_j) Σ λ_l`.
    pub fn closed_form_index(&self) -> f64 {
        2.0 * self.lambdas.iter().sum::<f64>() / self.lambda()
    }

    /// Starting point of `γ_j` on `H = 1`, with `|z_j|² = 2/λ_j`.
    pub fn initial_point(&self) -> DVector<f64> {
        let mut z = DVector::zeros(2 * self.half_dim());
        z[self.orbit_index - 1] = (2.0 / self.lambda()).sqrt();
        z
    }

    /// Area of the disc capping `γ_j`.
    pub fn capping_area(&self) -> f64 {
        PI * 2.0 / self.lambda()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidReport {
    pub mu_numeric: f64,
    pub mu_closed_form: f64,
    pub period: f64,
    pub mean_index: IndexReport,
}

/// Numeric `−Δ` of the linearized flow over one period of `γ_j`, next to the
/// closed form.
pub fn ellipsoid_orbit_index(spec: &EllipsoidSpec, samples: usize) -> Result<EllipsoidReport> {
    let path = ellipsoid_path(spec, samples, 1)?;
    let d = mean_index(&path)?;
    Ok(EllipsoidReport {
        mu_numeric: -d.value(),
        mu_closed_form: spec.closed_form_index(),
        period: spec.period(),
        mean_index: d,
    })
}

/// Linearized flow along `γ_j` traversed `periods` times.
pub fn ellipsoid_path(spec: &EllipsoidSpec, samples: usize, periods: usize) -> Result<SymplecticPath> {
    linearized_flow(&spec.hamiltonian(), spec.period() * periods as f64, samples)
}

/// Tangent spaces `C_t = (Sγ(t))^⊥` of the energy surface along `γ_j`, with
/// the holonomy induced by the linearized flow in the adapted frames.
pub fn ellipsoid_tangent_loop(
    spec: &EllipsoidSpec,
    samples: usize,
) -> Result<(SymplecticPath, CoisotropicLoop, HolonomyPath)> {
    let path = ellipsoid_path(spec, samples, 1)?;
    let n = spec.half_dim();
    let h = spec.hamiltonian();
    let z0 = spec.initial_point();
    let mut subspaces = Vec::with_capacity(samples);
    for f in path.frames() {
        let grad = h.hessian() * (f * &z0);
        let unit = &grad / grad.norm();
        let normal = Mat::from_column_slice(2 * n, 1, unit.as_slice());
        subspaces.push(Subspace::new(n, orth_complement(&normal), 1e-9)?);
    }
    // The flow returns exactly to γ(0); pin the closing sample to avoid drift.
    let last = subspaces.len() - 1;
    subspaces[last] = subspaces[0].clone();
    let tol = Tolerances::default();
    let lp = CoisotropicLoop::new(n, 1, path.times().to_vec(), subspaces, None, tol)?;
    let hol = holonomy_from_flow(&lp, path.frames())?;
    Ok((path, lp, hol))
}

/// `h_t = qblock(F_t⁻¹ Ψ_t F₀)` for a flow that carries `C₀` to `C_t`.
pub fn holonomy_from_flow(lp: &CoisotropicLoop, flow: &[Mat]) -> Result<HolonomyPath> {
    let frames = adapted_frames(lp.subspaces(), lp.codim(), lp.tolerances())?;
    let layout = FrameLayout {
        half_dim: lp.half_dim(),
        codim: lp.codim(),
    };
    let f0 = &frames[0];
    let maps: Vec<Mat> = frames
        .iter()
        .zip(flow)
        .map(|(f, psi)| layout.quotient_block(&(symplectic_inverse(f) * psi * f0)))
        .collect();
    let maps = pin_identity(maps);
    HolonomyPath::new(layout.quotient_half_dim(), lp.times().to_vec(), maps, 1e-8)
}

fn pin_identity(mut maps: Vec<Mat>) -> Vec<Mat> {
    if let Some(m) = maps.first_mut() {
        let d = m.nrows();
        *m = Mat::identity(d, d);
    }
    maps
}

/// Rational number `num/den` in lowest terms with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        let s = den.signum();
        Ok(Rational {
            num: s * num / g,
            den: s * den / g,
        })
    }

    /// Parse `7`, `3/4`, or a finite decimal such as `0.125`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Invalid(format!("'{s}' is not a rational number"));
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            return Rational::new(a, b);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 12 {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let int_abs = int.trim_start_matches(['-', '+']);
            let int_val: i64 = if int_abs.is_empty() {
                0
            } else {
                int_abs.parse().map_err(|_| bad())?
            };
            let den = 10i64.pow(frac.len() as u32);
            let frac_val: i64 = frac.parse().map_err(|_| bad())?;
            let num = int_val * den + frac_val;
            return Rational::new(if neg { -num } else { num }, den);
        }
        let a: i64 = s.parse().map_err(|_| bad())?;
        Rational::new(a, 1)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Flat model `T^k × ℝ^{2m} × ℝ^k` with coordinates `(q, a | p, b)`.
///
/// The Hamiltonian is `ρ = ½ pᵀ G⁻¹ p + ½ (a, b)ᵀ K (a, b)` with metric
/// `G = I + ε E`. The orbit through `(a, b) = 0` moves along the torus with
/// velocity `w = G⁻¹p`; rational `w` makes it close.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatModelSpec {
    pub codim: usize,
    pub velocity: Vec<Rational>,
    /// Dimension `m` of the quotient factor ℝ^{2m}.
    pub quotient_half_dim: usize,
    /// Symmetric perturbation `εE` of the metric on the torus factor.
    pub metric_perturbation: Option<Mat>,
    /// Hessian `K` of the quotient part, `2m × 2m`.
    pub quotient_hessian: Option<Mat>,
    /// Declared radius `r` of the model neighbourhood.
    pub radius: f64,
}

impl FlatModelSpec {
    pub fn new(codim: usize, velocity: Vec<Rational>) -> Self {
        FlatModelSpec {
            codim,
            velocity,
            quotient_half_dim: 0,
            metric_perturbation: None,
            quotient_hessian: None,
            radius: 10.0,
        }
    }

    pub fn half_dim(&self) -> usize {
        self.codim + self.quotient_half_dim
    }

    pub fn metric(&self) -> Mat {
        let k = self.codim;
        let mut g = Mat::identity(k, k);
        if let Some(e) = &self.metric_perturbation {
            g += e;
        }
        g
    }

    /// Smallest `T > 0` with `T w ∈ ℤ^k`.
    pub fn period(&self) -> Result<f64> {
        let l = self.velocity.iter().fold(1i64, |acc, r| acc / gcd(acc, r.den) * r.den);
        let g = self.velocity.iter().map(|r| r.num * (l / r.den)).fold(0i64, gcd);
        if g == 0 {
            return Err(Error::Invalid("zero leaf velocity: the orbit does not close".into()));
        }
        Ok(l as f64 / g as f64)
    }

    fn validate(&self) -> Result<()> {
        let k = self.codim;
        if k == 0 {
            return Err(Error::Invalid("codim must be at least 1".into()));
        }
        if self.velocity.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "velocity has {} components for codim {k}",
                self.velocity.len()
            )));
        }
        if let Some(e) = &self.metric_perturbation {
            if e.nrows() != k || e.ncols() != k || max_abs(&(e - e.transpose())) > 1e-12 {
                return Err(Error::Invalid("metric perturbation must be symmetric k x k".into()));
            }
        }
        let g = self.metric();
        if g.clone().symmetric_eigen().eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::Invalid("perturbed metric is not positive definite".into()));
        }
        if let Some(kh) = &self.quotient_hessian {
            let m = self.quotient_half_dim;
            if kh.nrows() != 2 * m || kh.ncols() != 2 * m || max_abs(&(kh - kh.transpose())) > 1e-12 {
                return Err(Error::Invalid("quotient Hessian must be symmetric 2m x 2m".into()));
            }
        }
        let p = self.momentum();
        if p.norm() >= self.radius {
            return Err(Error::Invalid(format!(
                "|p| = {} is not below the model radius {}",
                p.norm(),
                self.radius
            )));
        }
        Ok(())
    }

    /// `p = G w`.
    pub fn momentum(&self) -> DVector<f64> {
        let w = DVector::from_iterator(self.codim, self.velocity.iter().map(|r| r.to_f64()));
        self.metric() * w
    }

    /// Hessian of ρ in the coordinates `(q, a | p, b)`.
    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        let (k, m) = (self.codim, self.quotient_half_dim);
        let n = k + m;
        let mut s = Mat::zeros(2 * n, 2 * n);
        let ginv = self.metric().try_inverse().expect("metric is positive definite");
        s.view_mut((n, n), (k, k)).copy_from(&ginv);
        if let Some(kh) = &self.quotient_hessian {
            // map the (a, b) block, ordered [a | b], into (x_Q, y_Q) slots
            let idx: Vec<usize> = (k..n).chain(n + k..2 * n).collect();
            for (r, &ir) in idx.iter().enumerate() {
                for (c, &ic) in idx.iter().enumerate() {
                    s[(ir, ic)] = kh[(r, c)];
                }
            }
        }
        QuadraticHamiltonian::new(s).expect("assembled Hessian is symmetric")
    }
}

/// Linearized leafwise flow, the constant coisotropic loop `TM = {δp = 0}`
/// along the projected orbit, and its holonomy.
pub fn flat_leafwise_geodesic_path(
    spec: &FlatModelSpec,
    samples: usize,
) -> Result<(SymplecticPath, CoisotropicLoop, HolonomyPath)> {
    spec.validate()?;
    let period = spec.period()?;
    let path = linearized_flow(&spec.hamiltonian(), period, samples)?;
    let n = spec.half_dim();
    let c = Subspace::coordinate_coisotropic(n, spec.codim);
    let subspaces = vec![c; path.times().len()];
    let lp = CoisotropicLoop::new(
        n,
        spec.codim,
        path.times().to_vec(),
        subspaces,
        Some(true),
        Tolerances::default(),
    )?;
    let hol = holonomy_from_flow(&lp, path.frames())?;
    Ok((path, lp, hol))
}

/// Data entering `𝒜_H(x̄) = −∫_u ω + ∫ H_t(x(t)) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedOrbitData {
    pub capping_area: f64,
    pub hamiltonian_integral: f64,
}

pub fn action_functional(data: CappedOrbitData) -> f64 {
    -data.capping_area + data.hamiltonian_integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maslov::maslov_index;

    fn reference_exp(a: &Mat) -> Mat {
        a.clone().exp()
    }

    #[test]
    fn expm_agrees_with_nalgebra() {
        let mut rng = crate::random::SeededRng::new(5, 0);
        for &scale in &[1e-3, 0.1, 0.5, 1.0, 3.0, 20.0] {
            for n in 1..4 {
                let a = crate::random::hamiltonian_matrix(&mut rng, n, scale);
                let ours = expm(&a);
                let theirs = reference_exp(&a);
                let rel = max_abs(&(&ours - &theirs)) / max_abs(&theirs).max(1.0);
                assert!(rel < 1e-11, "scale {scale} n {n}: {rel:e}");
                assert!(symplectic_residual(&ours) / max_abs(&ours).powi(2) < 1e-11);
            }
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let a = j_matrix(1) * 1.2;
        let e = expm(&a);
        let r = crate::rho::rotation(1, 1.2);
        assert!(max_abs(&(e - r)) < 1e-14);
    }

    #[test]
    fn flow_examples() {
        let zero = QuadraticHamiltonian::new(Mat::zeros(2, 2)).unwrap();
        let p = linearized_flow(&zero, 1.0, 8).unwrap();
        assert!(p.frames().iter().all(|f| f == &Mat::identity(2, 2)));
        let osc = QuadraticHamiltonian::new(Mat::identity(2, 2)).unwrap();
        let d = mean_index(&linearized_flow(&osc, 2.0 * PI, 64).unwrap()).unwrap();
        assert!((d.value() + 2.0).abs() < 1e-9);
        let hyp = QuadraticHamiltonian::new(Mat::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]))).unwrap();
        let d = mean_index(&linearized_flow(&hyp, 1.0, 16).unwrap()).unwrap();
        assert_eq!(d.value(), 0.0);
    }

    #[test]
    fn ellipsoid_closed_forms() {
        let s = EllipsoidSpec::new(vec![1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(s.closed_form_index(), 12.0);
        assert_eq!(
            EllipsoidSpec::new(vec![1.0, 2.0, 3.0], 2).unwrap().closed_form_index(),
            6.0
        );
        assert_eq!(
            EllipsoidSpec::new(vec![1.0, 2.0, 3.0], 3).unwrap().closed_form_index(),
            4.0
        );
        assert_eq!(EllipsoidSpec::new(vec![1.0, 1.0], 1).unwrap().closed_form_index(), 4.0);
        assert_eq!(EllipsoidSpec::new(vec![2.5; 3], 2).unwrap().closed_form_index(), 6.0);
        let r = ellipsoid_orbit_index(&s, 512).unwrap();
        assert!((r.mu_numeric - 12.0).abs() < 1e-6);
        assert!(EllipsoidSpec::new(vec![1.0, -1.0], 1).is_err());
        assert!(EllipsoidSpec::new(vec![1.0], 2).is_err());
    }

    #[test]
    fn ellipsoid_loop_route_matches() {
        let s = EllipsoidSpec::new(vec![1.0, 2.0, 3.0], 2).unwrap();
        let (_, lp, hol) = ellipsoid_tangent_loop(&s, 512).unwrap();
        let mu = maslov_index(&lp, &hol).unwrap();
        assert!((mu.value() - 6.0).abs() < 1e-6, "{mu:?}");
    }

    #[test]
    fn rational_parsing_and_periods() {
        assert_eq!(Rational::parse("3/4").unwrap(), Rational { num: 3, den: 4 });
        assert_eq!(Rational::parse("0.125").unwrap(), Rational { num: 1, den: 8 });
        assert_eq!(Rational::parse("-2").unwrap(), Rational { num: -2, den: 1 });
        assert!(Rational::parse("pi").is_err());
        let spec = FlatModelSpec::new(2, vec![Rational::parse("1").unwrap(), Rational::parse("1/2").unwrap()]);
        assert_eq!(spec.period().unwrap(), 2.0);
        let stopped = FlatModelSpec::new(1, vec![Rational::new(0, 1).unwrap()]);
        assert!(stopped.period().is_err());
    }

    #[test]
    fn unperturbed_flat_model_is_trivial() {
        let spec = FlatModelSpec::new(2, vec![Rational::new(1, 1).unwrap(), Rational::new(1, 1).unwrap()]);
        let (path, lp, hol) = flat_leafwise_geodesic_path(&spec, 64).unwrap();
        assert_eq!(mean_index(&path).unwrap().value(), 0.0);
        assert_eq!(maslov_index(&lp, &hol).unwrap().value(), 0.0);
    }

    #[test]
    fn action_examples() {
        let zero = CappedOrbitData {
            capping_area: 0.0,
            hamiltonian_integral: 0.0,
        };
        assert_eq!(action_functional(zero), 0.0);
        let s = EllipsoidSpec::new(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(s.capping_area(), PI);
    }
}
