//! Maslov index of loops of coisotropic subspaces with holonomy.
//!
//! A lift is a symplectic path `Ψ` with `Ψ₀ = I`, `Ψ_t(C₀) = C_t`, and
//! quotient action `H_t`; the index is `μ = −Δ(Ψ)`. Holonomy maps are
//! expressed in the adapted frames returned by
//! [`adapted_frames`](crate::sympcore::adapted_frames): `h_t` is the quotient
//! block of `F_t⁻¹ Ψ_t F₀`.

use crate::error::{Error, Result};
use crate::flows::expm;
use crate::indices::{check_times, mean_index, IndexReport, IndexValue, RecapData, SymplecticPath};
use crate::linalg::{j_matrix, max_abs, polar_orthonormalize, Mat};
use crate::random::SeededRng;
use crate::sympcore::{
    adapted_frames, renormalize_block, symplectic_complement, symplectic_inverse, symplectic_residual, FrameLayout,
    Subspace, Tolerances,
};
use std::str::FromStr;

/// A sampled loop `t ↦ C_t` of coisotropic subspaces of codimension `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoisotropicLoop {
    half_dim: usize,
    codim: usize,
    times: Vec<f64>,
    subspaces: Vec<Subspace>,
    oriented: bool,
    tol: Tolerances,
}

impl CoisotropicLoop {
    /// Validate the samples and detect orientability. A declared
    /// orientation that disagrees with the detected one is rejected.
    pub fn new(
        half_dim: usize,
        codim: usize,
        times: Vec<f64>,
        subspaces: Vec<Subspace>,
        declared_orientation: Option<bool>,
        tol: Tolerances,
    ) -> Result<Self> {
        if half_dim == 0 || codim > half_dim {
            return Err(Error::Invalid(format!("codim {codim} is not in 0..={half_dim}")));
        }
        check_times(&times)?;
        if subspaces.len() != times.len() {
            return Err(Error::Document(format!(
                "{} subspaces for {} times",
                subspaces.len(),
                times.len()
            )));
        }
        let dim = 2 * half_dim - codim;
        for (i, c) in subspaces.iter().enumerate() {
            if c.half_dim() != half_dim || c.dim() != dim {
                return Err(Error::Document(format!(
                    "subspace {i} has dimension {} in R^{}, expected {dim} in R^{}",
                    c.dim(),
                    2 * c.half_dim(),
                    2 * half_dim
                )));
            }
            let residual = symplectic_complement(c)?.containment_residual(c);
            if residual > tol.subspace {
                return Err(Error::Document(format!(
                    "subspace {i} is not coisotropic: complement leaves it by {residual:e}"
                )));
            }
        }
        let last = subspaces.len() - 1;
        let closing = subspaces[last].containment_residual(&subspaces[0]);
        if closing > tol.subspace {
            return Err(Error::Document(format!(
                "loop does not close: last subspace differs from the first by {closing:e}"
            )));
        }
        for i in 1..subspaces.len() {
            let step = subspaces[i].containment_residual(&subspaces[i - 1]);
            if step > tol.continuity_gauge {
                return Err(Error::RefinementRequired {
                    index: i,
                    detail: format!("principal-angle sine {step:.3} exceeds the continuity gauge"),
                });
            }
        }
        let oriented = detect_orientation(&subspaces)?;
        if let Some(d) = declared_orientation {
            if d != oriented {
                return Err(Error::Document(format!(
                    "declared oriented = {d} but the transported orientation returns {}",
                    if oriented { "unchanged" } else { "reversed" }
                )));
            }
        }
        Ok(CoisotropicLoop {
            half_dim,
            codim,
            times,
            subspaces,
            oriented,
            tol,
        })
    }

    /// The loop `t ↦ C₀` on `samples` uniform points.
    pub fn constant(c: Subspace, codim: usize, samples: usize) -> Result<Self> {
        let samples = samples.max(2);
        let times = uniform_times(samples);
        let n = c.half_dim();
        CoisotropicLoop::new(n, codim, times, vec![c; samples], None, Tolerances::default())
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn quotient_half_dim(&self) -> usize {
        self.half_dim - self.codim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn oriented(&self) -> bool {
        self.oriented
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn layout(&self) -> FrameLayout {
        FrameLayout {
            half_dim: self.half_dim,
            codim: self.codim,
        }
    }
}

pub fn uniform_times(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| {
            if i + 1 == samples {
                1.0
            } else {
                i as f64 / (samples - 1) as f64
            }
        })
        .collect()
}

/// Transport an orthonormal basis of `C_t` around the loop and compare
/// orientations at the ends.
pub fn detect_orientation(subspaces: &[Subspace]) -> Result<bool> {
    let b0 = subspaces[0].orthonormal().clone();
    if b0.ncols() == 0 {
        return Ok(true);
    }
    let mut b = b0.clone();
    for (i, c) in subspaces.iter().enumerate().skip(1) {
        let q = c.orthonormal();
        let projected = q * (q.transpose() * &b);
        b = renormalize_block(&projected, i)?;
    }
    let det = (b0.transpose() * b).determinant();
    Ok(det > 0.0)
}

/// Quotient holonomy `h_t` in adapted-frame coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyPath {
    quotient_half_dim: usize,
    times: Vec<f64>,
    maps: Vec<Mat>,
}

impl HolonomyPath {
    pub fn new(quotient_half_dim: usize, times: Vec<f64>, maps: Vec<Mat>, tol: f64) -> Result<Self> {
        check_times(&times)?;
        if maps.len() != times.len() {
            return Err(Error::Document(format!(
                "{} holonomy maps for {} times",
                maps.len(),
                times.len()
            )));
        }
        let d = 2 * quotient_half_dim;
        for (i, h) in maps.iter().enumerate() {
            if h.nrows() != d || h.ncols() != d {
                return Err(Error::Document(format!(
                    "holonomy map {i} is {}x{}, expected {d}x{d}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            if h.iter().any(|x| !x.is_finite()) {
                return Err(Error::Document(format!("holonomy map {i} has non-finite entries")));
            }
            let residual = symplectic_residual(h);
            if residual > tol {
                return Err(Error::Document(format!(
                    "holonomy map {i} does not preserve the quotient form: residual {residual:e}"
                )));
            }
        }
        let id_err = max_abs(&(&maps[0] - Mat::identity(d, d)));
        if id_err > 1e-12 {
            return Err(Error::Document(format!(
                "holonomy map 0 differs from the identity by {id_err:e}"
            )));
        }
        Ok(HolonomyPath {
            quotient_half_dim,
            times,
            maps,
        })
    }

    pub fn identity(quotient_half_dim: usize, times: Vec<f64>) -> Result<Self> {
        let d = 2 * quotient_half_dim;
        let maps = vec![Mat::identity(d, d); times.len()];
        HolonomyPath::new(quotient_half_dim, times, maps, 0.0)
    }

    pub fn quotient_half_dim(&self) -> usize {
        self.quotient_half_dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn maps(&self) -> &[Mat] {
        &self.maps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftStrategy {
    /// `Ψ_t = F_t (I ⊕ h_t) F₀⁻¹` in the canonically transported frames.
    BlockAssembly,
    /// A separately transported frame with its own transversal and a
    /// stabilizer gauge twist, corrected on the quotient block only.
    FrameTransport,
}

impl FromStr for LiftStrategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "block-assembly" => Ok(LiftStrategy::BlockAssembly),
            "frame-transport" => Ok(LiftStrategy::FrameTransport),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

fn check_pair(lp: &CoisotropicLoop, hol: &HolonomyPath) -> Result<()> {
    if lp.times != hol.times {
        return Err(Error::Invalid("loop and holonomy use different time grids".into()));
    }
    if hol.quotient_half_dim != lp.quotient_half_dim() {
        return Err(Error::DimensionMismatch(format!(
            "holonomy acts on a {}-dimensional quotient, loop quotient has dimension {}",
            2 * hol.quotient_half_dim,
            2 * lp.quotient_half_dim()
        )));
    }
    Ok(())
}

/// A path satisfying the lift constraints for `(loop, holonomy)`.
pub fn build_lift(lp: &CoisotropicLoop, hol: &HolonomyPath, strategy: LiftStrategy) -> Result<SymplecticPath> {
    check_pair(lp, hol)?;
    let frames = adapted_frames(&lp.subspaces, lp.codim, &lp.tol)?;
    let layout = lp.layout();
    let n = lp.half_dim;
    let psi: Vec<Mat> = match strategy {
        LiftStrategy::BlockAssembly => {
            let f0_inv = symplectic_inverse(&frames[0]);
            frames
                .iter()
                .zip(&hol.maps)
                .map(|(f, h)| f * layout.embed_quotient(h) * &f0_inv)
                .collect()
        }
        LiftStrategy::FrameTransport => {
            let e = transversal_frames(lp)?;
            let x = gauge_generator(layout);
            let e0_inv = symplectic_inverse(&e[0]);
            e.iter()
                .zip(&frames)
                .zip(&hol.maps)
                .zip(&lp.times)
                .map(|(((e, f), h), &t)| {
                    let twisted = e * expm(&(&x * t));
                    let kappa = layout.quotient_block(&(symplectic_inverse(f) * &twisted));
                    let corrected = symplectic_inverse(&kappa) * h;
                    &twisted * layout.embed_quotient(&corrected) * &e0_inv
                })
                .collect()
        }
    };
    let mut psi = psi;
    psi[0] = Mat::identity(2 * n, 2 * n);
    SymplecticPath::new(n, lp.times.clone(), psi, 1e-8)
}

/// Frames adapted to each `C_t` whose transversal starts away from
/// `J₀·C^ω` and is carried along in canonical-frame coordinates, then
/// corrected to be Lagrangian, ω-orthogonal to the quotient, and dual to
/// `C_t^ω`.
fn transversal_frames(lp: &CoisotropicLoop) -> Result<Vec<Mat>> {
    let n = lp.half_dim;
    let k = lp.codim;
    let layout = lp.layout();
    let canonical = adapted_frames(&lp.subspaces, k, &lp.tol)?;
    let j = j_matrix(n);
    let m = n - k;

    let mut rng = SeededRng::new(0x7472_616e_7376, (n * 16 + k) as u64);
    let mut seed = Mat::zeros(2 * n, k);
    for r in 0..2 * n {
        for c in 0..k {
            // only the x-slots: a shift along C^ω and the quotient x-reps
            if r < n {
                seed[(r, c)] = 0.3 * rng.normal();
            }
        }
    }
    let mut out = Vec::with_capacity(canonical.len());
    let mut coords = seed;
    for (i, f) in canonical.iter().enumerate() {
        let chr = layout.characteristic(f);
        let qx = layout.quotient_reps(f).columns(0, m).into_owned();
        let qy = layout.quotient_reps(f).columns(m, m).into_owned();
        let jchr = layout.transversal(f);
        let mut t = &jchr + f * &coords;
        let a = t.transpose() * &j * &qy;
        let b = t.transpose() * &j * &qx;
        t = &t + &qx * a.transpose() - &qy * b.transpose();
        let pairing = -(chr.transpose() * &j * &t);
        let pinv = pairing.try_inverse().ok_or_else(|| Error::RefinementRequired {
            index: i,
            detail: "transversal lost duality with the characteristic".into(),
        })?;
        t *= pinv;
        let s = t.transpose() * &j * &t;
        t = &t - &chr * (s * 0.5);
        coords = symplectic_inverse(f) * (&t - &jchr);
        out.push(layout.assemble(&chr, &t, &qx, &qy));
    }
    Ok(out)
}

/// Fixed Hamiltonian generator in frame coordinates that preserves the
/// coordinate coisotropic and acts trivially on its quotient.
fn gauge_generator(layout: FrameLayout) -> Mat {
    let (n, k) = (layout.half_dim, layout.codim);
    let mut rng = SeededRng::new(0x6761_7567_6520, (n * 16 + k) as u64);
    let mut s = Mat::zeros(2 * n, 2 * n);
    let scale = 0.3;
    // S_xy[V, V] and S_xy[Q, V]
    for r in 0..n {
        for c in 0..k {
            let v = scale * rng.normal();
            s[(r, n + c)] = v;
            s[(n + c, r)] = v;
        }
    }
    // S_yy[V, V] and S_yy[V, Q]
    for r in 0..k {
        for c in r..n {
            let v = scale * rng.normal();
            s[(n + r, n + c)] = v;
            s[(n + c, n + r)] = v;
        }
    }
    j_matrix(n).transpose() * s
}

/// `(max span residual, max quotient residual)` of a lift over all samples.
pub fn lift_residuals(lp: &CoisotropicLoop, hol: &HolonomyPath, lift: &SymplecticPath) -> Result<(f64, f64)> {
    let frames = adapted_frames(&lp.subspaces, lp.codim, &lp.tol)?;
    let layout = lp.layout();
    let c0 = lp.subspaces[0].orthonormal();
    let mut span = 0.0f64;
    let mut quot = 0.0f64;
    for (i, psi) in lift.frames().iter().enumerate() {
        let image = polar_orthonormalize(&(psi * c0));
        span = span.max(crate::linalg::containment_residual(
            &image,
            lp.subspaces[i].orthonormal(),
        ));
        let h = layout.quotient_block(&(symplectic_inverse(&frames[i]) * psi * &frames[0]));
        quot = quot.max(max_abs(&(h - &hol.maps[i])));
    }
    Ok((span, quot))
}

pub fn maslov_index(lp: &CoisotropicLoop, hol: &HolonomyPath) -> Result<IndexReport> {
    maslov_index_with(lp, hol, LiftStrategy::BlockAssembly)
}

/// `μ = −Δ(Ψ)`; non-orientable loops are traversed twice and halved.
pub fn maslov_index_with(lp: &CoisotropicLoop, hol: &HolonomyPath, strategy: LiftStrategy) -> Result<IndexReport> {
    if lp.oriented {
        let d = mean_index(&build_lift(lp, hol, strategy)?)?;
        Ok(negated(d, 1.0))
    } else {
        via_double_cover(lp, hol, strategy)
    }
}

/// `−Δ` of the lift over the doubled loop, halved.
pub fn via_double_cover(lp: &CoisotropicLoop, hol: &HolonomyPath, strategy: LiftStrategy) -> Result<IndexReport> {
    let (l2, h2) = homogeneity_cover(lp, hol, 2)?;
    let d = mean_index(&build_lift(&l2, &h2, strategy)?)?;
    Ok(negated(d, 0.5))
}

fn negated(d: IndexReport, factor: f64) -> IndexReport {
    IndexReport {
        value: IndexValue::Real(-d.value() * factor),
        ..d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellDefinedness {
    pub block_assembly: f64,
    pub frame_transport: f64,
    pub difference: f64,
}

pub fn well_definedness_check(lp: &CoisotropicLoop, hol: &HolonomyPath) -> Result<WellDefinedness> {
    let a = maslov_index_with(lp, hol, LiftStrategy::BlockAssembly)?.value();
    let b = maslov_index_with(lp, hol, LiftStrategy::FrameTransport)?.value();
    Ok(WellDefinedness {
        block_assembly: a,
        frame_transport: b,
        difference: (a - b).abs(),
    })
}

pub fn recap_maslov(mu: f64, recap: RecapData) -> f64 {
    mu + 2.0 * recap.c1_pairing as f64
}

/// The loop traversed `k_fold` times, with holonomy composed across periods.
pub fn homogeneity_cover(
    lp: &CoisotropicLoop,
    hol: &HolonomyPath,
    k_fold: usize,
) -> Result<(CoisotropicLoop, HolonomyPath)> {
    check_pair(lp, hol)?;
    if k_fold == 0 {
        return Err(Error::Invalid("k_fold must be positive".into()));
    }
    if k_fold == 1 {
        return Ok((lp.clone(), hol.clone()));
    }
    let m = lp.times.len() - 1;
    let kf = k_fold as f64;
    let mut times = Vec::with_capacity(k_fold * m + 1);
    let mut subspaces = Vec::with_capacity(k_fold * m + 1);
    for r in 0..k_fold {
        let start = if r == 0 { 0 } else { 1 };
        for i in start..=m {
            times.push(if r + 1 == k_fold && i == m {
                1.0
            } else {
                (r as f64 + lp.times[i]) / kf
            });
            subspaces.push(lp.subspaces[i].clone());
        }
    }
    let covered = CoisotropicLoop::new(lp.half_dim, lp.codim, times, subspaces, None, lp.tol)?;

    let layout = lp.layout();
    let base = adapted_frames(&lp.subspaces, lp.codim, &lp.tol)?;
    let cover = adapted_frames(&covered.subspaces, lp.codim, &lp.tol)?;
    let kappa = layout.quotient_block(&(symplectic_inverse(&base[0]) * &base[m]));
    let period_map = kappa * &hol.maps[m];
    let d = 2 * lp.quotient_half_dim();
    let mut maps = Vec::with_capacity(covered.times.len());
    let mut power = Mat::identity(d, d);
    for r in 0..k_fold {
        let start = if r == 0 { 0 } else { 1 };
        for (i, (b, h)) in base.iter().zip(&hol.maps).enumerate().take(m + 1).skip(start) {
            let change = layout.quotient_block(&(symplectic_inverse(&cover[r * m + i]) * b));
            maps.push(change * h * &power);
        }
        power = &power * &period_map;
    }
    maps[0] = Mat::identity(d, d);
    let h = HolonomyPath::new(lp.quotient_half_dim(), covered.times.clone(), maps, 1e-7)?;
    Ok((covered, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rho::rotation;
    use std::f64::consts::PI;

    fn rotation_holonomy(m: usize, turns: f64, samples: usize) -> HolonomyPath {
        let times = uniform_times(samples);
        let maps = times.iter().map(|&t| rotation(m, 2.0 * PI * turns * t)).collect();
        HolonomyPath::new(m, times, maps, 1e-10).unwrap()
    }

    #[test]
    fn constant_lagrangian_loop_has_zero_index() {
        let lp = CoisotropicLoop::constant(Subspace::horizontal_lagrangian(2), 2, 16).unwrap();
        let hol = HolonomyPath::identity(0, lp.times().to_vec()).unwrap();
        for s in [LiftStrategy::BlockAssembly, LiftStrategy::FrameTransport] {
            let mu = maslov_index_with(&lp, &hol, s).unwrap().value();
            assert!(mu.abs() < 1e-8, "{s:?}: {mu}");
        }
    }

    #[test]
    fn constant_coisotropic_reduces_to_holonomy() {
        let lp = CoisotropicLoop::constant(Subspace::coordinate_coisotropic(2, 1), 1, 65).unwrap();
        let hol = rotation_holonomy(1, 1.0, 65);
        let mu = maslov_index(&lp, &hol).unwrap().value();
        assert!((mu + 2.0).abs() < 1e-8, "{mu}");
        let w = well_definedness_check(&lp, &hol).unwrap();
        assert!(w.difference < 1e-6, "{w:?}");
        let (l2, h2) = homogeneity_cover(&lp, &hol, 2).unwrap();
        assert!((maslov_index(&l2, &h2).unwrap().value() + 4.0).abs() < 1e-8);
    }

    #[test]
    fn lift_constraints_hold() {
        let lp = CoisotropicLoop::constant(Subspace::coordinate_coisotropic(3, 1), 1, 33).unwrap();
        let hol = rotation_holonomy(2, 0.5, 33);
        for s in [LiftStrategy::BlockAssembly, LiftStrategy::FrameTransport] {
            let lift = build_lift(&lp, &hol, s).unwrap();
            let (span, quot) = lift_residuals(&lp, &hol, &lift).unwrap();
            assert!(span < 1e-7 && quot < 1e-7, "{s:?}: {span:e} {quot:e}");
        }
    }

    #[test]
    fn lagrangian_line_loop_is_nonorientable() {
        let samples = 65;
        let times = uniform_times(samples);
        let subs: Vec<Subspace> = times
            .iter()
            .map(|&t| {
                let a = PI * t;
                Subspace::new(1, Mat::from_column_slice(2, 1, &[a.cos(), a.sin()]), 1e-9).unwrap()
            })
            .collect();
        let lp = CoisotropicLoop::new(1, 1, times.clone(), subs, Some(false), Tolerances::default()).unwrap();
        assert!(!lp.oriented());
        let hol = HolonomyPath::identity(0, times).unwrap();
        let mu = maslov_index(&lp, &hol).unwrap().value();
        assert!((mu.abs() - 1.0).abs() < 1e-8, "{mu}");
        let w = well_definedness_check(&lp, &hol).unwrap();
        assert!(w.difference < 1e-6, "{w:?}");
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let lp = CoisotropicLoop::constant(Subspace::coordinate_coisotropic(2, 1), 1, 8).unwrap();
        let hol = rotation_holonomy(1, 1.0, 9);
        assert!(build_lift(&lp, &hol, LiftStrategy::BlockAssembly).is_err());
        let sym = Subspace::new(2, Mat::from_fn(4, 2, |r, c| if r == 2 * c { 1.0 } else { 0.0 }), 1e-9).unwrap();
        assert!(CoisotropicLoop::constant(sym, 0, 4).is_err());
    }

    #[test]
    fn recap_consistency() {
        let r = RecapData {
            c1_pairing: -3,
            omega_pairing: 0.0,
        };
        assert_eq!(recap_maslov(12.0, r), 6.0);
        assert_eq!(recap_maslov(-7.5, r), -crate::indices::recap_mean_index(7.5, r));
    }
}
