//! Linear symplectic algebra on `(ℝ^{2n}, ω₀)`.
//!
//! Coordinates are `(x, y) ∈ ℝⁿ × ℝⁿ` and the form is `ω₀(u, v) = uᵀ J₀ v`
//! with `J₀ = [[0, -I], [I, 0]]`. Under this convention `ω₀(eₓ, e_y) = -1`,
//! i.e. ω₀ = dy∧dx, and `J₀` is multiplication by `i` on `x + iy`.
//!
//! Frames adapted to a coisotropic subspace `C` of codimension `k` use a
//! fixed column layout: x-columns `0..k` span `C^ω`, x-columns `k..n` and
//! y-columns `n+k..2n` are quotient representatives, and y-columns `n..n+k`
//! span a Lagrangian transversal. In frame coordinates `C` is therefore the
//! coordinate subspace `{y₁ = … = y_k = 0}`.

use crate::error::{Error, Result};
use crate::linalg::{
    containment_residual, inf_norm, inv_sqrt_near_identity, j_matrix, orth, orth_complement, orth_projector,
    polar_orthonormalize, spectral_norm, Mat,
};
use nalgebra::DVector;

/// Tolerances used throughout the linear-algebra layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `‖MᵀJ₀M − J₀‖_∞` bound for certified symplectic matrices.
    pub symplectic: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// Sine of the largest principal angle allowed for span equality/containment.
    pub subspace: f64,
    /// Max principal angle between consecutive loop samples, and max
    /// operator-norm change between consecutive adapted frames.
    pub continuity_gauge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symplectic: 1e-8,
            rank: 1e-9,
            subspace: 1e-9,
            continuity_gauge: 0.5,
        }
    }
}

/// The standard form ω₀ on ℝ^{2n}.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    half_dim: usize,
    matrix: Mat,
}

impl SymplecticForm {
    pub fn standard(half_dim: usize) -> Result<Self> {
        if half_dim == 0 {
            return Err(Error::Invalid("half_dim must be at least 1".into()));
        }
        Ok(SymplecticForm {
            half_dim,
            matrix: j_matrix(half_dim),
        })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        omega(u, v, self)
    }
}

/// `ω₀(u, v) = uᵀ J₀ v`.
pub fn omega(u: &[f64], v: &[f64], form: &SymplecticForm) -> Result<f64> {
    let dim = 2 * form.half_dim;
    if u.len() != dim || v.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {} for a form on R^{dim}",
            u.len(),
            v.len()
        )));
    }
    let n = form.half_dim;
    // J₀ v = (-v_y, v_x)
    let mut acc = 0.0;
    for i in 0..n {
        acc += -u[i] * v[n + i] + u[n + i] * v[i];
    }
    Ok(acc)
}

fn omega_cols(a: &DVector<f64>, b: &DVector<f64>, n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        acc += -a[i] * b[n + i] + a[n + i] * b[i];
    }
    acc
}

/// `‖MᵀJ₀M − J₀‖_∞`.
pub fn symplectic_residual(m: &Mat) -> f64 {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    inf_norm(&(m.transpose() * &j * m - j))
}

/// A real `2n × 2n` matrix certified to preserve ω₀ to within `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    half_dim: usize,
    entries: Mat,
    tolerance: f64,
    residual: f64,
}

/// Certify `m` as symplectic. Rejections carry the residual.
pub fn validate_symplectic(m: Mat, tol: f64) -> Result<SymplecticMatrix> {
    if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix of even size, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let residual = symplectic_residual(&m);
    if residual > tol {
        return Err(Error::NotSymplectic {
            residual,
            tolerance: tol,
        });
    }
    let det = m.determinant();
    // A near-symplectic matrix has det ≈ +1; the slack scales with conditioning.
    let slack = (100.0 * tol).max(1e-6) * (1.0 + inf_norm(&m)).powi(2);
    if (det - 1.0).abs() > slack {
        return Err(Error::BadDeterminant { det });
    }
    Ok(SymplecticMatrix {
        half_dim: m.nrows() / 2,
        entries: m,
        tolerance: tol,
        residual,
    })
}

impl SymplecticMatrix {
    pub fn identity(half_dim: usize) -> Self {
        SymplecticMatrix {
            half_dim,
            entries: Mat::identity(2 * half_dim, 2 * half_dim),
            tolerance: 0.0,
            residual: 0.0,
        }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn into_entries(self) -> Mat {
        self.entries
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `M⁻¹ = -J₀ Mᵀ J₀`, exact for symplectic matrices.
    pub fn inverse(&self) -> Mat {
        symplectic_inverse(&self.entries)
    }
}

pub fn symplectic_inverse(m: &Mat) -> Mat {
    let j = j_matrix(m.nrows() / 2);
    -(&j * m.transpose() * &j)
}

/// Block direct sum for `(V₁ × V₂, ω₁ × ω₂)`, written in the interleaved
/// coordinates `(x₁, x₂, y₁, y₂)` so the result is symplectic for ω₀ on
/// ℝ^{2(n₁+n₂)}.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let n1 = a.nrows() / 2;
    let n2 = b.nrows() / 2;
    let n = n1 + n2;
    let ia = |i: usize| if i < n1 { i } else { n + (i - n1) };
    let ib = |i: usize| if i < n2 { n1 + i } else { n + n1 + (i - n2) };
    let mut out = Mat::zeros(2 * n, 2 * n);
    for r in 0..2 * n1 {
        for c in 0..2 * n1 {
            out[(ia(r), ia(c))] = a[(r, c)];
        }
    }
    for r in 0..2 * n2 {
        for c in 0..2 * n2 {
            out[(ib(r), ib(c))] = b[(r, c)];
        }
    }
    out
}

/// Project a near-symplectic matrix back onto Sp(2n) by
/// `M ↦ M (J₀ᵀ MᵀJ₀M)^{-1/2}`.
pub fn resymplectify(m: &Mat) -> Option<Mat> {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    let omega = m.transpose() * &j * m;
    let a = j.transpose() * omega;
    let r = inv_sqrt_near_identity(&a)?;
    Some(m * r)
}

/// A linear subspace of ℝ^{2n} given by a full-rank basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    half_dim: usize,
    basis: Mat,
    orthonormal: Mat,
}

impl Subspace {
    /// Wrap `basis` (2n × d), rejecting rank-deficient input.
    pub fn new(half_dim: usize, basis: Mat, rank_tol: f64) -> Result<Self> {
        if basis.nrows() != 2 * half_dim {
            return Err(Error::DimensionMismatch(format!(
                "basis has {} rows, ambient dimension is {}",
                basis.nrows(),
                2 * half_dim
            )));
        }
        if basis.ncols() > basis.nrows() {
            return Err(Error::DimensionMismatch(
                "more basis vectors than ambient dimension".into(),
            ));
        }
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("basis has non-finite entries".into()));
        }
        if basis.ncols() > 0 {
            let sv = basis.singular_values();
            let smax = sv.iter().cloned().fold(0.0, f64::max);
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            if smin <= rank_tol * smax.max(1.0) {
                return Err(Error::RankDeficient {
                    sigma: smin,
                    tolerance: rank_tol,
                });
            }
        }
        let orthonormal = orth(&basis, rank_tol);
        Ok(Subspace {
            half_dim,
            basis,
            orthonormal,
        })
    }

    fn from_orthonormal(half_dim: usize, q: Mat) -> Self {
        Subspace {
            half_dim,
            basis: q.clone(),
            orthonormal: q,
        }
    }

    pub fn full(half_dim: usize) -> Self {
        Self::from_orthonormal(half_dim, Mat::identity(2 * half_dim, 2 * half_dim))
    }

    /// The horizontal Lagrangian `L₀ = {y = 0}`.
    pub fn horizontal_lagrangian(half_dim: usize) -> Self {
        let mut q = Mat::zeros(2 * half_dim, half_dim);
        for i in 0..half_dim {
            q[(i, i)] = 1.0;
        }
        Self::from_orthonormal(half_dim, q)
    }

    /// The coordinate coisotropic `{y₁ = … = y_k = 0}`.
    pub fn coordinate_coisotropic(half_dim: usize, codim: usize) -> Self {
        let n = half_dim;
        let mut q = Mat::zeros(2 * n, 2 * n - codim);
        let mut c = 0;
        for i in 0..2 * n {
            if i >= n && i < n + codim {
                continue;
            }
            q[(i, c)] = 1.0;
            c += 1;
        }
        Self::from_orthonormal(n, q)
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        self.orthonormal.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn orthonormal(&self) -> &Mat {
        &self.orthonormal
    }

    pub fn projector(&self) -> Mat {
        &self.orthonormal * self.orthonormal.transpose()
    }

    /// Sine of the largest principal angle by which `self` leaves `other`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        containment_residual(&self.orthonormal, &other.orthonormal)
    }

    pub fn is_contained_in(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() <= other.dim() && self.containment_residual(other) <= tol
    }

    pub fn span_eq(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.containment_residual(other) <= tol
    }

    /// Image under a linear map.
    pub fn image(&self, m: &Mat, rank_tol: f64) -> Result<Subspace> {
        Subspace::new(self.half_dim, m * &self.orthonormal, rank_tol)
    }
}

/// `C^ω = {v : ω₀(v, c) = 0 ∀ c ∈ C}`, computed as `J₀ (C^⊥)`.
pub fn symplectic_complement(c: &Subspace) -> Result<Subspace> {
    let n = c.half_dim;
    let perp = orth_complement(&c.orthonormal);
    if perp.ncols() + c.dim() != 2 * n {
        return Err(Error::RankDeficient {
            sigma: 0.0,
            tolerance: 0.5,
        });
    }
    let comp = j_matrix(n) * perp;
    Ok(Subspace::from_orthonormal(n, comp))
}

pub fn is_coisotropic(c: &Subspace) -> Result<bool> {
    is_coisotropic_with(c, &Tolerances::default())
}

pub fn is_coisotropic_with(c: &Subspace, tol: &Tolerances) -> Result<bool> {
    if c.dim() < c.half_dim {
        return Ok(false);
    }
    let comp = symplectic_complement(c)?;
    Ok(comp.is_contained_in(c, tol.subspace))
}

/// The symplectic quotient `C / C^ω`, represented inside `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicQuotient {
    /// `2n × (d − c)` representatives, laid out as `[x-reps | y-reps]` with
    /// `ω₀(xᵢ, yⱼ) = −δᵢⱼ`.
    pub representative_basis: Mat,
    /// ω₀ on the representatives; equals the standard `J` of the quotient.
    pub induced_form: Mat,
    /// Orthonormal basis of `C^ω`.
    pub characteristic: Mat,
}

impl CharacteristicQuotient {
    pub fn dim(&self) -> usize {
        self.representative_basis.ncols()
    }
}

pub fn characteristic_quotient(c: &Subspace) -> Result<CharacteristicQuotient> {
    characteristic_quotient_with(c, &Tolerances::default())
}

pub fn characteristic_quotient_with(c: &Subspace, tol: &Tolerances) -> Result<CharacteristicQuotient> {
    let comp = symplectic_complement(c)?;
    let residual = comp.containment_residual(c);
    if c.dim() < c.half_dim || residual > tol.subspace {
        return Err(Error::NotCoisotropic { residual });
    }
    let n = c.half_dim;
    let reps = quotient_subspace(c, comp.orthonormal());
    let (qx, qy) = symplectic_gram_schmidt(&reps, n, tol.rank)?;
    let mut rep = Mat::zeros(2 * n, qx.ncols() + qy.ncols());
    let m = qx.ncols();
    for i in 0..m {
        rep.set_column(i, &qx.column(i));
        rep.set_column(m + i, &qy.column(i));
    }
    let induced = rep.transpose() * j_matrix(n) * &rep;
    if m > 0 {
        let det = induced.determinant();
        if det.abs() < tol.rank {
            return Err(Error::RankDeficient {
                sigma: det.abs(),
                tolerance: tol.rank,
            });
        }
    }
    Ok(CharacteristicQuotient {
        representative_basis: rep,
        induced_form: induced,
        characteristic: comp.orthonormal,
    })
}

/// Orthonormal basis of the Euclidean complement of `char_basis` inside `c`.
pub(crate) fn quotient_subspace(c: &Subspace, char_basis: &Mat) -> Mat {
    let proj = c.projector() - char_basis * char_basis.transpose();
    let expected = c.dim() - char_basis.ncols();
    let q = orth_projector(&proj);
    debug_assert_eq!(q.ncols(), expected);
    q
}

/// Turn an orthonormal basis of a symplectic subspace into pairs
/// `(xᵢ, yᵢ)` with `ω₀(xᵢ, yⱼ) = −δᵢⱼ` and all other pairings zero.
/// Pivots are taken in column order; the partner is the remaining vector
/// with the largest pairing.
fn symplectic_gram_schmidt(w: &Mat, n: usize, tol: f64) -> Result<(Mat, Mat)> {
    let dim = w.nrows();
    if !w.ncols().is_multiple_of(2) {
        return Err(Error::NotCoisotropic { residual: 1.0 });
    }
    let m = w.ncols() / 2;
    let mut remaining: Vec<DVector<f64>> = (0..w.ncols()).map(|i| w.column(i).into()).collect();
    let mut qx = Mat::zeros(dim, m);
    let mut qy = Mat::zeros(dim, m);
    for p in 0..m {
        let u = remaining[0].clone();
        let (j, best) = (1..remaining.len())
            .map(|j| (j, omega_cols(&u, &remaining[j], n)))
            .fold(
                (0, 0.0f64),
                |acc, (j, w)| {
                    if w.abs() > acc.1.abs() {
                        (j, w)
                    } else {
                        acc
                    }
                },
            );
        if j == 0 || best.abs() < tol {
            return Err(Error::RankDeficient {
                sigma: best.abs(),
                tolerance: tol,
            });
        }
        let mut v = remaining[j].clone();
        let mut c = best;
        if c > 0.0 {
            v = -v;
            c = -c;
        }
        let s = (-c).sqrt();
        let e = u / s;
        let f = v / s;
        remaining.remove(j);
        remaining.remove(0);
        for r in remaining.iter_mut() {
            let wf = omega_cols(r, &f, n);
            let we = omega_cols(r, &e, n);
            *r += &e * wf - &f * we;
        }
        if !remaining.is_empty() {
            let stacked = Mat::from_columns(&remaining);
            let o = orth(&stacked, tol);
            remaining = (0..o.ncols()).map(|i| o.column(i).into()).collect();
        }
        qx.set_column(p, &e);
        qy.set_column(p, &f);
    }
    Ok((qx, qy))
}

/// Column layout of frames adapted to a codimension-`k` coisotropic subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub half_dim: usize,
    pub codim: usize,
}

impl FrameLayout {
    pub fn quotient_half_dim(&self) -> usize {
        self.half_dim - self.codim
    }

    /// Indices of the quotient coordinates, in the order `(x_Q, y_Q)`.
    pub fn quotient_indices(&self) -> Vec<usize> {
        let (n, k) = (self.half_dim, self.codim);
        (k..n).chain(n + k..2 * n).collect()
    }

    pub fn assemble(&self, chr: &Mat, transversal: &Mat, qx: &Mat, qy: &Mat) -> Mat {
        let (n, k) = (self.half_dim, self.codim);
        let mut f = Mat::zeros(2 * n, 2 * n);
        for i in 0..k {
            f.set_column(i, &chr.column(i));
            f.set_column(n + i, &transversal.column(i));
        }
        for i in 0..n - k {
            f.set_column(k + i, &qx.column(i));
            f.set_column(n + k + i, &qy.column(i));
        }
        f
    }

    pub fn characteristic(&self, f: &Mat) -> Mat {
        f.columns(0, self.codim).into_owned()
    }

    pub fn transversal(&self, f: &Mat) -> Mat {
        f.columns(self.half_dim, self.codim).into_owned()
    }

    /// Quotient representatives `[x-reps | y-reps]`.
    pub fn quotient_reps(&self, f: &Mat) -> Mat {
        let idx = self.quotient_indices();
        Mat::from_fn(f.nrows(), idx.len(), |r, c| f[(r, idx[c])])
    }

    /// Quotient block of a matrix in frame coordinates.
    pub fn quotient_block(&self, g: &Mat) -> Mat {
        let idx = self.quotient_indices();
        Mat::from_fn(idx.len(), idx.len(), |r, c| g[(idx[r], idx[c])])
    }

    /// `I_V ⊕ h` in frame coordinates.
    pub fn embed_quotient(&self, h: &Mat) -> Mat {
        let n = self.half_dim;
        let idx = self.quotient_indices();
        let mut g = Mat::identity(2 * n, 2 * n);
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                g[(ir, ic)] = h[(r, c)];
            }
        }
        g
    }

    /// Largest entry of a frame-coordinate matrix that would move the
    /// coordinate coisotropic off itself (rows `y_V`, columns of `C_std`).
    pub fn stabilizer_defect(&self, g: &Mat) -> f64 {
        let (n, k) = (self.half_dim, self.codim);
        let mut worst = 0.0f64;
        for r in n..n + k {
            for c in 0..2 * n {
                if c >= n && c < n + k {
                    continue;
                }
                worst = worst.max(g[(r, c)].abs());
            }
        }
        worst
    }
}

/// Symplectic frame adapted to `c`, built canonically (no transport).
pub fn initial_adapted_frame(c: &Subspace, codim: usize, tol: &Tolerances) -> Result<Mat> {
    let n = c.half_dim;
    let layout = FrameLayout { half_dim: n, codim };
    let quot = characteristic_quotient_with(c, tol)?;
    if quot.characteristic.ncols() != codim {
        return Err(Error::DimensionMismatch(format!(
            "subspace has characteristic dimension {}, expected codim {codim}",
            quot.characteristic.ncols()
        )));
    }
    let chr = quot.characteristic.clone();
    let tr = j_matrix(n) * &chr;
    let m = n - codim;
    let qx = quot.representative_basis.columns(0, m).into_owned();
    let qy = quot.representative_basis.columns(m, m).into_owned();
    Ok(layout.assemble(&chr, &tr, &qx, &qy))
}

/// One transport step: project the previous frame's blocks onto the
/// decomposition of `next` and re-normalize each block.
pub fn transport_adapted_frame(
    prev: &Mat,
    next: &Subspace,
    codim: usize,
    index: usize,
    tol: &Tolerances,
) -> Result<Mat> {
    let n = next.half_dim;
    let layout = FrameLayout { half_dim: n, codim };
    let comp = symplectic_complement(next)?;
    let residual = comp.containment_residual(next);
    if residual > tol.subspace {
        return Err(Error::NotCoisotropic { residual });
    }
    let nbasis = comp.orthonormal();
    let projected = nbasis * (nbasis.transpose() * layout.characteristic(prev));
    let chr = renormalize_block(&projected, index)?;
    let tr = j_matrix(n) * &chr;

    let qsub = quotient_subspace(next, nbasis);
    let y = &qsub * (qsub.transpose() * layout.quotient_reps(prev));
    let y = symplectic_polar(&y, n).ok_or_else(|| Error::RefinementRequired {
        index,
        detail: "quotient representatives lost nondegeneracy under projection".into(),
    })?;
    let m = n - codim;
    let qx = y.columns(0, m).into_owned();
    let qy = y.columns(m, m).into_owned();
    let f = layout.assemble(&chr, &tr, &qx, &qy);
    let change = spectral_norm(&(&f - prev));
    if change > tol.continuity_gauge {
        return Err(Error::RefinementRequired {
            index,
            detail: format!("frame changed by {change:.3} in operator norm"),
        });
    }
    Ok(f)
}

pub(crate) fn renormalize_block(projected: &Mat, index: usize) -> Result<Mat> {
    if projected.ncols() == 0 {
        return Ok(projected.clone());
    }
    let sv = projected.singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < 0.5 {
        return Err(Error::RefinementRequired {
            index,
            detail: format!("characteristic block collapsed (σ_min = {smin:.3})"),
        });
    }
    Ok(polar_orthonormalize(projected))
}

/// `Y ↦ Y (JᵀΩ)^{-1/2}` with `Ω = YᵀJ₀Y`, restoring the standard pairing on
/// `[x-reps | y-reps]` without leaving their span.
pub fn symplectic_polar(y: &Mat, n: usize) -> Option<Mat> {
    if y.ncols() == 0 {
        return Some(y.clone());
    }
    let m = y.ncols() / 2;
    let omega = y.transpose() * j_matrix(n) * y;
    let a = j_matrix(m).transpose() * omega;
    let r = inv_sqrt_near_identity(&a)?;
    Some(y * r)
}

/// Symplectic frames adapted to every sample of a coisotropic loop,
/// transported continuously from a canonical initial frame.
pub fn adapted_frames(subspaces: &[Subspace], codim: usize, tol: &Tolerances) -> Result<Vec<Mat>> {
    let first = subspaces.first().ok_or_else(|| Error::Invalid("empty loop".into()))?;
    let mut frames = Vec::with_capacity(subspaces.len());
    frames.push(initial_adapted_frame(first, codim, tol)?);
    for (i, c) in subspaces.iter().enumerate().skip(1) {
        let f = transport_adapted_frame(frames.last().unwrap(), c, codim, i, tol)?;
        frames.push(f);
    }
    Ok(frames)
}

pub fn adapted_frame_family(lp: &crate::maslov::CoisotropicLoop) -> Result<Vec<Mat>> {
    adapted_frames(lp.subspaces(), lp.codim(), lp.tolerances())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; 2 * n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn omega_sign_convention() {
        let f = SymplecticForm::standard(3).unwrap();
        assert_eq!(omega(&e(3, 0), &e(3, 3), &f).unwrap(), -1.0);
        assert_eq!(omega(&e(3, 3), &e(3, 0), &f).unwrap(), 1.0);
        let u = [0.3, -1.0, 2.0, 0.5, 0.25, -4.0];
        assert_eq!(omega(&u, &u, &f).unwrap(), 0.0);
    }

    #[test]
    fn omega_planar_antisymmetry() {
        let f = SymplecticForm::standard(1).unwrap();
        let a = omega(&[1.0, 0.0], &[0.0, 1.0], &f).unwrap();
        let b = omega(&[0.0, 1.0], &[1.0, 0.0], &f).unwrap();
        assert_eq!(a.abs(), 1.0);
        assert_eq!(a, -b);
    }

    #[test]
    fn omega_rejects_bad_lengths() {
        let f = SymplecticForm::standard(2).unwrap();
        assert!(matches!(
            omega(&[1.0, 0.0], &[0.0, 1.0], &f),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(SymplecticForm::standard(0).is_err());
    }

    #[test]
    fn validation_examples() {
        assert!(validate_symplectic(Mat::identity(4, 4), 1e-12).is_ok());
        assert!(validate_symplectic(Mat::from_diagonal(&DVector::from_vec(vec![2.0, 0.5])), 1e-12).is_ok());
        match validate_symplectic(Mat::from_diagonal(&DVector::from_vec(vec![2.0, 2.0])), 1e-8) {
            Err(Error::NotSymplectic { residual, .. }) => assert_eq!(residual, 3.0),
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(validate_symplectic(Mat::identity(3, 3), 1e-8).is_err());
    }

    #[test]
    fn complement_examples() {
        let full = Subspace::full(2);
        assert_eq!(symplectic_complement(&full).unwrap().dim(), 0);

        for n in 1..4 {
            let l0 = Subspace::horizontal_lagrangian(n);
            let c = symplectic_complement(&l0).unwrap();
            assert!(c.span_eq(&l0, 1e-12));
        }

        // Null-space oracle: ω(v, e_i) = 0 for i = 1,2,3 in R^4 means
        // v_y1 = v_y2... solve the 3x4 Gram system by hand: rows are
        // e_iᵀJ₀ for i=0,1,2 → (0,0,-1,0), (0,0,0,-1), (1,0,0,0).
        // Kernel is spanned by e_2 (second x-axis).
        let basis = Mat::from_columns(&[
            DVector::from_vec(e(2, 0)),
            DVector::from_vec(e(2, 1)),
            DVector::from_vec(e(2, 2)),
        ]);
        let c = Subspace::new(2, basis, 1e-9).unwrap();
        let comp = symplectic_complement(&c).unwrap();
        assert_eq!(comp.dim(), 1);
        let expected = Subspace::new(2, Mat::from_column_slice(4, 1, &e(2, 1)), 1e-9).unwrap();
        assert!(comp.span_eq(&expected, 1e-12));
        assert!(comp.is_contained_in(&c, 1e-12));
    }

    #[test]
    fn coisotropy_examples() {
        assert!(is_coisotropic(&Subspace::horizontal_lagrangian(3)).unwrap());
        let hyper = Subspace::new(
            2,
            Mat::from_row_slice(4, 3, &[1., 0., 0., 0., 1., 0., 0., 0., 1., 1., 1., 1.]),
            1e-9,
        )
        .unwrap();
        assert!(is_coisotropic(&hyper).unwrap());
        let sym_plane = Subspace::new(
            2,
            Mat::from_columns(&[DVector::from_vec(e(2, 0)), DVector::from_vec(e(2, 2))]),
            1e-9,
        )
        .unwrap();
        assert!(!is_coisotropic(&sym_plane).unwrap());
    }

    #[test]
    fn quotient_examples() {
        let q = characteristic_quotient(&Subspace::horizontal_lagrangian(2)).unwrap();
        assert_eq!(q.dim(), 0);

        let q = characteristic_quotient(&Subspace::full(2)).unwrap();
        assert_eq!(q.dim(), 4);
        assert!(max_abs(&(&q.induced_form - j_matrix(2))) < 1e-12);

        let hyper = Subspace::coordinate_coisotropic(2, 1);
        let q = characteristic_quotient(&hyper).unwrap();
        assert_eq!(q.dim(), 2);
        assert!(q.induced_form.determinant().abs() > 0.5);

        let sym_plane = Subspace::new(
            2,
            Mat::from_columns(&[DVector::from_vec(e(2, 0)), DVector::from_vec(e(2, 2))]),
            1e-9,
        )
        .unwrap();
        assert!(matches!(
            characteristic_quotient(&sym_plane),
            Err(Error::NotCoisotropic { .. })
        ));
    }

    #[test]
    fn initial_frame_is_symplectic_and_adapted() {
        let basis = Mat::from_fn(6, 5, |r, col| {
            if r == col {
                1.0
            } else if r == 5 {
                0.3 * (col as f64 + 1.0)
            } else {
                0.0
            }
        });
        let hyper = Subspace::new(3, basis, 1e-9).unwrap();
        let f = initial_adapted_frame(&hyper, 1, &Tolerances::default()).unwrap();
        assert!(symplectic_residual(&f) < 1e-12);
        let layout = FrameLayout { half_dim: 3, codim: 1 };
        let std = Subspace::coordinate_coisotropic(3, 1);
        let img = std.image(&f, 1e-9).unwrap();
        assert!(img.span_eq(&hyper, 1e-12));
        let chr = Subspace::new(3, layout.characteristic(&f), 1e-9).unwrap();
        assert!(chr.span_eq(&symplectic_complement(&hyper).unwrap(), 1e-12));
    }

    #[test]
    fn direct_sum_is_symplectic() {
        let a = Mat::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
        let b = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let s = direct_sum(&a, &b);
        assert!(symplectic_residual(&s) < 1e-15);
        assert_eq!(s[(0, 2)], 1.0);
        assert_eq!(s[(1, 3)], -1.0);
    }

    #[test]
    fn resymplectify_restores_group() {
        let mut m = Mat::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
        m[(0, 0)] += 1e-6;
        let r = resymplectify(&m).unwrap();
        assert!(symplectic_residual(&r) < 1e-14);
        assert!(max_abs(&(&r - &m)) < 1e-5);
    }
}
