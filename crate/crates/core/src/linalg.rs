//! Dense helpers shared by the symplectic modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Standard complex structure `[[0, -I], [I, 0]]` of size `2n`.
pub fn j_matrix(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Induced infinity norm (max absolute row sum).
pub fn inf_norm(m: &Mat) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Orthonormal basis for the column span of `m`, dropping directions whose
/// singular value is below `rank_tol` times the largest.
///
/// The rank comes from the singular values; the basis from a column-pivoted
/// QR factorization, whose leading `rank` columns span the range.
pub fn orth(m: &Mat, rank_tol: f64) -> Mat {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Mat::zeros(rows, 0);
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv
        .iter()
        .filter(|&&s| s > rank_tol * smax.max(f64::MIN_POSITIVE))
        .count();
    let q = m.clone().col_piv_qr().q();
    let mut out = q.columns(0, rank).into_owned();
    sign_normalize(&mut out);
    out
}

/// Orthonormal basis for the range of an orthogonal projector, whose
/// singular values are all near 0 or 1.
pub fn orth_projector(p: &Mat) -> Mat {
    let rows = p.nrows();
    let rank = p.singular_values().iter().filter(|&&s| s > 0.5).count();
    if rank == 0 {
        return Mat::zeros(rows, 0);
    }
    let q = p.clone().col_piv_qr().q();
    let mut out = q.columns(0, rank).into_owned();
    sign_normalize(&mut out);
    out
}

/// Fix the sign of each column so that its largest-magnitude entry is
/// positive. Removes the arbitrary sign freedom of SVD output.
pub fn sign_normalize(m: &mut Mat) {
    for c in 0..m.ncols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v.abs() > best + 1e-12 {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            let mut col = m.column_mut(c);
            col *= -1.0;
        }
    }
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q`.
pub fn orth_complement(q: &Mat) -> Mat {
    let dim = q.nrows();
    let proj = Mat::identity(dim, dim) - q * q.transpose();
    orth_projector(&proj)
}

/// Closest matrix with orthonormal columns, `m (mᵀm)^{-1/2}`.
pub fn polar_orthonormalize(m: &Mat) -> Mat {
    if m.ncols() == 0 {
        return m.clone();
    }
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    let mut inv_sqrt = Mat::zeros(eig.eigenvalues.len(), eig.eigenvalues.len());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        inv_sqrt[(i, i)] = 1.0 / l.max(1e-300).sqrt();
    }
    let v = &eig.eigenvectors;
    m * (v * inv_sqrt * v.transpose())
}

/// Inverse principal square root by the Denman–Beavers iteration. Intended
/// for matrices close to the identity; returns `None` if the iteration does
/// not settle.
pub fn inv_sqrt_near_identity(a: &Mat) -> Option<Mat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = Mat::identity(n, n);
    for _ in 0..60 {
        let y_inv = y.clone().try_inverse()?;
        let z_inv = z.clone().try_inverse()?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = max_abs(&(&z_next - &z));
        y = y_next;
        z = z_next;
        if delta < 1e-15 * (1.0 + max_abs(&z)) {
            return Some(z);
        }
    }
    if max_abs(&(&y * &y - a)) < 1e-10 * (1.0 + max_abs(a)) {
        Some(z)
    } else {
        None
    }
}

/// Sine of the largest principal angle by which the span of orthonormal
/// `u` leaves the span of orthonormal `v`.
pub fn containment_residual(u: &Mat, v: &Mat) -> f64 {
    if u.ncols() == 0 {
        return 0.0;
    }
    let resid = u - v * (v.transpose() * u);
    spectral_norm(&resid)
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn column_vector(data: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(data)
}

/// Do two routes agree bit-for-bit or to within `tol`?
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn balance(m: &Mat) -> Mat {
    let d = m.nrows();
    let mut a = m.clone();
    for _ in 0..32 {
        let mut done = true;
        for i in 0..d {
            let c: f64 = (0..d).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let r: f64 = (0..d).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            while c * f < r / (2.0 * f) {
                f *= 2.0;
            }
            while c * f > 2.0 * r / f {
                f /= 2.0;
            }
            if f != 1.0 && (c * f + r / f) < 0.95 * (c + r) {
                done = false;
                a.row_mut(i).scale_mut(1.0 / f);
                a.column_mut(i).scale_mut(f);
            }
        }
        if done {
            break;
        }
    }
    a
}

fn reflection(d: usize, k: usize) -> Mat {
    let v = DVector::from_fn(d, |i, _| ((i * k + 1) as f64).cos());
    Mat::identity(d, d) - (&v * v.transpose()) * (2.0 / v.norm_squared())
}

/// Eigenvalues from the real Schur form. The 2×2 diagonal blocks are solved
/// here because nalgebra's own extraction returns NaN on blocks with a
/// repeated real eigenvalue. The QR iteration can stall on tight clusters at
/// the strictest deflation threshold, so looser ones are tried in turn.
pub fn eigenvalues(m: &Mat) -> Option<Vec<Complex64>> {
    let schur = |a: &Mat| {
        [1e-15, 1e-14, 1e-13, 1e-12]
            .iter()
            .find_map(|&eps| nalgebra::linalg::Schur::try_new(a.clone(), eps, 2_000))
    };
    // Fallbacks: balancing, then conjugation by fixed reflections. Both keep the spectrum.
    let t = schur(m)
        .or_else(|| schur(&balance(m)))
        .or_else(|| {
            (1..=4).find_map(|k| {
                let h = reflection(m.nrows(), k);
                schur(&(&h * m * &h))
            })
        })?
        .unpack()
        .1;
    let d = t.nrows();
    let mut out = Vec::with_capacity(d);
    let mut i = 0;
    while i < d {
        if i + 1 < d && t[(i + 1, i)] != 0.0 {
            let (a, b, c, e) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mean = 0.5 * (a + e);
            let disc = 0.25 * (a - e) * (a - e) + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push(Complex64::new(mean + r, 0.0));
                out.push(Complex64::new(mean - r, 0.0));
            } else {
                let r = (-disc).sqrt();
                out.push(Complex64::new(mean, r));
                out.push(Complex64::new(mean, -r));
            }
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(out)
    } else {
        None
    }
}
