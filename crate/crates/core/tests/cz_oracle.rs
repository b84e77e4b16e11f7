//! Conley–Zehnder index of constant-Hessian flows against the
//! Robbin–Salamon crossing count.
//!
//! For `Ψ_t = exp(t J₀ᵀ S)` the crossings are the times where `Ψ_t` has
//! eigenvalue 1 and the crossing form is `−S` on `ker(Ψ_t − I)`. With a
//! nondegenerate endpoint, `μCZ = ½ sign(−S) + Σ_{0<t<1} sign(−S|ker)`.

use nalgebra::DMatrix;
use std::f64::consts::PI;
use sympidx::flows::{linearized_flow, QuadraticHamiltonian};
use sympidx::indices::cz_index;
use sympidx::linalg::{j_matrix, Mat};
use sympidx::random::SeededRng;

fn signature(m: &Mat) -> Option<i64> {
    let eig = m.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1e-300f64, |a, x| a.max(x.abs()));
    let mut sig = 0;
    for &l in eig.eigenvalues.iter() {
        if l.abs() < 1e-8 * scale {
            return None;
        }
        sig += if l > 0.0 { 1 } else { -1 };
    }
    Some(sig)
}

/// Orthonormal basis of the numerical kernel of `m`.
fn kernel(m: &Mat, tol: f64) -> Mat {
    let g = m.transpose() * m;
    let eig = g.symmetric_eigen();
    let cols: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] < tol)
        .collect();
    Mat::from_fn(m.nrows(), cols.len(), |r, c| eig.eigenvectors[(r, cols[c])])
}

/// Crossing count, or `None` if the case is too close to degenerate.
fn robbin_salamon(s: &Mat) -> Option<i64> {
    let n2 = s.nrows();
    let a = j_matrix(n2 / 2).transpose() * s;
    let eigs = a.complex_eigenvalues();
    let neg_s = -s;
    let mut total2 = signature(&neg_s)?;
    let mut times = Vec::new();
    for z in eigs.iter() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        if z.re.abs() > 1e-9 * (1.0 + z.im.abs()) || z.im <= 0.0 {
            continue;
        }
        let period = 2.0 * PI / z.im;
        let end_phase = 1.0 / period;
        if (end_phase - end_phase.round()).abs() < 1e-3 {
            return None;
        }
        let mut k = 1.0;
        while k * period < 1.0 {
            times.push(k * period);
            k += 1.0;
        }
    }
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for w in times.windows(2) {
        if w[1] - w[0] < 1e-6 {
            return None;
        }
    }
    for &t in &times {
        let psi = (&a * t).exp();
        let k = kernel(&(psi - DMatrix::identity(n2, n2)), 1e-14);
        if k.ncols() != 2 {
            return None;
        }
        total2 += 2 * signature(&(k.transpose() * &neg_s * &k))?;
    }
    Some(total2 / 2)
}

#[test]
fn cz_matches_crossing_count() {
    let mut checked = 0;
    for n in 1..=3 {
        let mut rng = SeededRng::new(2024, n as u64);
        let mut done = 0;
        let mut attempts = 0;
        while done < 40 && attempts < 400 {
            attempts += 1;
            // Shifted Hessians give many elliptic crossings; the growth cap
            // keeps every frame within the symplectic load tolerance.
            let shift = [8.0, -8.0, 0.0][attempts % 3];
            let s = rng.symmetric_matrix(2 * n, 3.0) + Mat::identity(2 * n, 2 * n) * shift;
            let a = j_matrix(n).transpose() * &s;
            if a.complex_eigenvalues().iter().any(|z| z.re.abs() > 2.0) {
                continue;
            }
            let Some(expected) = robbin_salamon(&s) else { continue };
            let h = QuadraticHamiltonian::new(s.clone()).unwrap();
            let path = linearized_flow(&h, 1.0, 256).unwrap();
            let cz = cz_index(&path).unwrap();
            assert_eq!(cz.value() as i64, expected, "n={n}, S={s}");
            done += 1;
        }
        assert!(done >= 30, "only {done} usable cases for n={n}");
        checked += done;
    }
    assert!(checked >= 90);
}

#[test]
fn decoupled_oscillators_count_full_turns() {
    // S = −diag(a₁..aₙ, a₁..aₙ) rotates plane j by a_j t; each full turn
    // before t = 1 adds 2.
    let freqs = [1.0, 7.5, 13.0, 20.0];
    for n in 1..=4 {
        let a = &freqs[..n];
        let mut d: Vec<f64> = a.iter().map(|x| -x).collect();
        d.extend(a.iter().map(|x| -x));
        let s = Mat::from_diagonal(&nalgebra::DVector::from_vec(d));
        let expected: i64 = a.iter().map(|x| 2 * (x / (2.0 * PI)).floor() as i64 + 1).sum();
        assert_eq!(robbin_salamon(&s), Some(expected));
        let h = QuadraticHamiltonian::new(s).unwrap();
        let got = cz_index(&linearized_flow(&h, 1.0, 256).unwrap()).unwrap();
        assert_eq!(got.value() as i64, expected);
    }
}
