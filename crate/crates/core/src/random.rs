//! Seeded generators for symplectic test data.
//!
//! The stream discipline is fixed so that other implementations can
//! reproduce every case: ChaCha20 seeded with `seed_from_u64(seed)`, stream
//! number `(suite << 32) | case`, uniforms from the top 53 bits of each
//! 64-bit output, and normals by Box–Muller on pairs of uniforms.

use crate::linalg::{j_matrix, CMat, Mat};
use crate::sympcore::{validate_symplectic, SymplecticMatrix};
use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::PI;
use std::str::FromStr;

pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng { inner }
    }

    pub fn for_case(seed: u64, suite: u32, case: u32) -> Self {
        Self::new(seed, ((suite as u64) << 32) | case as u64)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, scale: f64) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = scale * self.normal();
            }
        }
        m
    }

    pub fn symmetric_matrix(&mut self, n: usize, scale: f64) -> Mat {
        let g = self.gaussian_matrix(n, n, scale);
        (&g + g.transpose()) * 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Orthogonal,
    Triangular,
    Generic,
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "orthogonal" => Ok(Family::Orthogonal),
            "triangular" => Ok(Family::Triangular),
            "generic" => Ok(Family::Generic),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

/// Haar-distributed unitary `U = X + iY`, embedded as `[[X, −Y], [Y, X]]`.
pub fn orthogonal_symplectic(rng: &mut SeededRng, n: usize) -> Mat {
    let z = CMat::from_fn(n, n, |_, _| Complex64::new(rng.normal(), rng.normal()));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    embed_unitary(&q)
}

pub fn embed_unitary(u: &CMat) -> Mat {
    let n = u.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = u[(r, c)];
            m[(r, c)] = z.re;
            m[(r, n + c)] = -z.im;
            m[(n + r, c)] = z.im;
            m[(n + r, n + c)] = z.re;
        }
    }
    m
}

fn well_conditioned(rng: &mut SeededRng, n: usize, scale: f64) -> Mat {
    loop {
        let a = Mat::identity(n, n) + rng.gaussian_matrix(n, n, scale);
        let sv = a.singular_values();
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) > 0.25 {
            return a;
        }
    }
}

/// `[[A, AS], [0, A⁻ᵀ]]` with `S` symmetric.
pub fn triangular_symplectic(rng: &mut SeededRng, n: usize) -> Mat {
    let a = well_conditioned(rng, n, 0.4);
    let s = rng.symmetric_matrix(n, 0.5);
    let a_inv_t = a.clone().try_inverse().expect("conditioned").transpose();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&(&a * s));
    m.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
    m
}

pub fn upper_shear(s: &Mat) -> Mat {
    let n = s.nrows();
    let mut m = Mat::identity(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(s);
    m
}

pub fn lower_shear(s: &Mat) -> Mat {
    let n = s.nrows();
    let mut m = Mat::identity(2 * n, 2 * n);
    m.view_mut((n, 0), (n, n)).copy_from(s);
    m
}

pub fn dilation(d: &[f64]) -> Mat {
    let n = d.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = x.exp();
        m[(n + i, n + i)] = (-x).exp();
    }
    m
}

/// Product of a rotation, shears, a dilation, and another rotation.
pub fn generic_symplectic(rng: &mut SeededRng, n: usize) -> Mat {
    let o1 = orthogonal_symplectic(rng, n);
    let u = upper_shear(&rng.symmetric_matrix(n, 0.5));
    let d: Vec<f64> = (0..n).map(|_| rng.range(-0.8, 0.8)).collect();
    let l = lower_shear(&rng.symmetric_matrix(n, 0.5));
    let o2 = orthogonal_symplectic(rng, n);
    o1 * u * dilation(&d) * l * o2
}

pub fn draw(rng: &mut SeededRng, n: usize, family: Family) -> Mat {
    match family {
        Family::Orthogonal => orthogonal_symplectic(rng, n),
        Family::Triangular => triangular_symplectic(rng, n),
        Family::Generic => generic_symplectic(rng, n),
    }
}

/// Deterministic random symplectic matrix for `(seed, n, family)`.
pub fn random_symplectic(seed: u64, n: usize, family: Family) -> SymplecticMatrix {
    let mut rng = SeededRng::new(seed, 0);
    let m = draw(&mut rng, n, family);
    validate_symplectic(m, 1e-10).expect("generators produce symplectic matrices")
}

/// Random Hamiltonian matrix `J₀ᵀS`.
pub fn hamiltonian_matrix(rng: &mut SeededRng, n: usize, scale: f64) -> Mat {
    j_matrix(n).transpose() * rng.symmetric_matrix(2 * n, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::sympcore::symplectic_residual;

    #[test]
    fn deterministic_per_seed() {
        for fam in [Family::Orthogonal, Family::Triangular, Family::Generic] {
            let a = random_symplectic(7, 3, fam);
            let b = random_symplectic(7, 3, fam);
            assert_eq!(a.entries(), b.entries());
            let c = random_symplectic(8, 3, fam);
            assert_ne!(a.entries(), c.entries());
        }
    }

    #[test]
    fn uniform_stream_is_pinned() {
        let mut r = SeededRng::new(42, 0);
        let first = r.uniform();
        let mut s = SeededRng::new(42, 0);
        assert_eq!(first, s.uniform());
        assert!((0.0..1.0).contains(&first));
        let mut other = SeededRng::new(42, 1);
        assert_ne!(first, other.uniform());
    }

    #[test]
    fn orthogonal_family_is_unitary() {
        let mut rng = SeededRng::new(1, 0);
        for n in 1..5 {
            let m = orthogonal_symplectic(&mut rng, n);
            assert!(max_abs(&(m.transpose() * &m - Mat::identity(2 * n, 2 * n))) < 1e-12);
            assert!(symplectic_residual(&m) < 1e-12);
        }
    }

    #[test]
    fn generic_family_validates() {
        let mut rng = SeededRng::new(3, 0);
        for _ in 0..1000 {
            let m = generic_symplectic(&mut rng, 4);
            assert!(validate_symplectic(m, 1e-10).is_ok());
        }
    }
}
