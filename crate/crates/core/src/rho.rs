//! The ρ-invariant `Sp(2n) → S¹`, computed from the spectrum.
//!
//! `ρ(φ) = (−1)^{m₀} ∏ λ^{m₊(λ)}` over unit-circle eigenvalues other than ±1,
//! where `m₀` counts pairs `{λ, λ⁻¹}` on the negative real axis and `m₊(λ)`
//! is the number of positive eigenvalues of the Krein form
//! `K(z, w) = −i ω₀(z̄, w)` on the generalized eigenspace of `λ`.
//! Eigenvalues with `Im λ < 0` use `m₊(λ̄) = mult(λ) − m₊(λ)`.

use crate::error::{Error, Result};
use crate::linalg::{j_matrix, max_abs, to_complex, CMat, Mat};
use crate::sympcore::SymplecticMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Numerical thresholds for spectral classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoOptions {
    /// `||λ| − 1| ≤ circle_tolerance` tags λ as unit-circle.
    pub circle_tolerance: f64,
    /// Relative distance under which eigenvalues are merged into one cluster.
    pub cluster_tolerance: f64,
    /// Eigenvalues this close to ±1 are treated as exactly ±1.
    pub unit_snap: f64,
    /// Relative imaginary part below which an off-circle eigenvalue is real.
    pub real_tolerance: f64,
    /// Minimum relative singular-value gap for a generalized eigenspace.
    pub conditioning: f64,
    /// Minimum |eigenvalue| of the Krein Gram matrix.
    pub krein_tolerance: f64,
}

impl Default for RhoOptions {
    fn default() -> Self {
        RhoOptions {
            circle_tolerance: 1e-8,
            cluster_tolerance: 1e-8,
            unit_snap: 1e-7,
            real_tolerance: 1e-6,
            conditioning: 1e-10,
            krein_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralTag {
    UnitCircle,
    NegativeReal,
    PositiveReal,
    OffCircle,
}

impl SpectralTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralTag::UnitCircle => "unit-circle",
            SpectralTag::NegativeReal => "negative-real",
            SpectralTag::PositiveReal => "positive-real",
            SpectralTag::OffCircle => "off-circle",
        }
    }
}

/// A cluster of numerically coincident eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    /// Representative value (projected onto S¹ for unit-circle clusters).
    pub value: Complex64,
    pub multiplicity: usize,
    pub tag: SpectralTag,
    /// Raw solver output belonging to this cluster.
    pub members: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinEntry {
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    pub m_plus: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralClassification {
    pub clusters: Vec<EigenCluster>,
    pub circle_tolerance: f64,
    pub m0: usize,
    /// Algebraic multiplicity of −1 (always even for symplectic input).
    pub minus_one_multiplicity: usize,
    /// One entry per unit-circle cluster with `Im λ > 0`.
    pub krein_table: Vec<KreinEntry>,
}

impl SpectralClassification {
    pub fn total_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// `ρ` assembled from the table.
    pub fn rho(&self) -> Complex64 {
        let mut acc = if self.m0.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for e in &self.krein_table {
            let c = self
                .clusters
                .iter()
                .find(|c| c.value == e.eigenvalue)
                .expect("krein entry has a cluster");
            acc *= cluster_factor(c, e.m_plus);
        }
        let r = acc.norm();
        if acc.im == 0.0 {
            Complex64::new(acc.re.signum(), 0.0)
        } else {
            acc / r
        }
    }
}

fn cluster_factor(c: &EigenCluster, p: usize) -> Complex64 {
    let m = c.multiplicity;
    if p == m {
        c.members
            .iter()
            .map(|z| z / z.norm())
            .fold(Complex64::new(1.0, 0.0), |a, b| a * b)
    } else if p == 0 {
        c.members
            .iter()
            .map(|z| (z / z.norm()).conj())
            .fold(Complex64::new(1.0, 0.0), |a, b| a * b)
    } else {
        c.value.powi(2 * p as i32 - m as i32)
    }
}

fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    crate::linalg::eigenvalues(m).ok_or(Error::EigenSolver)
}

fn classification_key(z: Complex64, opts: &RhoOptions) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if (z - one).norm() <= opts.unit_snap {
        return one;
    }
    if (z + one).norm() <= opts.unit_snap {
        return -one;
    }
    let r = z.norm();
    if (r - 1.0).abs() <= opts.circle_tolerance {
        return z / r;
    }
    z
}

fn cluster(keys: &[Complex64], raw: &[Complex64], opts: &RhoOptions) -> Vec<EigenCluster> {
    let n = keys.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = keys[i].norm().max(keys[j].norm()).max(1.0);
            if (keys[i] - keys[j]).norm() <= opts.cluster_tolerance * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let mut out: Vec<EigenCluster> = groups
        .into_iter()
        .map(|(_, idx)| {
            let mean = idx.iter().map(|&i| keys[i]).sum::<Complex64>() / idx.len() as f64;
            let (value, tag) = if mean == one {
                (one, SpectralTag::UnitCircle)
            } else if mean == -one {
                (-one, SpectralTag::NegativeReal)
            } else if (mean.norm() - 1.0).abs() <= opts.circle_tolerance {
                (mean / mean.norm(), SpectralTag::UnitCircle)
            } else if mean.im.abs() <= opts.real_tolerance * mean.norm() {
                if mean.re < 0.0 {
                    (mean, SpectralTag::NegativeReal)
                } else {
                    (mean, SpectralTag::PositiveReal)
                }
            } else {
                (mean, SpectralTag::OffCircle)
            };
            EigenCluster {
                value,
                multiplicity: idx.len(),
                tag,
                members: idx.iter().map(|&i| raw[i]).collect(),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.value
            .arg()
            .partial_cmp(&b.value.arg())
            .unwrap()
            .then(a.value.norm().partial_cmp(&b.value.norm()).unwrap())
    });
    out
}

/// Orthonormal basis of the invariant subspace belonging to `members`, as
/// the kernel of `∏ (M − λᵢ I)`.
fn invariant_subspace(m: &CMat, members: &[Complex64], opts: &RhoOptions) -> Result<CMat> {
    let dim = m.nrows();
    let mut p = CMat::identity(dim, dim);
    for &l in members {
        p = &p * (m - CMat::identity(dim, dim) * l);
    }
    let mut s: Vec<f64> = p.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = members.len();
    let smax = s.last().cloned().unwrap_or(0.0).max(1.0);
    if k < dim && s[k] <= opts.conditioning * smax {
        return Err(Error::IllConditioned {
            eigenvalue: format_complex(members[0]),
            detail: format!("singular-value gap {:.3e} below conditioning threshold", s[k] / smax),
        });
    }
    // kernel of P = orthogonal complement of the range of P*
    let q = p.adjoint().col_piv_qr().q();
    let basis = q.columns(dim - k, k).into_owned();
    Ok(basis)
}

/// `(positive count, smallest |eigenvalue|)` of `s · V*(−iJ₀)V`.
fn krein_signature(basis: &CMat, n: usize, sign: f64) -> (usize, f64) {
    let j = to_complex(&j_matrix(n)) * Complex64::new(0.0, -sign);
    let g = basis.adjoint() * j * basis;
    let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = g.symmetric_eigen();
    let pos = eig.eigenvalues.iter().filter(|&&x| x > 0.0).count();
    let min = eig.eigenvalues.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    (pos, min)
}

fn classify_with_sign(m: &Mat, opts: &RhoOptions, sign: f64) -> Result<SpectralClassification> {
    let n = m.nrows() / 2;
    let raw = eigenvalues(m)?;
    let keys: Vec<Complex64> = raw.iter().map(|&z| classification_key(z, opts)).collect();
    let mut clusters = cluster(&keys, &raw, opts);

    let mut negative = 0usize;
    let mut minus_one = 0usize;
    for c in &clusters {
        if c.tag == SpectralTag::NegativeReal {
            negative += c.multiplicity;
            if c.value == Complex64::new(-1.0, 0.0) {
                minus_one += c.multiplicity;
            }
        }
    }
    if !negative.is_multiple_of(2) {
        return Err(Error::BoundaryAmbiguity(format!(
            "odd number ({negative}) of eigenvalues on the negative real axis; \
             an eigenvalue sits on the circle/axis boundary near -1"
        )));
    }

    let cm = to_complex(m);
    let mut table;
    'retry: loop {
        table = Vec::new();
        let upper: Vec<usize> = (0..clusters.len())
            .filter(|&i| {
                let c = &clusters[i];
                c.tag == SpectralTag::UnitCircle && c.value.im > 0.0
            })
            .collect();
        for &i in &upper {
            let c = &clusters[i];
            let basis = invariant_subspace(&cm, &c.members, opts)?;
            let (pos, min) = krein_signature(&basis, n, sign);
            if min < opts.krein_tolerance {
                let nearest = upper
                    .iter()
                    .filter(|&&j| j != i)
                    .min_by(|&&a, &&b| {
                        let da = (clusters[a].value - c.value).norm();
                        let db = (clusters[b].value - c.value).norm();
                        da.partial_cmp(&db).unwrap()
                    })
                    .copied();
                match nearest {
                    Some(j) => {
                        let other = clusters.remove(i.max(j));
                        let keep = i.min(j);
                        let merged = &mut clusters[keep];
                        merged.members.extend(other.members);
                        merged.multiplicity += other.multiplicity;
                        let mean = merged.members.iter().sum::<Complex64>() / merged.members.len() as f64;
                        merged.value = mean / mean.norm();
                        continue 'retry;
                    }
                    None => {
                        return Err(Error::IllConditioned {
                            eigenvalue: format_complex(c.value),
                            detail: format!("Krein form near-degenerate (min |eig| {min:.3e})"),
                        })
                    }
                }
            }
            table.push(KreinEntry {
                eigenvalue: c.value,
                multiplicity: c.multiplicity,
                m_plus: pos,
            });
        }
        break;
    }

    Ok(SpectralClassification {
        clusters,
        circle_tolerance: opts.circle_tolerance,
        m0: negative / 2,
        minus_one_multiplicity: minus_one,
        krein_table: table,
    })
}

/// Global sign of the Krein form, fixed so that `ρ(R(θ)) = e^{iθ}`.
fn krein_sign() -> f64 {
    static SIGN: OnceLock<f64> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let theta = PI / 3.0;
        let r = rotation(1, theta);
        let cls = classify_with_sign(&r, &RhoOptions::default(), 1.0).expect("calibration rotation classifies");
        let rho = cls.rho();
        if (rho - Complex64::from_polar(1.0, theta)).norm() < 1e-12 {
            1.0
        } else {
            -1.0
        }
    })
}

/// `R(θ) = exp(θ J₀)` acting on every `(xᵢ, yᵢ)` plane.
pub fn rotation(n: usize, theta: f64) -> Mat {
    rotations(&vec![theta; n])
}

pub fn rotations(thetas: &[f64]) -> Mat {
    let n = thetas.len();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for (i, &t) in thetas.iter().enumerate() {
        let (s, c) = t.sin_cos();
        m[(i, i)] = c;
        m[(i, n + i)] = -s;
        m[(n + i, i)] = s;
        m[(n + i, n + i)] = c;
    }
    m
}

pub fn classify_spectrum(m: &SymplecticMatrix) -> Result<SpectralClassification> {
    classify_spectrum_with(m.entries(), &RhoOptions::default())
}

pub fn classify_spectrum_with(m: &Mat, opts: &RhoOptions) -> Result<SpectralClassification> {
    classify_with_sign(m, opts, krein_sign())
}

/// `m₊(λ)` for a unit-circle eigenvalue with `Im λ > 0`.
pub fn krein_positive_multiplicity(m: &SymplecticMatrix, lambda: Complex64) -> Result<usize> {
    if lambda.im <= 0.0 {
        return Err(Error::Invalid("eigenvalue must have positive imaginary part".into()));
    }
    let cls = classify_spectrum(m)?;
    cls.krein_table
        .iter()
        .filter(|e| (e.eigenvalue - lambda).norm() <= 1e-6)
        .min_by(|a, b| {
            (a.eigenvalue - lambda)
                .norm()
                .partial_cmp(&(b.eigenvalue - lambda).norm())
                .unwrap()
        })
        .map(|e| e.m_plus)
        .ok_or_else(|| {
            Error::Invalid(format!(
                "{} is not a unit-circle eigenvalue of the matrix",
                format_complex(lambda)
            ))
        })
}

pub fn compute_rho(m: &SymplecticMatrix) -> Result<Complex64> {
    rho_of(m.entries())
}

/// ρ of an unchecked matrix; callers are responsible for symplecticity.
pub fn rho_of(m: &Mat) -> Result<Complex64> {
    rho_with(m, &RhoOptions::default())
}

pub fn rho_with(m: &Mat, opts: &RhoOptions) -> Result<Complex64> {
    Ok(classify_spectrum_with(m, opts)?.rho())
}

/// `det(X + iY)` for `M = [[X, −Y], [Y, X]] ∈ Sp(2n) ∩ O(2n)`.
pub fn rho_determinant_oracle(m: &SymplecticMatrix) -> Result<Complex64> {
    determinant_oracle_with(m.entries(), 1e-8)
}

pub fn determinant_oracle_with(m: &Mat, tol: f64) -> Result<Complex64> {
    let n = m.nrows() / 2;
    let dim = 2 * n;
    let orth = max_abs(&(m.transpose() * m - Mat::identity(dim, dim)));
    let x = m.view((0, 0), (n, n));
    let y = m.view((n, 0), (n, n));
    let blocks = max_abs(&(m.view((0, n), (n, n)) + y)).max(max_abs(&(m.view((n, n), (n, n)) - x)));
    let residual = orth.max(blocks);
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    let u = CMat::from_fn(n, n, |r, c| Complex64::new(x[(r, c)], y[(r, c)]));
    Ok(u.determinant())
}

pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympcore::validate_symplectic;
    use nalgebra::DVector;

    fn cert(m: Mat) -> SymplecticMatrix {
        validate_symplectic(m, 1e-10).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn calibration_is_positive() {
        assert_eq!(krein_sign(), 1.0);
    }

    #[test]
    fn identity_classification() {
        let cls = classify_spectrum(&SymplecticMatrix::identity(3)).unwrap();
        assert_eq!(cls.clusters.len(), 1);
        assert_eq!(cls.clusters[0].multiplicity, 6);
        assert_eq!(cls.clusters[0].tag, SpectralTag::UnitCircle);
        assert_eq!(cls.m0, 0);
        assert_eq!(
            compute_rho(&SymplecticMatrix::identity(3)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn hyperbolic_examples() {
        let m = cert(Mat::from_diagonal(&DVector::from_vec(vec![-2.0, -0.5])));
        let cls = classify_spectrum(&m).unwrap();
        assert_eq!(cls.m0, 1);
        assert_eq!(compute_rho(&m).unwrap(), Complex64::new(-1.0, 0.0));
        let m = cert(Mat::from_diagonal(&DVector::from_vec(vec![2.0, 0.5])));
        assert_eq!(compute_rho(&m).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rotation_tables() {
        let theta = PI / 3.0;
        let m = cert(rotation(1, theta));
        let cls = classify_spectrum(&m).unwrap();
        assert_eq!(cls.m0, 0);
        assert_eq!(cls.krein_table.len(), 1);
        let l = Complex64::from_polar(1.0, theta);
        assert_eq!(krein_positive_multiplicity(&m, l).unwrap(), 1);
        let back = cert(rotation(1, -theta));
        assert_eq!(krein_positive_multiplicity(&back, l).unwrap(), 0);
        let two = cert(rotation(2, PI / 4.0));
        assert_eq!(
            krein_positive_multiplicity(&two, Complex64::from_polar(1.0, PI / 4.0)).unwrap(),
            2
        );
        assert!(close(compute_rho(&two).unwrap(), Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn unitary_rho_matches_determinant() {
        let m = cert(rotations(&[0.3, 1.1, -2.0]));
        let a = compute_rho(&m).unwrap();
        let b = rho_determinant_oracle(&m).unwrap();
        assert!(close(a, b));
        assert!(close(b, Complex64::from_polar(1.0, 0.3 + 1.1 - 2.0)));
        assert!(close(
            rho_determinant_oracle(&SymplecticMatrix::identity(2)).unwrap(),
            Complex64::new(1.0, 0.0)
        ));
    }

    #[test]
    fn minus_identity() {
        for n in 1..4 {
            let m = cert(-Mat::identity(2 * n, 2 * n));
            let cls = classify_spectrum(&m).unwrap();
            assert_eq!(cls.minus_one_multiplicity, 2 * n);
            assert_eq!(cls.m0, n);
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(compute_rho(&m).unwrap(), Complex64::new(expected, 0.0));
            assert!(close(
                rho_determinant_oracle(&m).unwrap(),
                Complex64::new(expected, 0.0)
            ));
        }
    }

    #[test]
    fn oracle_rejects_non_unitary() {
        let m = cert(Mat::from_diagonal(&DVector::from_vec(vec![2.0, 0.5])));
        assert!(matches!(rho_determinant_oracle(&m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn krein_indefinite_pair_cancels() {
        // R(θ) ⊕ R(−θ): one positive and one negative Krein direction.
        let m = cert(rotations(&[0.7, -0.7]));
        let cls = classify_spectrum(&m).unwrap();
        assert_eq!(cls.krein_table.len(), 1);
        assert_eq!(cls.krein_table[0].multiplicity, 2);
        assert_eq!(cls.krein_table[0].m_plus, 1);
        assert!(close(compute_rho(&m).unwrap(), Complex64::new(1.0, 0.0)));
    }
}
