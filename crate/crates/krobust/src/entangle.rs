//! Schmidt decomposition and the entanglement side of the theory.
//!
//! The Schmidt coefficients λ of a bipartite pure state behave exactly like
//! the sorted amplitudes of a coherence problem: the Schmidt-rank-k
//! robustness equals the k-coherence robustness of λ, and both certificates
//! transport along the isometry i ↦ uᵢ ⊗ wᵢ built from the local Schmidt
//! bases. Product-space vectors use row-major indexing, (a, b) ↦ a·n + b for
//! an m×n amplitude matrix.

use crate::primal::Certificate;
use crate::state::CanonicalState;
use crate::{certify, Error, Result, DEFAULT_NORM_TOLERANCE};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Schmidt decomposition of a bipartite pure state: amplitudes M factor as
/// M_{ab} = Σᵢ λᵢ·uᵢ[a]·wᵢ[b] with orthonormal columns uᵢ, wᵢ.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtData {
    /// λ₁ ≥ … ≥ λ_r, all above the truncation tolerance.
    pub coefficients: Vec<f64>,
    /// m×r, column i holds uᵢ.
    pub left_basis: DMatrix<Complex64>,
    /// n×r, column i holds wᵢ.
    pub right_basis: DMatrix<Complex64>,
    /// (m, n) of the amplitude matrix.
    pub dims: (usize, usize),
    pub truncation_tolerance: f64,
}

impl SchmidtData {
    /// Schmidt rank r.
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// The product vector uᵢ ⊗ wᵢ, length m·n.
    pub fn product_pair(&self, i: usize) -> Vec<Complex64> {
        let (m, n) = self.dims;
        let mut out = Vec::with_capacity(m * n);
        for a in 0..m {
            for b in 0..n {
                out.push(self.left_basis[(a, i)] * self.right_basis[(b, i)]);
            }
        }
        out
    }

    /// Lift coefficients c over Schmidt indices to Σᵢ cᵢ·(uᵢ ⊗ wᵢ).
    ///
    /// Errors when c carries weight on an index with no basis column, which
    /// only happens for certificates built on a padded λ longer than r.
    pub fn lift(&self, c: &[f64]) -> Result<Vec<Complex64>> {
        let (m, n) = self.dims;
        let r = self.rank();
        for (i, &ci) in c.iter().enumerate() {
            if i >= r && ci != 0.0 {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {i} is non-zero but the Schmidt rank is {r}"
                )));
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); m * n];
        for (i, &ci) in c.iter().take(r).enumerate() {
            if ci == 0.0 {
                continue;
            }
            for a in 0..m {
                for b in 0..n {
                    out[a * n + b] += ci * self.left_basis[(a, i)] * self.right_basis[(b, i)];
                }
            }
        }
        Ok(out)
    }

    /// The state vector Σᵢ λᵢ·(uᵢ ⊗ wᵢ), length m·n.
    pub fn state_vector(&self) -> Vec<Complex64> {
        self.lift(&self.coefficients)
            .expect("coefficients match the basis rank")
    }
}

/// Value and transported certificates for Schmidt-rank-k entanglement.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementCertificate {
    /// R_k^{E,s} = R_k^{E,g}.
    pub value: f64,
    /// ‖v‖_{γ,k}² = value + 1.
    pub gamma_norm: f64,
    pub k: usize,
    /// (m, n); product vectors are indexed (a, b) ↦ a·n + b.
    pub dims: (usize, usize),
    /// b = Σᵢ aᵢ·(uᵢ ⊗ wᵢ); |⟨b, v⟩|² − 1 recovers the value.
    pub dual_vector_b: Vec<Complex64>,
    /// Product-space atoms of Schmidt rank ≤ k.
    pub lifted_atoms: Vec<Vec<Complex64>>,
    /// Probability weights matching `lifted_atoms`.
    pub weights: Vec<f64>,
    /// The coherence certificate on λ the lift came from (absent for k = 1,
    /// where the value has its own closed form and rank-one atoms).
    pub coherence: Option<Box<Certificate>>,
}

/// Compute the Schmidt decomposition of an amplitude matrix with unit
/// Frobenius norm. Singular values at or below `truncation_tolerance` are
/// dropped.
pub fn schmidt_decompose(
    state_matrix: &DMatrix<Complex64>,
    truncation_tolerance: f64,
) -> Result<SchmidtData> {
    let (m, n) = state_matrix.shape();
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput);
    }
    let norm = state_matrix.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > DEFAULT_NORM_TOLERANCE {
        return Err(Error::NonUnitNorm {
            norm,
            tolerance: DEFAULT_NORM_TOLERANCE,
        });
    }

    let mut svd = state_matrix.clone().svd(true, true);
    svd.sort_by_singular_values();
    let u = svd.u.expect("SVD with u requested");
    let v_t = svd.v_t.expect("SVD with v_t requested");

    let r = svd
        .singular_values
        .iter()
        .take_while(|s| **s > truncation_tolerance)
        .count();
    let coefficients: Vec<f64> = svd.singular_values.iter().take(r).cloned().collect();
    // M = U Σ Vᴴ, so the right Schmidt vectors are the rows of Vᴴ as they
    // stand; conjugating them again would break the reconstruction.
    let left_basis = DMatrix::from_fn(m, r, |a, i| u[(a, i)]);
    let right_basis = DMatrix::from_fn(n, r, |b, i| v_t[(i, b)]);

    Ok(SchmidtData {
        coefficients,
        left_basis,
        right_basis,
        dims: (m, n),
        truncation_tolerance,
    })
}

/// Largest singular value beyond index k−1 of `vector` reshaped to `dims`,
/// i.e. the numerical witness that its Schmidt rank is at most k when tiny.
pub fn schmidt_tail_norm(vector: &[Complex64], dims: (usize, usize), k: usize) -> Result<f64> {
    let (m, n) = dims;
    if vector.len() != m * n {
        return Err(Error::DimensionMismatch(format!(
            "vector has length {}, dims give {}x{} = {}",
            vector.len(),
            m,
            n,
            m * n
        )));
    }
    let matrix = DMatrix::from_fn(m, n, |a, b| vector[a * n + b]);
    let mut sv: Vec<f64> = matrix.svd(false, false).singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv.get(k).cloned().unwrap_or(0.0))
}

fn coherence_state_for(schmidt: &SchmidtData, k: usize) -> Result<CanonicalState> {
    let mut padded = schmidt.coefficients.clone();
    while padded.len() < k {
        padded.push(0.0);
    }
    CanonicalState::from_sorted(padded, DEFAULT_NORM_TOLERANCE)
}

/// Evaluate the Schmidt-rank-k robustness of the state behind `schmidt` and
/// construct transported certificates (1 ≤ k ≤ min(m, n)).
pub fn entanglement_robustness(
    schmidt: &SchmidtData,
    k: usize,
    tolerance: f64,
) -> Result<EntanglementCertificate> {
    let (m, n) = schmidt.dims;
    let k_max = m.min(n);
    if k < 1 || k > k_max {
        return Err(Error::KOutOfRange {
            k,
            n: k_max,
            min: 1,
            max: k_max,
        });
    }

    if k == 1 {
        // Separate closed form: the coherence-side robustness is undefined at
        // k = 1, but the entanglement value is (Σλ)² − 1 with rank-one atoms
        // s₁·(uᵢ ⊗ wᵢ) weighted λᵢ/s₁ and witness coefficients all 1.
        let lambda = &schmidt.coefficients;
        let s1: f64 = lambda.iter().sum();
        let value = s1 * s1 - 1.0;
        let r = schmidt.rank();
        let dual_vector_b = schmidt.lift(&vec![1.0; r])?;
        let mut lifted_atoms = Vec::with_capacity(r);
        let mut weights = Vec::with_capacity(r);
        for (i, &li) in lambda.iter().enumerate() {
            let mut c = vec![0.0; r];
            c[i] = s1;
            lifted_atoms.push(schmidt.lift(&c)?);
            weights.push(li / s1);
        }
        return Ok(EntanglementCertificate {
            value,
            gamma_norm: value + 1.0,
            k,
            dims: schmidt.dims,
            dual_vector_b,
            lifted_atoms,
            weights,
            coherence: None,
        });
    }

    let state = coherence_state_for(schmidt, k)?;
    let cert = certify(&state, k, tolerance)?;
    lift_certificates(schmidt, &cert)
}

/// Transport a coherence certificate on λ into the product space.
///
/// Preconditions: the certificate was built on `schmidt.coefficients`
/// (possibly zero-padded) with the same k ≥ 2; padding may only carry zero
/// weight, otherwise the basis columns to lift along do not exist.
pub fn lift_certificates(
    schmidt: &SchmidtData,
    coherence_cert: &Certificate,
) -> Result<EntanglementCertificate> {
    let dim = coherence_cert.branch.tail_sums.len();
    if dim < schmidt.rank() {
        return Err(Error::DimensionMismatch(format!(
            "certificate is on a {dim}-dimensional state, Schmidt rank is {}",
            schmidt.rank()
        )));
    }

    let dual_vector_b = schmidt.lift(&coherence_cert.dual.attaining_vector())?;
    let mut lifted_atoms = Vec::with_capacity(coherence_cert.primal.atoms.len());
    for atom in &coherence_cert.primal.atoms {
        lifted_atoms.push(schmidt.lift(atom)?);
    }

    Ok(EntanglementCertificate {
        value: coherence_cert.value,
        gamma_norm: coherence_cert.value + 1.0,
        k: coherence_cert.k,
        dims: schmidt.dims,
        dual_vector_b,
        lifted_atoms,
        weights: coherence_cert.primal.weights.clone(),
        coherence: Some(Box::new(coherence_cert.clone())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
    }

    fn bell() -> DMatrix<Complex64> {
        let h = 0.5f64.sqrt();
        real_matrix(2, 2, &[h, 0.0, 0.0, h])
    }

    fn random_unit_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, complex: bool) -> DMatrix<Complex64> {
        let raw = DMatrix::from_fn(m, n, |_, _| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            c(re, im)
        });
        let norm = raw.norm();
        raw / c(norm, 0.0)
    }

    fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    }

    #[test]
    fn bell_state_has_uniform_coefficients() {
        let schmidt = schmidt_decompose(&bell(), 1e-12).unwrap();
        assert_eq!(schmidt.rank(), 2);
        for l in &schmidt.coefficients {
            assert_abs_diff_eq!(*l, 0.5f64.sqrt(), epsilon = 1e-12);
        }
        let recon = schmidt.state_vector();
        let expect = [0.5f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()];
        for (got, want) in recon.iter().zip(expect) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_state_is_rank_one() {
        let m = real_matrix(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
        assert_eq!(schmidt.rank(), 1);
        assert_abs_diff_eq!(schmidt.coefficients[0], 1.0, epsilon = 1e-12);
        for k in 1..=2 {
            let cert = entanglement_robustness(&schmidt, k, 1e-8).unwrap();
            assert_abs_diff_eq!(cert.value, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_unit_input_is_rejected() {
        let m = real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            schmidt_decompose(&m, 1e-12),
            Err(Error::NonUnitNorm { .. })
        ));
    }

    // Test-local Jacobi eigensolver for small symmetric matrices, used as an
    // oracle independent of the SVD.
    #[allow(clippy::needless_range_loop)]
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let mut p = 0;
            let mut q = 1;
            let mut biggest = 0.0f64;
            for i in 0..n {
                for j in i + 1..n {
                    if a[i][j].abs() > biggest {
                        biggest = a[i][j].abs();
                        p = i;
                        q = j;
                    }
                }
            }
            if biggest < 1e-14 {
                break;
            }
            let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let cos = 1.0 / (t * t + 1.0).sqrt();
            let sin = t * cos;
            for i in 0..n {
                let aip = a[i][p];
                let aiq = a[i][q];
                a[i][p] = cos * aip - sin * aiq;
                a[i][q] = sin * aip + cos * aiq;
            }
            for j in 0..n {
                let apj = a[p][j];
                let aqj = a[q][j];
                a[p][j] = cos * apj - sin * aqj;
                a[q][j] = sin * apj + cos * aqj;
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        eigs
    }

    #[test]
    fn coefficients_match_gram_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_unit_matrix(&mut rng, 3, 4, false);
            let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
            let gram: Vec<Vec<f64>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            (0..4).map(|b| m[(i, b)].re * m[(j, b)].re).sum::<f64>()
                        })
                        .collect()
                })
                .collect();
            let eigs = jacobi_eigenvalues(gram);
            for (idx, l) in schmidt.coefficients.iter().enumerate() {
                assert_abs_diff_eq!(l * l, eigs[idx].max(0.0), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn complex_states_reconstruct_with_orthonormal_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = random_unit_matrix(&mut rng, 3, 4, true);
            let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
            let vec = schmidt.state_vector();
            for a in 0..3 {
                for b in 0..4 {
                    let d = vec[a * 4 + b] - m[(a, b)];
                    assert!(d.norm() <= 1e-10);
                }
            }
            for i in 0..schmidt.rank() {
                for j in 0..schmidt.rank() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let li: Vec<Complex64> = (0..3).map(|a| schmidt.left_basis[(a, i)]).collect();
                    let lj: Vec<Complex64> = (0..3).map(|a| schmidt.left_basis[(a, j)]).collect();
                    assert!((inner(&li, &lj) - c(want, 0.0)).norm() <= 1e-10);
                    let ri: Vec<Complex64> = (0..4).map(|b| schmidt.right_basis[(b, i)]).collect();
                    let rj: Vec<Complex64> = (0..4).map(|b| schmidt.right_basis[(b, j)]).collect();
                    assert!((inner(&ri, &rj) - c(want, 0.0)).norm() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn bell_state_k1_value_is_one() {
        let schmidt = schmidt_decompose(&bell(), 1e-12).unwrap();
        let cert = entanglement_robustness(&schmidt, 1, 1e-8).unwrap();
        assert_abs_diff_eq!(cert.value, 1.0, epsilon = 1e-10);
        assert_eq!(cert.lifted_atoms.len(), 2);
        // every atom is a product vector
        for atom in &cert.lifted_atoms {
            assert!(schmidt_tail_norm(atom, (2, 2), 1).unwrap() <= 1e-12);
        }
        // the witness attains the value in the product space
        let v = schmidt.state_vector();
        let ip = inner(&cert.dual_vector_b, &v);
        assert_abs_diff_eq!(ip.norm_sqr() - 1.0, cert.value, epsilon = 1e-10);
        assert_abs_diff_eq!(cert.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_state_k2_is_trivial_with_b_equal_v() {
        let schmidt = schmidt_decompose(&bell(), 1e-12).unwrap();
        let cert = entanglement_robustness(&schmidt, 2, 1e-8).unwrap();
        assert_abs_diff_eq!(cert.value, 0.0, epsilon = 1e-12);
        let v = schmidt.state_vector();
        for (bi, vi) in cert.dual_vector_b.iter().zip(&v) {
            assert!((bi - vi).norm() <= 1e-10);
        }
    }

    #[test]
    fn maximally_entangled_three_by_three() {
        let l = 1.0 / 3.0f64.sqrt();
        let m = real_matrix(3, 3, &[l, 0.0, 0.0, 0.0, l, 0.0, 0.0, 0.0, l]);
        let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
        let cert = entanglement_robustness(&schmidt, 2, 1e-8).unwrap();
        assert_abs_diff_eq!(cert.value, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(cert.gamma_norm, 1.5, epsilon = 1e-10);
        let v = schmidt.state_vector();
        let ip = inner(&cert.dual_vector_b, &v);
        assert_abs_diff_eq!(ip.norm_sqr() - 1.0, 0.5, epsilon = 1e-8);
        for atom in &cert.lifted_atoms {
            assert_eq!(atom.len(), 9);
            assert!(schmidt_tail_norm(atom, (3, 3), 2).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn middle_branch_value_transports() {
        let vals = [0.50f64.sqrt(), 0.25f64.sqrt(), 0.15f64.sqrt(), 0.10f64.sqrt()];
        let m = DMatrix::from_fn(4, 4, |i, j| if i == j { c(vals[i], 0.0) } else { c(0.0, 0.0) });
        let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
        let cert = entanglement_robustness(&schmidt, 3, 1e-8).unwrap();
        assert_abs_diff_eq!(cert.value, 0.22423753745794883, epsilon = 1e-10);
        let coherence = cert.coherence.as_ref().unwrap();
        assert_eq!(coherence.branch.ell, 2);
        // mixture of lifted atoms minus vv† is PSD with trace = value
        let v = schmidt.state_vector();
        let d = 16;
        let mut residual = DMatrix::from_element(d, d, c(0.0, 0.0));
        for (atom, w) in cert.lifted_atoms.iter().zip(&cert.weights) {
            for i in 0..d {
                for j in 0..d {
                    residual[(i, j)] += c(*w, 0.0) * atom[i] * atom[j].conj();
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                residual[(i, j)] -= v[i] * v[j].conj();
            }
        }
        let trace: f64 = (0..d).map(|i| residual[(i, i)].re).sum();
        assert_abs_diff_eq!(trace, cert.value, epsilon = 1e-8);
        let min_eig = residual
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-9);
    }

    #[test]
    fn local_unitaries_leave_values_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let m = random_unit_matrix(&mut rng, 3, 4, true);
            let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
            let u = random_unit_matrix(&mut rng, 3, 3, true).qr().q();
            let v = random_unit_matrix(&mut rng, 4, 4, true).qr().q();
            let rotated = &u * &m * v.transpose();
            let schmidt_rot = schmidt_decompose(&rotated, 1e-12).unwrap();
            for k in 1..=3 {
                let a = entanglement_robustness(&schmidt, k, 1e-7).unwrap();
                let b = entanglement_robustness(&schmidt_rot, k, 1e-7).unwrap();
                assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn monotone_in_k_and_zero_from_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = random_unit_matrix(&mut rng, 4, 4, true);
        let schmidt = schmidt_decompose(&m, 1e-12).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let cert = entanglement_robustness(&schmidt, k, 1e-7).unwrap();
            assert!(cert.value <= prev + 1e-12);
            prev = cert.value;
            if k >= schmidt.rank() {
                assert_abs_diff_eq!(cert.value, 0.0, epsilon = 1e-10);
            }
        }
        assert!(matches!(
            entanglement_robustness(&schmidt, 5, 1e-7),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            entanglement_robustness(&schmidt, 0, 1e-7),
            Err(Error::KOutOfRange { .. })
        ));
    }

    #[test]
    fn lift_rejects_rank_mismatch() {
        let schmidt = schmidt_decompose(&bell(), 1e-12).unwrap();
        let tri = 1.0 / 3.0f64.sqrt();
        let state = CanonicalState::from_sorted(vec![tri; 3], 1e-9).unwrap();
        let cert = certify(&state, 2, 1e-8).unwrap();
        assert!(matches!(
            lift_certificates(&schmidt, &cert),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
