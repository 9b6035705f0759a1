//! Dual witnesses: explicit feasible points of the dual program that
//! lower-bound the robustness, and their independent verification.
//!
//! A matrix W is dual-feasible when W ⪰ 0 and I − W lies in the dual cone,
//! i.e. every k×k principal submatrix of W has maximum eigenvalue at most 1.
//! Its objective tr(vvᵀW) − 1 then lower-bounds the robustness. Both witness
//! shapes used here are outer products, so feasibility reduces to a top-k
//! diagonal sum; the verifier only falls back to enumerating all C(n,k)
//! submatrices when handed a matrix that is not the outer product its
//! metadata claims.

use crate::branch::BranchData;
use crate::state::CanonicalState;
use crate::util::Combinations;
use crate::{Error, Result, MAX_ENUMERATION_DIM};
use nalgebra::DMatrix;

/// How far the stored matrix may deviate entrywise from the outer product of
/// its attaining vector before verification distrusts the structure and
/// enumerates submatrices instead.
const RANK_ONE_MATCH_TOLERANCE: f64 = 1e-10;

/// Shape of the witness matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// W = aaᵀ with a = (v₁,…,v_{ℓ−1},α,…,α)/β (branches with ℓ ≥ 2).
    RankOne,
    /// W = Jₙ/k, the all-ones matrix scaled by 1/k (the ℓ = 1 branch).
    AllOnes,
}

/// A dual-feasible matrix with its claimed objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    pub kind: WitnessKind,
    /// The attaining vector; present exactly for `RankOne`.
    pub a: Option<Vec<f64>>,
    pub matrix: DMatrix<f64>,
    /// tr(vvᵀW) − 1, equal to the robustness value for an honest witness.
    pub objective: f64,
    pub k: usize,
}

impl DualWitness {
    /// The unit-dual-norm vector attaining ⟨a, v⟩ = β. For `AllOnes` this is
    /// 𝟙/√k, since Jₙ/k is itself the outer product of that vector.
    pub fn attaining_vector(&self) -> Vec<f64> {
        match (&self.kind, &self.a) {
            (WitnessKind::RankOne, Some(a)) => a.clone(),
            _ => {
                let u = 1.0 / (self.k as f64).sqrt();
                vec![u; self.matrix.nrows()]
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Outcome of [`verify_dual_witness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualVerification {
    /// W ⪰ −tol·I and every k×k principal submatrix has max eigenvalue
    /// ≤ 1 + tol.
    pub feasible: bool,
    /// Largest maximum eigenvalue over all k×k principal submatrices.
    pub max_submatrix_eig: f64,
    /// |claimed objective − recomputed tr(vvᵀW) + 1|.
    pub objective_gap: f64,
    /// Smallest eigenvalue of W (0 by structure for confirmed outer products).
    pub min_eigenvalue: f64,
}

/// Build the witness for `state` at the branch `branch`.
///
/// Precondition: `branch` was computed from `state` with the same k.
pub fn build_dual_witness(state: &CanonicalState, branch: &BranchData) -> DualWitness {
    let n = state.dim();
    assert_eq!(
        branch.tail_sums.len(),
        n,
        "branch data does not match the state dimension"
    );
    let v = state.entries();
    let k = branch.k;

    if branch.ell == 1 {
        let w = DMatrix::from_element(n, n, 1.0 / k as f64);
        let s1 = branch.tail_sum(1);
        return DualWitness {
            kind: WitnessKind::AllOnes,
            a: None,
            matrix: w,
            objective: s1 * s1 / k as f64 - 1.0,
            k,
        };
    }

    let beta = branch.beta_sq.sqrt();
    let mut a = Vec::with_capacity(n);
    a.extend(v[..branch.ell - 1].iter().map(|x| x / beta));
    a.extend(std::iter::repeat_n(branch.alpha / beta, n - branch.ell + 1));

    let w = DMatrix::from_fn(n, n, |i, j| a[i] * a[j]);
    let inner: f64 = a.iter().zip(v).map(|(ai, vi)| ai * vi).sum();
    DualWitness {
        kind: WitnessKind::RankOne,
        a: Some(a),
        matrix: w,
        objective: inner * inner - 1.0,
        k,
    }
}

/// Check `witness` against `state` at `tolerance`, recomputing everything
/// from the stored matrix rather than trusting the construction.
pub fn verify_dual_witness(
    witness: &DualWitness,
    state: &CanonicalState,
    tolerance: f64,
) -> Result<DualVerification> {
    let n = state.dim();
    let w = &witness.matrix;
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "witness matrix is {}x{}, state dimension is {}",
            w.nrows(),
            w.ncols(),
            n
        )));
    }
    let k = witness.k;
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n, min: 1, max: n });
    }

    let v = state.entries();
    let wv = w * DMatrix::from_column_slice(n, 1, v);
    let recomputed: f64 = v.iter().zip(wv.iter()).map(|(vi, yi)| vi * yi).sum();
    let objective_gap = (witness.objective - (recomputed - 1.0)).abs();

    // Fast path: matrix confirmed as the outer product of its attaining
    // vector. Any principal submatrix of aaᵀ is rank one with maximum
    // eigenvalue equal to its trace, so the worst k×k submatrix is read off
    // the k largest diagonal entries, and PSD holds by structure.
    let a = witness.attaining_vector();
    if a.len() == n {
        let deviation = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (w[(i, j)] - a[i] * a[j]).abs())
            .fold(0.0, f64::max);
        if deviation <= RANK_ONE_MATCH_TOLERANCE {
            let mut diag: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
            diag.sort_by(|x, y| y.partial_cmp(x).expect("finite diagonal"));
            let max_submatrix_eig: f64 = diag[..k].iter().sum();
            return Ok(DualVerification {
                feasible: max_submatrix_eig <= 1.0 + tolerance,
                max_submatrix_eig,
                objective_gap,
                min_eigenvalue: 0.0,
            });
        }
    }

    if n > MAX_ENUMERATION_DIM {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_DIM,
        });
    }

    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            asymmetry = asymmetry.max((w[(i, j)] - w[(j, i)]).abs());
        }
    }
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (w[(i, j)] + w[(j, i)]));
    let min_eigenvalue = sym
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    let mut max_submatrix_eig = f64::NEG_INFINITY;
    for subset in Combinations::new(n, k) {
        let sub = DMatrix::from_fn(k, k, |r, c| sym[(subset[r], subset[c])]);
        let top = sub
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        max_submatrix_eig = max_submatrix_eig.max(top);
    }

    Ok(DualVerification {
        feasible: asymmetry <= tolerance
            && min_eigenvalue >= -tolerance
            && max_submatrix_eig <= 1.0 + tolerance,
        max_submatrix_eig,
        objective_gap,
        min_eigenvalue,
    })
}
