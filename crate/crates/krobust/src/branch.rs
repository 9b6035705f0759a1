//! Branch selection: the tail sums and the index that decide which of the
//! closed-form expressions applies to a given state and k.

use crate::state::CanonicalState;
use crate::{Error, Result};

/// The branch quantities every other module consumes.
///
/// For a canonical state v and a level k, `ell` is the largest integer in
/// {2,…,k} with v_{ℓ−1} ≥ s_ℓ/(k−ℓ+1) (1 if none exists), where
/// s_j = Σ_{i=j}^n v_i. The boundary case v_{ℓ−1} = s_ℓ/(k−ℓ+1) resolves to
/// the larger ℓ since the condition is an inequality with equality allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchData {
    /// The coherence level, 2 ≤ k ≤ n.
    pub k: usize,
    /// The selected branch index, 1 ≤ ell ≤ k.
    pub ell: usize,
    /// tail_sums[j-1] = s_j = Σ_{i=j}^n v_i, for j = 1…n.
    pub tail_sums: Vec<f64>,
    /// α = s_ℓ/(k−ℓ+1).
    pub alpha: f64,
    /// β² = α·s_ℓ + Σ_{j<ℓ} v_j²; the robustness value is β² − 1.
    pub beta_sq: f64,
}

impl BranchData {
    /// s_j for 1-based j.
    pub fn tail_sum(&self, j: usize) -> f64 {
        self.tail_sums[j - 1]
    }
}

/// Select the branch for `state` at level `k` (2 ≤ k ≤ n).
pub fn select_branch(state: &CanonicalState, k: usize) -> Result<BranchData> {
    let n = state.dim();
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n, min: 2, max: n });
    }
    let v = state.entries();

    // Single backward pass avoids cancellation: each s_j is a sum of
    // non-negative terms.
    let mut tail_sums = vec![0.0; n];
    let mut acc = 0.0;
    for j in (0..n).rev() {
        acc += v[j];
        tail_sums[j] = acc;
    }

    let mut ell = 1;
    for cand in (2..=k).rev() {
        let denom = (k - cand + 1) as f64;
        if v[cand - 2] >= tail_sums[cand - 1] / denom {
            ell = cand;
            break;
        }
    }

    let alpha = tail_sums[ell - 1] / ((k - ell + 1) as f64);
    let head_sq: f64 = v[..ell - 1].iter().map(|x| x * x).sum();
    let beta_sq = alpha * tail_sums[ell - 1] + head_sq;

    Ok(BranchData {
        k,
        ell,
        tail_sums,
        alpha,
        beta_sq,
    })
}

/// Distance of the state from the nearest branch boundary at level `k`:
/// min over ℓ' ∈ {2,…,k} of |v_{ℓ'−1} − s_{ℓ'}/(k−ℓ'+1)|.
///
/// Small margins mean the defining inequality is close to equality, which is
/// where the primal LP is worst conditioned; certificates flag such instances.
pub fn boundary_margin(state: &CanonicalState, k: usize) -> f64 {
    let v = state.entries();
    let n = state.dim();
    let mut tail = 0.0;
    let mut tails = vec![0.0; n];
    for j in (0..n).rev() {
        tail += v[j];
        tails[j] = tail;
    }
    (2..=k)
        .map(|l| (v[l - 2] - tails[l - 1] / ((k - l + 1) as f64)).abs())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::canonicalize;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn state_of(values: &[f64]) -> CanonicalState {
        let raw: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        canonicalize(&raw, 1e-9).unwrap()
    }

    #[test]
    fn basis_state_selects_ell_eq_k() {
        let state = state_of(&[1.0, 0.0, 0.0]);
        let branch = select_branch(&state, 2).unwrap();
        assert_eq!(branch.ell, 2); // v_1 = 1 >= s_2 = 0
        assert_abs_diff_eq!(branch.alpha, 0.0);
        assert_abs_diff_eq!(branch.beta_sq, 1.0);
    }

    #[test]
    fn uniform_state_selects_ell_eq_1() {
        let state = state_of(&[0.5, 0.5, 0.5, 0.5]);
        let branch = select_branch(&state, 2).unwrap();
        assert_eq!(branch.ell, 1); // 0.5 < s_2/1 = 1.5
        assert_abs_diff_eq!(branch.beta_sq, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn middle_branch_example() {
        // Evaluate the branch inequality directly: ℓ=3 fails (v_2 = 0.5 < s_3),
        // ℓ=2 holds (v_1 ≈ 0.7071 >= s_2/2 ≈ 0.6018).
        let state = state_of(&[
            0.50f64.sqrt(),
            0.25f64.sqrt(),
            0.15f64.sqrt(),
            0.10f64.sqrt(),
        ]);
        let branch = select_branch(&state, 3).unwrap();
        assert_eq!(branch.ell, 2);
        assert_abs_diff_eq!(branch.tail_sum(2), 1.2035261006375797, epsilon = 1e-14);
        assert_abs_diff_eq!(branch.alpha, 0.6017630503187898, epsilon = 1e-14);
        assert_abs_diff_eq!(branch.beta_sq, 1.2242375374579488, epsilon = 1e-14);
    }

    #[test]
    fn boundary_equality_routes_to_larger_ell() {
        // v = (2t, t, t) with t = 1/sqrt(6): v_1 = s_2 exactly, so ℓ = 2 = k.
        let t = 1.0 / 6.0f64.sqrt();
        let state = state_of(&[2.0 * t, t, t]);
        let branch = select_branch(&state, 2).unwrap();
        assert_eq!(branch.ell, 2);
        assert_eq!(boundary_margin(&state, 2), 0.0);
    }

    #[test]
    fn k_out_of_range() {
        let state = state_of(&[1.0, 0.0]);
        assert!(matches!(select_branch(&state, 1), Err(Error::KOutOfRange { .. })));
        assert!(matches!(select_branch(&state, 3), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn tail_sums_are_non_increasing_and_start_above_one() {
        let norm = (0.36f64 + 0.2304 + 0.2304 + 0.16).sqrt();
        let values: Vec<f64> = [0.6, 0.48, 0.48, 0.4].iter().map(|v| v / norm).collect();
        let state = state_of(&values);
        let branch = select_branch(&state, 3).unwrap();
        for w in branch.tail_sums.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(branch.tail_sums[0] >= 1.0 - 1e-12);
    }

    fn random_unit(values: Vec<f64>) -> Option<CanonicalState> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        let raw: Vec<Complex64> = values
            .iter()
            .map(|&x| Complex64::new(x / norm, 0.0))
            .collect();
        Some(canonicalize(&raw, 1e-9).unwrap())
    }

    proptest! {
        // The returned ℓ is maximal: the inequality holds at ℓ (when ℓ ≥ 2)
        // and fails for every larger candidate.
        #[test]
        fn ell_is_maximal(values in proptest::collection::vec(0.0f64..1.0, 2..9), k_seed in 0usize..8) {
            let Some(state) = random_unit(values) else { return Ok(()); };
            let n = state.dim();
            let k = 2 + k_seed % (n - 1);
            let branch = select_branch(&state, k).unwrap();
            let v = state.entries();
            if branch.ell >= 2 {
                prop_assert!(v[branch.ell - 2] >= branch.tail_sum(branch.ell) / ((k - branch.ell + 1) as f64));
            }
            for cand in (branch.ell + 1)..=k {
                prop_assert!(v[cand - 2] < branch.tail_sum(cand) / ((k - cand + 1) as f64));
            }
            // ℓ = k exactly when v_{k-1} >= s_k
            prop_assert_eq!(branch.ell == k, v[k - 2] >= branch.tail_sum(k));
        }

        // Branch output is invariant under permutations and phases of the raw input.
        #[test]
        fn branch_invariant_under_permutation_and_phase(
            values in proptest::collection::vec(0.0f64..1.0, 3..8),
            perm_seed in 0u64..1000,
            phase_seed in 0u64..1000,
        ) {
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let unit: Vec<f64> = values.iter().map(|v| v / norm).collect();
            let n = unit.len();

            // deterministic shuffle + phases from the seeds
            let mut idx: Vec<usize> = (0..n).collect();
            let mut s = perm_seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mut raw = vec![Complex64::new(0.0, 0.0); n];
            for (pos, &orig) in idx.iter().enumerate() {
                let angle = ((phase_seed + orig as u64 * 7919) % 628) as f64 / 100.0;
                raw[pos] = Complex64::from_polar(unit[orig], angle);
            }

            let base: Vec<Complex64> = unit.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            let s1 = canonicalize(&base, 1e-9).unwrap();
            let s2 = canonicalize(&raw, 1e-9).unwrap();
            let k = 2 + (perm_seed as usize) % (n - 1);
            let b1 = select_branch(&s1, k).unwrap();
            let b2 = select_branch(&s2, k).unwrap();
            prop_assert_eq!(b1.ell, b2.ell);
            prop_assert!((b1.beta_sq - b2.beta_sq).abs() < 1e-10);
        }
    }
}
