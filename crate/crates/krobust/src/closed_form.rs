//! The closed-form robustness value and the k-support norm pair.

use crate::branch::{select_branch, BranchData};
use crate::state::{canonicalize, CanonicalState};
use crate::{Error, Result, DEFAULT_NORM_TOLERANCE};
use num_complex::Complex64;

/// The common value of the standard and generalized robustness of
/// k-coherence of a pure state, together with the branch data it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessValue {
    /// R_k^s = R_k^g = s_ℓ²/(k−ℓ+1) − Σ_{i≥ℓ} v_i².
    pub value: f64,
    /// The branch quantities (ℓ, tail sums, α, β²) behind the value.
    pub branch: BranchData,
    /// ‖v‖_(k)² = value + 1.
    pub k_support_norm_sq: f64,
}

/// Evaluate the robustness of k-coherence of `state` (2 ≤ k ≤ n).
///
/// The tail form s_ℓ²/(k−ℓ+1) − Σ_{i≥ℓ} v_i² is used rather than β² − 1:
/// for states with at most k non-zero entries both factors collapse to
/// v_k² − v_k², so the value is an exact 0.0 instead of unit-norm rounding
/// noise. Tiny negative rounding residue is clamped to 0.
pub fn robustness_value(state: &CanonicalState, k: usize) -> Result<RobustnessValue> {
    let branch = select_branch(state, k)?;
    let ell = branch.ell;
    let v = state.entries();

    let mut tail_sq = 0.0;
    for x in v[ell - 1..].iter().rev() {
        tail_sq += x * x;
    }
    let s_ell = branch.tail_sum(ell);
    let value = (s_ell * s_ell / ((k - ell + 1) as f64) - tail_sq).max(0.0);

    Ok(RobustnessValue {
        value,
        branch,
        k_support_norm_sq: value + 1.0,
    })
}

/// The k-support norm ‖x‖_(k): equal to ℓ1 at k = 1, ℓ2 at k = n, and in
/// between given by ‖x‖₂·β(x/‖x‖₂) through the unit-vector identity
/// ‖v‖_(k)² = robustness + 1 (norms are absolutely homogeneous, so the unit
/// case determines all of them). The zero vector returns 0.
pub fn k_support_norm(x: &[Complex64], k: usize) -> Result<f64> {
    let n = validate_norm_input(x, k)?;
    let norm2 = l2_norm(x);
    if norm2 == 0.0 {
        return Ok(0.0);
    }
    if k == 1 {
        return Ok(x.iter().map(|z| z.norm()).sum());
    }
    if k == n {
        return Ok(norm2);
    }
    let unit: Vec<Complex64> = x.iter().map(|z| z / norm2).collect();
    let state = canonicalize(&unit, DEFAULT_NORM_TOLERANCE)?;
    let rv = robustness_value(&state, k)?;
    Ok(norm2 * rv.k_support_norm_sq.sqrt())
}

/// The dual of the k-support norm: the Euclidean norm of the k
/// largest-modulus coordinates, √(Σ_{i=1}^k |x_i^↓|²).
pub fn k_support_dual_norm(x: &[Complex64], k: usize) -> Result<f64> {
    validate_norm_input(x, k)?;
    let mut sq: Vec<f64> = x.iter().map(|z| z.norm_sqr()).collect();
    sq.sort_by(|a, b| b.partial_cmp(a).expect("finite moduli"));
    Ok(sq[..k].iter().sum::<f64>().sqrt())
}

fn validate_norm_input(x: &[Complex64], k: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = x.len();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n, min: 1, max: n });
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite vector entry".into()));
    }
    Ok(n)
}

fn l2_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::canonicalize;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn real(values: &[f64]) -> Vec<Complex64> {
        values.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn state_of(values: &[f64]) -> CanonicalState {
        canonicalize(&real(values), 1e-9).unwrap()
    }

    #[test]
    fn uniform_state_value_is_n_over_k_minus_one() {
        let state = state_of(&[0.5, 0.5, 0.5, 0.5]);
        let rv = robustness_value(&state, 2).unwrap();
        assert_eq!(rv.value, 1.0);
        assert_eq!(rv.branch.ell, 1);
        assert_eq!(rv.k_support_norm_sq, 2.0);
    }

    #[test]
    fn basis_state_value_is_zero() {
        let state = state_of(&[1.0, 0.0, 0.0]);
        for k in 2..=3 {
            assert_eq!(robustness_value(&state, k).unwrap().value, 0.0);
        }
    }

    #[test]
    fn at_most_k_nonzeros_gives_exact_zero() {
        let state = state_of(&[0.8, 0.6, 0.0, 0.0]);
        assert_eq!(robustness_value(&state, 2).unwrap().value, 0.0);
        assert_eq!(robustness_value(&state, 3).unwrap().value, 0.0);
    }

    #[test]
    fn middle_branch_value() {
        let state = state_of(&[
            0.50f64.sqrt(),
            0.25f64.sqrt(),
            0.15f64.sqrt(),
            0.10f64.sqrt(),
        ]);
        let rv = robustness_value(&state, 3).unwrap();
        assert_eq!(rv.branch.ell, 2);
        assert_abs_diff_eq!(rv.value, 0.22423753745794883, epsilon = 1e-14);
    }

    #[test]
    fn ell_eq_1_value() {
        let state = state_of(&[0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()]);
        let rv = robustness_value(&state, 2).unwrap();
        assert_eq!(rv.branch.ell, 1);
        assert_abs_diff_eq!(rv.value, 0.44847507491589744, epsilon = 1e-14);
    }

    #[test]
    fn k_support_norm_reduces_to_l1_and_l2() {
        let x = real(&[3.0, 4.0]);
        assert_abs_diff_eq!(k_support_norm(&x, 1).unwrap(), 7.0);
        assert_abs_diff_eq!(k_support_norm(&x, 2).unwrap(), 5.0);
    }

    #[test]
    fn k_support_norm_of_uniform_unit() {
        let x = real(&[0.5, 0.5, 0.5, 0.5]);
        assert_abs_diff_eq!(
            k_support_norm(&x, 2).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn k_support_norm_is_homogeneous() {
        let x = real(&[1.0, 2.0, 0.5, 0.25, 3.0]);
        let base = k_support_norm(&x, 3).unwrap();
        let scaled: Vec<Complex64> = x.iter().map(|z| z * 2.5).collect();
        assert_abs_diff_eq!(k_support_norm(&scaled, 3).unwrap(), 2.5 * base, epsilon = 1e-12);
    }

    #[test]
    fn zero_vector_norms_are_zero() {
        let x = real(&[0.0, 0.0, 0.0]);
        assert_eq!(k_support_norm(&x, 2).unwrap(), 0.0);
        assert_eq!(k_support_dual_norm(&x, 2).unwrap(), 0.0);
    }

    #[test]
    fn dual_norm_examples() {
        assert_abs_diff_eq!(
            k_support_dual_norm(&real(&[3.0, 4.0, 12.0]), 2).unwrap(),
            12.649110640673518,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            k_support_dual_norm(&real(&[1.0, 1.0, 1.0]), 3).unwrap(),
            3.0f64.sqrt()
        );
        assert_abs_diff_eq!(k_support_dual_norm(&real(&[5.0, 0.0, 0.0]), 1).unwrap(), 5.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(k_support_norm(&[], 1), Err(Error::EmptyInput)));
        let x = real(&[1.0, 1.0]);
        assert!(matches!(k_support_norm(&x, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(k_support_norm(&x, 3), Err(Error::KOutOfRange { .. })));
        let bad = vec![Complex64::new(f64::NAN, 0.0)];
        assert!(matches!(k_support_norm(&bad, 1), Err(Error::InvalidInput(_))));
    }

    fn arb_unit_state(max_dim: usize) -> impl Strategy<Value = CanonicalState> {
        proptest::collection::vec(0.0f64..1.0, 2..=max_dim).prop_filter_map(
            "norm too small",
            |values| {
                let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-3 {
                    return None;
                }
                let raw: Vec<Complex64> = values
                    .iter()
                    .map(|&x| Complex64::new(x / norm, 0.0))
                    .collect();
                Some(canonicalize(&raw, 1e-9).unwrap())
            },
        )
    }

    proptest! {
        #[test]
        fn value_is_non_increasing_in_k_and_zero_at_n(state in arb_unit_state(8)) {
            let n = state.dim();
            let mut prev = f64::INFINITY;
            for k in 2..=n {
                let rv = robustness_value(&state, k).unwrap();
                prop_assert!(rv.value >= 0.0);
                prop_assert!(rv.value <= prev + 1e-12);
                prev = rv.value;
            }
            prop_assert!(robustness_value(&state, n).unwrap().value <= 1e-12);
        }

        #[test]
        fn norm_interpolates_between_l2_and_l1(
            values in proptest::collection::vec(-5.0f64..5.0, 1..8),
        ) {
            let x = real(&values);
            let l1: f64 = values.iter().map(|v| v.abs()).sum();
            let l2: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            for k in 1..=x.len() {
                let nk = k_support_norm(&x, k).unwrap();
                prop_assert!(nk <= l1 + 1e-9);
                prop_assert!(nk >= l2 - 1e-9);
            }
        }

        #[test]
        fn duality_inequality_holds(
            xs in proptest::collection::vec(-3.0f64..3.0, 2..7),
            ys in proptest::collection::vec(-3.0f64..3.0, 2..7),
        ) {
            let n = xs.len().min(ys.len());
            let x = real(&xs[..n]);
            let y = real(&ys[..n]);
            let inner: f64 = xs[..n].iter().zip(&ys[..n]).map(|(a, b)| a * b).sum();
            for k in 1..=n {
                let bound = k_support_norm(&x, k).unwrap() * k_support_dual_norm(&y, k).unwrap();
                prop_assert!(inner.abs() <= bound + 1e-8);
            }
        }
    }
}
