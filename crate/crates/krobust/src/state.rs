//! Canonical form of a pure-state vector.
//!
//! Every computation in this crate is stated for vectors with real,
//! non-negative entries sorted non-increasingly. That is not a restriction:
//! any complex unit vector can be brought to this form by stripping the phase
//! of each entry and permuting, and neither operation changes a robustness
//! value. [`canonicalize`] performs the reduction and records enough to undo
//! it.

use num_complex::Complex64;

use crate::{Error, Result};

/// A pure state reduced to sorted non-negative real form.
///
/// `entries` are the moduli of the input, renormalized to exact unit norm and
/// sorted non-increasingly. `permutation[i]` is the position in `entries` of
/// original index `i`, and `phases[i]` is the unit-modulus scalar stripped
/// from original entry `i`, so the input is recovered (up to its original
/// norm) by applying phases and the inverse permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalState {
    entries: Vec<f64>,
    dim: usize,
    permutation: Vec<usize>,
    phases: Vec<Complex64>,
    norm_tolerance: f64,
    original_norm: f64,
}

impl CanonicalState {
    /// Sorted non-negative entries (unit Euclidean norm).
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Dimension n of the underlying space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Map from original index to sorted position.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Unit-modulus scalar removed from each original entry.
    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// Tolerance the input norm was checked against.
    pub fn norm_tolerance(&self) -> f64 {
        self.norm_tolerance
    }

    /// Euclidean norm of the raw input before renormalization.
    pub fn original_norm(&self) -> f64 {
        self.original_norm
    }

    /// Reapply phases and the inverse permutation, reproducing the original
    /// input vector (scaled back to its original norm).
    pub fn reconstruct(&self) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.phases[i] * (self.entries[self.permutation[i]] * self.original_norm))
            .collect()
    }

    /// Number of entries that are exactly zero.
    pub fn zero_count(&self) -> usize {
        self.entries.iter().filter(|&&v| v == 0.0).count()
    }

    /// Build a state directly from entries already in canonical form
    /// (non-negative, sorted non-increasing, unit norm within `norm_tolerance`).
    ///
    /// Used where the sorted form arises naturally, e.g. Schmidt coefficients.
    pub fn from_sorted(entries: Vec<f64>, norm_tolerance: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        for w in entries.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidInput(format!(
                    "entries not sorted non-increasing: {} < {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = entries.last() {
            if last < 0.0 {
                return Err(Error::InvalidInput(format!("negative entry {last}")));
            }
        }
        let norm = entries.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > norm_tolerance {
            return Err(Error::NonUnitNorm {
                norm,
                tolerance: norm_tolerance,
            });
        }
        let dim = entries.len();
        let entries = entries.into_iter().map(|v| v / norm).collect();
        Ok(Self {
            entries,
            dim,
            permutation: (0..dim).collect(),
            phases: vec![Complex64::new(1.0, 0.0); dim],
            norm_tolerance,
            original_norm: norm,
        })
    }
}

/// Reduce a complex vector to canonical form.
///
/// The input must be non-empty with Euclidean norm within `norm_tolerance` of
/// 1; it is renormalized to exact unit norm before use. Ties between equal
/// moduli are broken by original index (stable sort), so the recorded
/// permutation is deterministic. Idempotent on already-canonical input.
pub fn canonicalize(raw: &[Complex64], norm_tolerance: f64) -> Result<CanonicalState> {
    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > norm_tolerance {
        return Err(Error::NonUnitNorm {
            norm,
            tolerance: norm_tolerance,
        });
    }

    let dim = raw.len();
    let moduli: Vec<f64> = raw.iter().map(|z| z.norm()).collect();
    let phases: Vec<Complex64> = raw
        .iter()
        .zip(&moduli)
        .map(|(z, &m)| {
            if m == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                z / m
            }
        })
        .collect();

    // order[j] = original index of the j-th sorted entry
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| moduli[b].partial_cmp(&moduli[a]).unwrap());
    let mut permutation = vec![0usize; dim];
    for (sorted_pos, &orig) in order.iter().enumerate() {
        permutation[orig] = sorted_pos;
    }
    let entries: Vec<f64> = order.iter().map(|&i| moduli[i] / norm).collect();

    Ok(CanonicalState {
        entries,
        dim,
        permutation,
        phases,
        norm_tolerance,
        original_norm: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn re(values: &[f64]) -> Vec<Complex64> {
        values.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn sorts_moduli_and_records_phases() {
        let raw = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.6),
            Complex64::new(0.8, 0.0),
        ];
        let state = canonicalize(&raw, 1e-9).unwrap();
        assert_eq!(state.entries(), &[0.8, 0.6, 0.0]);
        assert_eq!(state.phases()[0], Complex64::new(1.0, 0.0));
        assert_eq!(state.phases()[1], Complex64::new(0.0, 1.0));
        assert_eq!(state.phases()[2], Complex64::new(1.0, 0.0));
        // original index 2 holds the largest modulus
        assert_eq!(state.permutation(), &[2, 1, 0]);
    }

    #[test]
    fn basis_state_is_fixed_point() {
        let raw = re(&[1.0, 0.0, 0.0, 0.0]);
        let state = canonicalize(&raw, 1e-9).unwrap();
        assert_eq!(state.entries(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(state.permutation(), &[0, 1, 2, 3]);
    }

    #[test]
    fn global_phase_is_removed() {
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let raw: Vec<Complex64> = (0..4).map(|_| phase * 0.5).collect();
        let state = canonicalize(&raw, 1e-9).unwrap();
        for &e in state.entries() {
            assert_abs_diff_eq!(e, 0.5, epsilon = 1e-15);
        }
        for &p in state.phases() {
            assert_abs_diff_eq!((p - phase).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_empty_and_non_unit() {
        assert!(matches!(canonicalize(&[], 1e-9), Err(Error::EmptyInput)));
        let raw = re(&[0.5, 0.5]);
        assert!(matches!(
            canonicalize(&raw, 1e-9),
            Err(Error::NonUnitNorm { .. })
        ));
    }

    #[test]
    fn equal_moduli_break_ties_by_original_index() {
        let raw = vec![Complex64::new(0.0, 0.5), Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, -0.5)];
        let state = canonicalize(&raw, 1e-9).unwrap();
        assert_eq!(state.permutation(), &[0, 1, 2, 3]);
    }

    #[test]
    fn from_sorted_validates() {
        assert!(CanonicalState::from_sorted(vec![0.6, 0.8], 1e-9).is_err());
        assert!(CanonicalState::from_sorted(vec![], 1e-9).is_err());
        let s = CanonicalState::from_sorted(vec![0.8, 0.6], 1e-9).unwrap();
        assert_eq!(s.entries(), &[0.8, 0.6]);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent_and_reconstructs(parts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..9)) {
            let norm = parts.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let raw: Vec<Complex64> = parts.iter().map(|&(a, b)| Complex64::new(a / norm, b / norm)).collect();

            let state = canonicalize(&raw, 1e-9).unwrap();

            // entries sorted, non-negative, unit norm
            for w in state.entries().windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            prop_assert!(state.entries().iter().all(|&v| v >= 0.0));
            let n2: f64 = state.entries().iter().map(|v| v * v).sum();
            prop_assert!((n2 - 1.0).abs() < 1e-12);

            // reconstruction reproduces the input
            let rec = state.reconstruct();
            for (z, w) in raw.iter().zip(&rec) {
                prop_assert!((z - w).norm() < 1e-12);
            }

            // idempotence on the entries field
            let again = canonicalize(&rec, 1e-9).unwrap();
            for (a, b) in state.entries().iter().zip(again.entries()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
