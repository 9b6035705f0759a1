//! Cross-cutting properties on the public API that no single module owns:
//! norm axioms, monotonicity in k, invariances, and the product-state edge
//! of the entanglement layer.

use krobust::{
    canonicalize, certify, entanglement_robustness, k_support_dual_norm, k_support_norm,
    robustness_value, schmidt_decompose,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n)
        .prop_map(|pairs| pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn unit_state(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    complex_vector(n).prop_filter_map("non-degenerate norm", |v| {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (norm > 0.3).then(|| v.iter().map(|z| z / norm).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_support_norm_satisfies_the_norm_axioms(
        (x, y) in (1usize..9).prop_flat_map(|n| (complex_vector(n), complex_vector(n))),
        scale in -2.5..2.5f64,
    ) {
        let n = x.len();
        for k in 1..=n {
            let nx = k_support_norm(&x, k).unwrap();
            let ny = k_support_norm(&y, k).unwrap();
            let sum: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let nsum = k_support_norm(&sum, k).unwrap();
            prop_assert!(nsum <= nx + ny + 1e-9, "triangle: {nsum} > {nx} + {ny}");

            let scaled: Vec<Complex64> = x.iter().map(|z| z * scale).collect();
            let nscaled = k_support_norm(&scaled, k).unwrap();
            prop_assert!(
                (nscaled - scale.abs() * nx).abs() <= 1e-9 * (1.0 + nx),
                "homogeneity: {nscaled} vs {}", scale.abs() * nx
            );
        }
    }

    #[test]
    fn norms_are_monotone_in_k(x in complex_vector(7)) {
        for k in 1..7 {
            let norm_k = k_support_norm(&x, k).unwrap();
            let norm_next = k_support_norm(&x, k + 1).unwrap();
            prop_assert!(norm_next <= norm_k + 1e-10);
            let dual_k = k_support_dual_norm(&x, k).unwrap();
            let dual_next = k_support_dual_norm(&x, k + 1).unwrap();
            prop_assert!(dual_next + 1e-12 >= dual_k);
        }
    }

    #[test]
    fn robustness_decreases_in_k_and_stays_nonnegative(v in unit_state(8)) {
        let state = canonicalize(&v, 1e-9).unwrap();
        let mut previous = f64::INFINITY;
        for k in 2..=8 {
            let value = robustness_value(&state, k).unwrap().value;
            prop_assert!(value >= 0.0);
            prop_assert!(value <= previous + 1e-12, "value grew at k={k}");
            previous = value;
        }
    }

    #[test]
    fn value_is_invariant_under_phases_and_permutation(
        v in unit_state(6),
        phases in proptest::collection::vec(0.0..std::f64::consts::TAU, 6),
        rotate in 0usize..6,
    ) {
        let state = canonicalize(&v, 1e-9).unwrap();
        let mut twisted: Vec<Complex64> = v
            .iter()
            .zip(&phases)
            .map(|(z, &t)| z * Complex64::from_polar(1.0, t))
            .collect();
        twisted.rotate_left(rotate);
        let twisted_state = canonicalize(&twisted, 1e-9).unwrap();
        for k in 2..=6 {
            let a = robustness_value(&state, k).unwrap().value;
            let b = robustness_value(&twisted_state, k).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn certified_values_match_the_closed_form(v in unit_state(6), k in 2usize..6) {
        let state = canonicalize(&v, 1e-9).unwrap();
        let cert = certify(&state, k, 1e-7).unwrap();
        let rv = robustness_value(&state, k).unwrap();
        prop_assert_eq!(cert.value, rv.value);
        prop_assert!(cert.certified);
    }

    #[test]
    fn product_states_have_zero_entanglement_robustness(
        left in unit_state(3),
        right in unit_state(4),
    ) {
        let matrix = DMatrix::from_fn(3, 4, |a, b| left[a] * right[b]);
        let schmidt = schmidt_decompose(&matrix, 1e-12).unwrap();
        prop_assert_eq!(schmidt.rank(), 1);
        for k in 1..=3 {
            let cert = entanglement_robustness(&schmidt, k, 1e-8).unwrap();
            prop_assert!(cert.value.abs() <= 1e-12, "k={k}: {}", cert.value);
        }
    }
}
