//! Closed-form robustness of k-coherence for a few pure states, showing how
//! the active branch index moves with k.

use krobust::{canonicalize, robustness_value};
use num_complex::Complex64;

fn main() {
    let states: [(&str, Vec<f64>); 3] = [
        ("uniform on 4 levels", vec![0.5, 0.5, 0.5, 0.5]),
        ("one dominant level", {
            let s = 21f64.sqrt();
            vec![3.0 / s, 2.0 / s, 2.0 / s, 2.0 / s]
        }),
        ("two levels only", vec![0.8, 0.6, 0.0, 0.0]),
    ];

    for (label, amplitudes) in states {
        let raw: Vec<Complex64> = amplitudes
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let state = canonicalize(&raw, 1e-9).expect("unit state");
        println!("{label}: v = {amplitudes:?}");
        for k in 2..=state.dim() {
            let rv = robustness_value(&state, k).expect("valid k");
            println!(
                "  k = {k}: value = {:<22} ell = {}  alpha = {:.6}  beta^2 = {:.6}",
                rv.value, rv.branch.ell, rv.branch.alpha, rv.branch.beta_sq
            );
        }
    }
}
