//! The primal side in detail: the explicit mixture vv^T + S = sum p x x^T
//! over k-supported atoms, and the two-level split certifying that the
//! slack is 2-incoherent.

use krobust::{canonicalize, certify, decompose_into_i2};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() {
    let raw: Vec<Complex64> = [0.6, 0.5, 0.45, 0.25, 0.2]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let unit: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
    let state = canonicalize(&unit, 1e-9).expect("unit state");
    let k = 2;

    let cert = certify(&state, k, 1e-8).expect("certified");
    let primal = &cert.primal;
    println!("value = {}, slack trace = {}", cert.value, primal.s);
    println!("{} atoms, every support <= {k}:", primal.atoms.len());
    for (atom, weight) in primal.atoms.iter().zip(&primal.weights) {
        let support: Vec<usize> = atom
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, _)| i)
            .collect();
        println!("  p = {weight:.6}  support {support:?}");
    }
    println!(
        "reconstruction residual {:.3e}",
        primal.reconstruction_residual(&state)
    );
    println!(
        "slack split: {} pair parts + non-negative diagonal",
        primal.sigma_parts.pair_parts.len()
    );

    // The same splitting works for any symmetric matrix with non-negative
    // diagonal, non-positive off-diagonal, and non-negative row sums.
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[2.0, -0.5, -1.0, -0.5, 1.0, -0.25, -1.0, -0.25, 1.5],
    );
    let split = decompose_into_i2(&m).expect("legal matrix");
    println!();
    println!("standalone split of a diagonally dominant matrix:");
    for part in &split.pair_parts {
        println!(
            "  pair ({}, {}): coupling {}",
            part.i, part.j, part.coupling
        );
    }
    println!("  diagonal rest {:?}", split.diagonal_part);
    println!(
        "  exact reconstruction: {}",
        (split.reconstruct() - &m).abs().max() == 0.0
    );
}
