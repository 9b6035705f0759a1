//! The k-support norm and its dual on arbitrary complex vectors: the duality
//! inequality and the l1/l2 endpoints.

use krobust::{k_support_dual_norm, k_support_norm};
use num_complex::Complex64;

fn main() {
    let x: Vec<Complex64> = vec![
        Complex64::new(3.0, 0.0),
        Complex64::new(0.0, -2.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(-0.5, 0.0),
    ];
    let y: Vec<Complex64> = vec![
        Complex64::new(1.0, 0.5),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(0.25, 0.0),
    ];
    let n = x.len();

    println!("x = {x:?}");
    for k in 1..=n {
        let norm = k_support_norm(&x, k).expect("valid k");
        let dual = k_support_dual_norm(&x, k).expect("valid k");
        println!("  k = {k}: ||x||_(k) = {norm:.12}   ||x||_(k)^d = {dual:.12}");
    }

    let l1: f64 = x.iter().map(|z| z.norm()).sum();
    let l2: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!("endpoints: k=1 recovers l1 = {l1:.12}, k=n recovers l2 = {l2:.12}");

    let inner: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
    println!();
    println!("duality |<x,y>| <= ||x||_(k) * ||y||_(k)^d:");
    for k in 1..=n {
        let bound = k_support_norm(&x, k).unwrap() * k_support_dual_norm(&y, k).unwrap();
        println!(
            "  k = {k}: {:.6} <= {:.6}  ({})",
            inner.norm(),
            bound,
            if inner.norm() <= bound + 1e-12 { "holds" } else { "violated" }
        );
    }
}
